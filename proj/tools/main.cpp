#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "segssl/commands.hpp"
#include "segssl/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"segssl - semi-supervised segmentation experiment runner"};
    app.require_subcommand(1);

    std::string config_path, data_dir, out_dir, run_dir, mode_str;
    std::vector<uint64_t> seeds;

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset and split it");
    gen->add_option("--config", config_path, "experiment config file")->required();
    gen->add_option("--out", out_dir, "output directory")->required();

    CLI::App* train = app.add_subcommand("train", "train a model on a generated dataset");
    train->add_option("--config", config_path, "experiment config file")->required();
    train->add_option("--data", data_dir, "dataset directory (from gen)")->required();
    train->add_option("--out", out_dir, "run output directory")->required();
    train->add_option("--mode", mode_str, "override mode: SL, SSL or SSL_AL");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    eval->add_option("--checkpoint", run_dir, "training run directory")->required();
    eval->add_option("--data", data_dir, "dataset directory")->required();
    eval->add_option("--out", out_dir, "output directory")->required();

    CLI::App* analyze = app.add_subcommand("analyze", "dataset quality statistics (CNR/SNR/FBR)");
    analyze->add_option("--data", data_dir, "dataset directory")->required();
    analyze->add_option("--out", out_dir, "output directory")->required();

    CLI::App* ablate = app.add_subcommand("ablate", "run SL vs SSL vs SSL_AL over several seeds");
    ablate->add_option("--config", config_path, "experiment config file")->required();
    ablate->add_option("--out", out_dir, "output directory")->required();
    ablate->add_option("--seeds", seeds, "training seeds")->delimiter(',')->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : segssl::kExitConfig;
    }

    try {
        if (gen->parsed()) return segssl::cmd_gen(config_path, out_dir);
        if (train->parsed()) {
            std::optional<segssl::TrainMode> mode;
            if (!mode_str.empty()) mode = segssl::parse_train_mode(mode_str);
            return segssl::cmd_train(config_path, data_dir, out_dir, mode);
        }
        if (eval->parsed()) return segssl::cmd_eval(run_dir, data_dir, out_dir);
        if (analyze->parsed()) return segssl::cmd_analyze(data_dir, out_dir);
        if (ablate->parsed()) return segssl::cmd_ablate(config_path, out_dir, seeds);
    } catch (const segssl::ConfigError& e) {
        fprintf(stderr, "config error: %s\n", e.what());
        return segssl::kExitConfig;
    }
    return 0;
}
