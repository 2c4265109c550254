#ifndef SEGSSL_COMMANDS_HPP
#define SEGSSL_COMMANDS_HPP

#include <filesystem>
#include <optional>
#include <vector>

#include "segssl/metrics.hpp"
#include "segssl/network.hpp"
#include "segssl/preprocess.hpp"
#include "segssl/trainer.hpp"

namespace segssl {

// Exit codes shared by every command:
//   0 success, 2 config error, 3 numeric failure, 4 data mismatch.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitData = 4;

int cmd_gen(const std::filesystem::path& config_path, const std::filesystem::path& out_dir);

int cmd_train(const std::filesystem::path& config_path, const std::filesystem::path& data_dir,
              const std::filesystem::path& out_dir, std::optional<TrainMode> mode_override);

// run_dir is a cmd_train output directory: checkpoint/ + preprocess_plan.txt.
int cmd_eval(const std::filesystem::path& run_dir, const std::filesystem::path& data_dir,
             const std::filesystem::path& out_dir);

int cmd_analyze(const std::filesystem::path& data_dir, const std::filesystem::path& out_dir);

int cmd_ablate(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
               const std::vector<uint64_t>& seeds);

// Test-set evaluation pieces, exposed so they can be exercised directly.
struct SampleEval {
    std::string id;
    MetricsReport report;
};

std::vector<SampleEval> evaluate_pairs(const std::vector<std::string>& ids,
                                       const std::vector<LabelMap>& preds,
                                       const std::vector<const LabelMap*>& gts, int num_classes);

struct EvalAggregate {
    double dice = 0.0;
    double iou = 0.0;
    std::optional<double> hd95; // over samples with defined surfaces
    std::optional<double> asd;
};

EvalAggregate aggregate_evals(const std::vector<SampleEval>& evals);

// Forward + argmax over already-normalized images, fanned out across
// SEGSSL_THREADS.
std::vector<LabelMap> predict_labels(const NetworkParams& params, const std::vector<Image>& images);

} // namespace segssl

#endif
