#ifndef SEGSSL_CONFIG_HPP
#define SEGSSL_CONFIG_HPP

#include <filesystem>
#include <map>
#include <string>

#include "segssl/dataset.hpp"
#include "segssl/trainer.hpp"

namespace segssl {

// key=value file: one entry per line, '#' starts a comment, blank lines
// ignored. Unknown and duplicate keys are rejected with the line number.
struct KvEntry {
    std::string value;
    int line = 0;
};
std::map<std::string, KvEntry> parse_kv_file(const std::filesystem::path& path);

struct ExperimentConfig {
    GenConfig gen;
    uint64_t data_seed = 42;

    double labeled_ratio = 0.05;
    int val_count = 20;
    int test_count = 40;
    uint64_t split_seed = 7;

    TrainConfig train;

    void validate() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

} // namespace segssl

#endif
