#ifndef SEGSSL_TRAINER_HPP
#define SEGSSL_TRAINER_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "segssl/augment.hpp"
#include "segssl/dataset.hpp"
#include "segssl/network.hpp"
#include "segssl/ssl.hpp"

namespace segssl {

enum class TrainMode { SL, SSL, SSL_AL };

std::string to_string(TrainMode mode);
TrainMode parse_train_mode(const std::string& s);

struct TrainConfig {
    TrainMode mode = TrainMode::SSL_AL;
    int e_maximum = 300;
    int e_warmup = 5;
    int filter_interval = 100;
    double drop_fraction = 0.15;
    int batch_size = 8;
    double lr0 = 0.005;
    double wd = 0.003;
    double momentum = 0.9;
    uint64_t seed = 1;
    WeakAugConfig weak;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double supervised_loss = 0.0;
    double unlabeled_loss = 0.0; // 0 while no pseudo-labeled samples train
    double total_loss = 0.0;
    int active_unlabeled = 0;
    double val_dice = 0.0; // NaN when the validation set is empty
};

struct FilterEventRecord {
    int epoch = 0;
    std::vector<UncertaintyScore> dropped;
};

struct TrainResult {
    NetworkParams params;
    std::vector<EpochRecord> history;
    std::vector<FilterEventRecord> filter_events;
    // Largest |per-pixel probability sum - 1| seen across every forward
    // pass of the run.
    double max_softmax_dev = 0.0;
};

// The full training loop: supervised warm-up, weak-to-strong pseudo-label
// consistency afterwards, entropy-based reverse filtering of the active
// unlabeled set at every positive multiple of filter_interval (SSL_AL).
// Images must already be preprocessed. Deterministic per config.seed.
TrainResult train(const TrainConfig& config, const DatasetSplit& split);

// epoch,supervised_loss,unlabeled_loss_component,total_loss,active_unlabeled,val_dice
void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path);
std::vector<EpochRecord> read_history_csv(const std::filesystem::path& path);

// epoch,sample_id,score - one row per dropped sample.
void write_filter_events_csv(const std::vector<FilterEventRecord>& events,
                             const std::filesystem::path& path);

} // namespace segssl

#endif
