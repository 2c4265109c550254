#ifndef SEGSSL_DATASET_HPP
#define SEGSSL_DATASET_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "segssl/tensor.hpp"

namespace segssl {

// Generator output and disk carrier: image plus optional ground truth.
struct Sample {
    std::string id;
    Image image;
    std::optional<LabelMap> label;

    bool is_labeled() const { return label.has_value(); }
};

struct LabeledSample {
    std::string id;
    Image image;
    LabelMap label;
};

// No label member: code that trains on these cannot touch ground truth.
struct UnlabeledSample {
    std::string id;
    Image image;
};

struct DatasetSplit {
    std::vector<LabeledSample> labeled;
    std::vector<UnlabeledSample> unlabeled;
    std::vector<LabeledSample> validation;
    std::vector<LabeledSample> test;
    // Ground truth of the unlabeled pool, kept for post-hoc analysis only.
    // The trainer never reads this map.
    std::map<std::string, LabelMap> hidden_labels;
    int num_classes = 0;
};

enum class ShapeKind { Ellipse, Rect };

struct GenConfig {
    int count = 200;
    int height = 32;
    int width = 32;
    int num_classes = 3;
    double noise_sigma = 0.5;
    std::vector<ShapeKind> shape_kinds = {ShapeKind::Ellipse, ShapeKind::Rect};

    void validate() const;
};

// Background plus 1..num_classes-1 filled shapes, one foreground class each,
// intensity = class index, additive Gaussian noise. Deterministic per seed.
std::vector<Sample> generate_synthetic(const GenConfig& config, uint64_t seed);

// Carves validation/test off a seeded shuffle, then labels
// max(1, round(labeled_ratio * pool)) of the remaining pool (round half up).
// Ground truth of unlabeled samples moves into hidden_labels.
DatasetSplit split_dataset(const std::vector<Sample>& samples, double labeled_ratio,
                           int val_count, int test_count, uint64_t seed);

// On disk: one directory per split, <id>_img.segt plus <id>_lbl.segt per
// sample, and manifest.txt listing id, split, filenames, is_labeled.
// Unlabeled samples keep their label file (hidden ground truth).
void save_dataset(const DatasetSplit& split, const std::filesystem::path& dir);

// load_unlabeled_images=false records unlabeled ids from the manifest without
// touching their files (SL training must not depend on them existing).
DatasetSplit load_dataset(const std::filesystem::path& dir, bool load_unlabeled_images = true);

} // namespace segssl

#endif
