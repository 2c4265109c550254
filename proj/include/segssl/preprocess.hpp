#ifndef SEGSSL_PREPROCESS_HPP
#define SEGSSL_PREPROCESS_HPP

#include <filesystem>
#include <vector>

#include "segssl/dataset.hpp"

namespace segssl {

// Intensity normalization derived from the labeled pool only and applied
// unchanged to every other split.
struct PreprocessPlan {
    double intensity_mean = 0.0;
    double intensity_std = 1.0; // clamped to >= 1e-8
    int target_height = 0;
    int target_width = 0;
};

// Pooled population mean/std over all labeled-image pixels. The labeled
// images must share one size, which becomes the plan's target size.
PreprocessPlan compute_plan(const std::vector<LabeledSample>& labeled);

// (v - mean) / std on every pixel. Labels are never touched.
Image apply_plan(const PreprocessPlan& plan, const Image& image);
void apply_plan_in_place(const PreprocessPlan& plan, Image& image);

void save_plan(const PreprocessPlan& plan, const std::filesystem::path& path);
PreprocessPlan load_plan(const std::filesystem::path& path);

} // namespace segssl

#endif
