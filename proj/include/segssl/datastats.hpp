#ifndef SEGSSL_DATASTATS_HPP
#define SEGSSL_DATASTATS_HPP

#include <optional>
#include <vector>

#include "segssl/dataset.hpp"

namespace segssl {

struct QualityStats {
    double cnr = 0.0;        // |mean(fg) - mean(bg)| / std(bg)
    double snr = 0.0;        // mean(fg) / std(bg), signed
    double fbr_percent = 0.0; // foreground pixels / total pixels * 100
};

double fbr(const LabelMap& label);

// Foreground = label != 0; background std is the sample std (n-1).
// Throws DataError when fg or bg is empty or bg variance is zero.
double cnr(const Image& image, const LabelMap& label);
double snr(const Image& image, const LabelMap& label);

struct DatasetStats {
    QualityStats mean;                              // unweighted over usable images
    std::vector<std::optional<QualityStats>> per_image; // missing where an image errored
    int images_used = 0;
    int images_failed = 0;
};

DatasetStats analyze_dataset(const std::vector<LabeledSample>& samples);

} // namespace segssl

#endif
