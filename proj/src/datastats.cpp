#include "segssl/datastats.hpp"

#include <cmath>

#include "segssl/errors.hpp"

namespace segssl {

namespace {

struct FgBg {
    double fg_mean = 0.0;
    double bg_mean = 0.0;
    double bg_std = 0.0; // sample std, n-1
};

FgBg fg_bg_stats(const Image& image, const LabelMap& label) {
    if (image.height != label.height || image.width != label.width)
        throw DataError("stats: image/label shapes differ");

    double fg_sum = 0.0, bg_sum = 0.0;
    size_t fg_n = 0, bg_n = 0;
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) {
            bool fg = label.at(y, x) != 0;
            for (int c = 0; c < image.channels; ++c) {
                double v = image.at(y, x, c);
                if (fg) { fg_sum += v; ++fg_n; }
                else { bg_sum += v; ++bg_n; }
            }
        }
    if (fg_n == 0) throw DataError("stats: empty foreground");
    if (bg_n < 2) throw DataError("stats: background too small for a sample std");

    FgBg s;
    s.fg_mean = fg_sum / static_cast<double>(fg_n);
    s.bg_mean = bg_sum / static_cast<double>(bg_n);

    double sq = 0.0;
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) {
            if (label.at(y, x) != 0) continue;
            for (int c = 0; c < image.channels; ++c) {
                double d = image.at(y, x, c) - s.bg_mean;
                sq += d * d;
            }
        }
    s.bg_std = std::sqrt(sq / static_cast<double>(bg_n - 1));
    if (s.bg_std <= 0.0) throw DataError("stats: zero background variance");
    return s;
}

} // namespace

double fbr(const LabelMap& label) {
    size_t fg = 0;
    for (uint8_t v : label.data)
        if (v != 0) ++fg;
    return 100.0 * static_cast<double>(fg) / static_cast<double>(label.data.size());
}

double cnr(const Image& image, const LabelMap& label) {
    FgBg s = fg_bg_stats(image, label);
    return std::abs(s.fg_mean - s.bg_mean) / s.bg_std;
}

double snr(const Image& image, const LabelMap& label) {
    FgBg s = fg_bg_stats(image, label);
    return s.fg_mean / s.bg_std;
}

DatasetStats analyze_dataset(const std::vector<LabeledSample>& samples) {
    DatasetStats stats;
    double cnr_sum = 0.0, snr_sum = 0.0, fbr_sum = 0.0;
    for (const LabeledSample& s : samples) {
        try {
            QualityStats q;
            q.cnr = cnr(s.image, s.label);
            q.snr = snr(s.image, s.label);
            q.fbr_percent = fbr(s.label);
            cnr_sum += q.cnr;
            snr_sum += q.snr;
            fbr_sum += q.fbr_percent;
            stats.per_image.push_back(q);
            ++stats.images_used;
        } catch (const DataError&) {
            stats.per_image.push_back(std::nullopt);
            ++stats.images_failed;
        }
    }
    if (stats.images_used > 0) {
        stats.mean.cnr = cnr_sum / stats.images_used;
        stats.mean.snr = snr_sum / stats.images_used;
        stats.mean.fbr_percent = fbr_sum / stats.images_used;
    }
    return stats;
}

} // namespace segssl
