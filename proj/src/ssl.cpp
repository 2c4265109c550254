#include "segssl/ssl.hpp"

#include <algorithm>
#include <cmath>

#include "segssl/errors.hpp"

namespace segssl {

LabelMap make_pseudo_label(const ProbMap& p) {
    LabelMap label(p.height, p.width, 0);
    int C = p.num_classes;
    for (size_t px = 0; px < p.pixel_count(); ++px) {
        int best = 0;
        double best_p = p.data[px * C];
        for (int c = 1; c < C; ++c) {
            double v = p.data[px * C + c];
            if (v > best_p) { // strict: ties keep the lower class index
                best_p = v;
                best = c;
            }
        }
        label.data[px] = static_cast<uint8_t>(best);
    }
    return label;
}

double image_entropy(const ProbMap& p) {
    int C = p.num_classes;
    double sum = 0.0;
    for (size_t px = 0; px < p.pixel_count(); ++px) {
        double h = 0.0;
        for (int c = 0; c < C; ++c) {
            double v = p.data[px * C + c];
            if (v > 0.0) h -= v * std::log(v);
        }
        sum += h;
    }
    double score = sum / static_cast<double>(p.pixel_count());
    return std::clamp(score, 0.0, std::log(static_cast<double>(C)));
}

FilterResult filter_unlabeled(const std::vector<UncertaintyScore>& scores, double drop_fraction) {
    if (!(drop_fraction >= 0.0 && drop_fraction < 1.0))
        throw ConfigError("drop_fraction must be in [0, 1)");

    std::vector<UncertaintyScore> ordered = scores;
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.sample_id < b.sample_id;
    });

    size_t drop = static_cast<size_t>(std::floor(drop_fraction * static_cast<double>(ordered.size())));
    FilterResult result;
    result.dropped.assign(ordered.begin(), ordered.begin() + drop);
    for (size_t i = drop; i < ordered.size(); ++i)
        result.retained.push_back(ordered[i].sample_id);
    std::sort(result.retained.begin(), result.retained.end());
    return result;
}

} // namespace segssl
