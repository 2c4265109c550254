#ifndef SEGSSL_METRICS_HPP
#define SEGSSL_METRICS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "segssl/tensor.hpp"

namespace segssl {

// One-vs-rest pixel counts for one class.
struct ConfusionCounts {
    int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct SurfacePoint {
    int y = 0, x = 0;
};

// Foreground pixels with at least one background 4-neighbor; the image
// border counts as background. Row-major order.
using SurfacePointSet = std::vector<SurfacePoint>;

ConfusionCounts confusion(const LabelMap& pred, const LabelMap& gt, int class_id);

// 100 * 2tp / (fp + 2tp + fn); 100 when both masks are empty.
double dice_percent(const ConfusionCounts& c);

// 100 * tp / (tp + fn + fp); 100 when both masks are empty.
double iou_percent(const ConfusionCounts& c);

SurfacePointSet extract_surface(const LabelMap& binary_mask);

// Symmetric 95th-percentile surface distance: exact all-pairs nearest
// distances, nearest-rank percentile (index ceil(0.95 n), 1-based), max of
// the two directions. Throws EmptySurfaceError on an empty input set.
double hd95(const SurfacePointSet& a, const SurfacePointSet& b);

// (sum of d(a,B) + sum of d(b,A)) / (|A| + |B|).
double asd(const SurfacePointSet& a, const SurfacePointSet& b);

struct ClassMetrics {
    int class_id = 0;
    double dice = 0.0;
    double iou = 0.0;
    // Unset when either surface is empty for this class.
    std::optional<double> hd95;
    std::optional<double> asd;
    bool surface_defined() const { return hd95.has_value(); }
};

struct MetricsReport {
    std::vector<ClassMetrics> per_class; // classes 1..num_classes-1
    double mean_dice = 0.0;
    double mean_iou = 0.0;
    // Means over classes whose surfaces were defined; unset if none were.
    std::optional<double> mean_hd95;
    std::optional<double> mean_asd;
};

// All four metrics per non-background class, one-vs-rest. Classes with an
// empty pred or gt surface keep dice/iou but have distances flagged
// undefined and are skipped in the distance means.
MetricsReport evaluate(const LabelMap& pred, const LabelMap& gt, int num_classes);

} // namespace segssl

#endif
