#include "segssl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "segssl/errors.hpp"

namespace segssl {

namespace {

LabelMap binary_mask(const LabelMap& labels, int class_id) {
    LabelMap mask(labels.height, labels.width, 0);
    for (size_t i = 0; i < labels.data.size(); ++i)
        mask.data[i] = labels.data[i] == class_id ? 1 : 0;
    return mask;
}

// Sorted ascending distances -> nearest-rank 95th percentile.
double p95(std::vector<double>& dists) {
    std::sort(dists.begin(), dists.end());
    size_t n = dists.size();
    size_t rank = static_cast<size_t>(std::ceil(0.95 * static_cast<double>(n)));
    if (rank < 1) rank = 1;
    return dists[rank - 1];
}

std::vector<double> directed_distances(const SurfacePointSet& from, const SurfacePointSet& to) {
    std::vector<double> out;
    out.reserve(from.size());
    for (const SurfacePoint& a : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const SurfacePoint& b : to) {
            double dy = a.y - b.y;
            double dx = a.x - b.x;
            double d2 = dy * dy + dx * dx;
            if (d2 < best) best = d2;
        }
        out.push_back(std::sqrt(best));
    }
    return out;
}

} // namespace

ConfusionCounts confusion(const LabelMap& pred, const LabelMap& gt, int class_id) {
    if (pred.height != gt.height || pred.width != gt.width)
        throw DataError("confusion: pred/gt shapes differ");
    ConfusionCounts c;
    for (size_t i = 0; i < pred.data.size(); ++i) {
        bool p = pred.data[i] == class_id;
        bool g = gt.data[i] == class_id;
        if (p && g) ++c.tp;
        else if (p && !g) ++c.fp;
        else if (!p && g) ++c.fn;
        else ++c.tn;
    }
    return c;
}

double dice_percent(const ConfusionCounts& c) {
    if (c.tp + c.fp + c.fn == 0) return 100.0;
    return 100.0 * 2.0 * static_cast<double>(c.tp) /
           static_cast<double>(c.fp + 2 * c.tp + c.fn);
}

double iou_percent(const ConfusionCounts& c) {
    if (c.tp + c.fp + c.fn == 0) return 100.0;
    return 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn + c.fp);
}

SurfacePointSet extract_surface(const LabelMap& mask) {
    SurfacePointSet surface;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(y, x)) continue;
            bool boundary = y == 0 || y == mask.height - 1 || x == 0 || x == mask.width - 1 ||
                            !mask.at(y - 1, x) || !mask.at(y + 1, x) || !mask.at(y, x - 1) ||
                            !mask.at(y, x + 1);
            if (boundary) surface.push_back({y, x});
        }
    return surface;
}

double hd95(const SurfacePointSet& a, const SurfacePointSet& b) {
    if (a.empty() || b.empty()) throw EmptySurfaceError("hd95 on an empty surface set");
    std::vector<double> ab = directed_distances(a, b);
    std::vector<double> ba = directed_distances(b, a);
    return std::max(p95(ab), p95(ba));
}

double asd(const SurfacePointSet& a, const SurfacePointSet& b) {
    if (a.empty() || b.empty()) throw EmptySurfaceError("asd on an empty surface set");
    std::vector<double> ab = directed_distances(a, b);
    std::vector<double> ba = directed_distances(b, a);
    // Per-direction accumulators keep asd(a,b) == asd(b,a) bit-exact.
    double sum_ab = 0.0, sum_ba = 0.0;
    for (double d : ab) sum_ab += d;
    for (double d : ba) sum_ba += d;
    return (sum_ab + sum_ba) / static_cast<double>(ab.size() + ba.size());
}

MetricsReport evaluate(const LabelMap& pred, const LabelMap& gt, int num_classes) {
    if (pred.height != gt.height || pred.width != gt.width)
        throw DataError("evaluate: pred/gt shapes differ");

    MetricsReport report;
    double dice_sum = 0.0, iou_sum = 0.0, hd_sum = 0.0, asd_sum = 0.0;
    int hd_count = 0;
    for (int c = 1; c < num_classes; ++c) {
        ClassMetrics m;
        m.class_id = c;
        ConfusionCounts counts = confusion(pred, gt, c);
        m.dice = dice_percent(counts);
        m.iou = iou_percent(counts);

        SurfacePointSet sp = extract_surface(binary_mask(pred, c));
        SurfacePointSet sg = extract_surface(binary_mask(gt, c));
        if (!sp.empty() && !sg.empty()) {
            m.hd95 = hd95(sp, sg);
            m.asd = asd(sp, sg);
            hd_sum += *m.hd95;
            asd_sum += *m.asd;
            ++hd_count;
        }
        dice_sum += m.dice;
        iou_sum += m.iou;
        report.per_class.push_back(m);
    }

    int fg = num_classes - 1;
    report.mean_dice = dice_sum / fg;
    report.mean_iou = iou_sum / fg;
    if (hd_count > 0) {
        report.mean_hd95 = hd_sum / hd_count;
        report.mean_asd = asd_sum / hd_count;
    }
    return report;
}

} // namespace segssl
