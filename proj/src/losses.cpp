#include "segssl/losses.hpp"

#include <cmath>

#include "segssl/errors.hpp"

namespace segssl {

namespace {
constexpr double kLogClamp = 1e-12;
constexpr double kDiceEps = 1e-5;

void check_pair(const ProbMap& p, const LabelMap& y) {
    if (p.height != y.height || p.width != y.width)
        throw DataError("loss: prediction/target shapes differ");
    for (uint8_t v : y.data)
        if (v >= p.num_classes) throw DataError("loss: target class exceeds prediction classes");
}
} // namespace

LossGrad cross_entropy_loss(const ProbMap& p, const LabelMap& y) {
    check_pair(p, y);
    size_t n = p.pixel_count();
    int C = p.num_classes;

    LossGrad out;
    out.grad.assign(p.data.size(), 0.0);
    double inv_n = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    for (size_t px = 0; px < n; ++px) {
        int target = y.data[px];
        loss -= std::log(std::max(p.data[px * C + target], kLogClamp));
        for (int c = 0; c < C; ++c)
            out.grad[px * C + c] = (p.data[px * C + c] - (c == target ? 1.0 : 0.0)) * inv_n;
    }
    out.loss = loss * inv_n;
    return out;
}

LossGrad soft_dice_loss(const ProbMap& p, const LabelMap& y) {
    check_pair(p, y);
    size_t n = p.pixel_count();
    int C = p.num_classes;
    int fg_classes = C - 1;

    LossGrad out;
    out.grad.assign(p.data.size(), 0.0);

    double dice_sum = 0.0;
    for (int c = 1; c < C; ++c) {
        double inter = 0.0, p_sum = 0.0, y_sum = 0.0;
        for (size_t px = 0; px < n; ++px) {
            double pc = p.data[px * C + c];
            double yc = y.data[px] == c ? 1.0 : 0.0;
            inter += pc * yc;
            p_sum += pc;
            y_sum += yc;
        }
        double num = 2.0 * inter + kDiceEps;
        double den = p_sum + y_sum + kDiceEps;
        dice_sum += num / den;

        // d dice_c / d p_c(x) = (2*y_c(x)*den - num) / den^2
        double inv_den2 = 1.0 / (den * den);
        double scale = -1.0 / static_cast<double>(fg_classes);
        for (size_t px = 0; px < n; ++px) {
            double yc = y.data[px] == c ? 1.0 : 0.0;
            out.grad[px * C + c] = scale * (2.0 * yc * den - num) * inv_den2;
        }
    }
    out.loss = 1.0 - dice_sum / static_cast<double>(fg_classes);
    return out;
}

std::vector<double> softmax_chain(const ProbMap& p, const std::vector<double>& g_probs) {
    if (g_probs.size() != p.data.size())
        throw DataError("softmax_chain: gradient size mismatch");
    int C = p.num_classes;
    std::vector<double> g_logits(p.data.size());
    for (size_t px = 0; px < p.pixel_count(); ++px) {
        double dot = 0.0;
        for (int c = 0; c < C; ++c) dot += g_probs[px * C + c] * p.data[px * C + c];
        for (int c = 0; c < C; ++c)
            g_logits[px * C + c] = p.data[px * C + c] * (g_probs[px * C + c] - dot);
    }
    return g_logits;
}

UnifiedLossResult unified_loss(const std::vector<const ProbMap*>& preds,
                               const std::vector<const LabelMap*>& targets) {
    if (preds.empty()) throw DataError("unified_loss: empty batch");
    if (preds.size() != targets.size())
        throw DataError("unified_loss: prediction/target counts differ");

    UnifiedLossResult out;
    size_t batch = preds.size();
    double inv_batch = 1.0 / static_cast<double>(batch);

    for (size_t i = 0; i < batch; ++i) {
        const ProbMap& p = *preds[i];
        const LabelMap& y = *targets[i];
        LossGrad ce = cross_entropy_loss(p, y);
        LossGrad dice = soft_dice_loss(p, y);
        std::vector<double> dice_logits = softmax_chain(p, dice.grad);

        Grid g(p.height, p.width, p.num_classes);
        for (size_t k = 0; k < g.v.size(); ++k)
            g.v[k] = (ce.grad[k] + dice_logits[k]) * inv_batch;

        double sample_loss = ce.loss + dice.loss;
        out.per_sample_loss.push_back(sample_loss);
        out.logit_grads.push_back(std::move(g));
        out.loss += sample_loss * inv_batch;
    }
    return out;
}

} // namespace segssl
