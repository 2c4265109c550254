#ifndef SEGSSL_LOSSES_HPP
#define SEGSSL_LOSSES_HPP

#include <vector>

#include "segssl/network.hpp"
#include "segssl/tensor.hpp"

namespace segssl {

struct LossGrad {
    double loss = 0.0;
    // For cross_entropy_loss: gradient w.r.t. pre-softmax logits.
    // For soft_dice_loss: gradient w.r.t. probabilities.
    std::vector<double> grad; // H x W x C, channel-last
};

// Mean over pixels of -ln p[y] with p clamped at 1e-12 inside the log.
// Gradient w.r.t. logits is (p - onehot(y)) / num_pixels.
LossGrad cross_entropy_loss(const ProbMap& p, const LabelMap& y);

// Per foreground class c: dice_c = (2*sum(p_c*y_c)+eps)/(sum(p_c)+sum(y_c)+eps),
// eps = 1e-5; loss = 1 - mean_c dice_c. Gradient w.r.t. probabilities.
LossGrad soft_dice_loss(const ProbMap& p, const LabelMap& y);

// Chain a gradient w.r.t. probabilities through the per-pixel softmax.
std::vector<double> softmax_chain(const ProbMap& p, const std::vector<double>& g_probs);

struct UnifiedLossResult {
    double loss = 0.0;
    // Per-sample (cross_entropy + soft_dice); the batch loss is their mean.
    std::vector<double> per_sample_loss;
    // Per-sample gradient w.r.t. logits, already scaled by 1/batch.
    std::vector<Grid> logit_grads;
};

// One joint batch: labeled and pseudo-labeled pairs concatenated, every
// sample weighted equally (cross_entropy + soft_dice per sample, mean over
// the batch). Throws DataError on an empty batch.
UnifiedLossResult unified_loss(const std::vector<const ProbMap*>& preds,
                               const std::vector<const LabelMap*>& targets);

} // namespace segssl

#endif
