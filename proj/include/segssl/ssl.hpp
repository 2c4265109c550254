#ifndef SEGSSL_SSL_HPP
#define SEGSSL_SSL_HPP

#include <string>
#include <vector>

#include "segssl/tensor.hpp"

namespace segssl {

// Per-pixel argmax, no confidence threshold. Ties go to the lowest class.
LabelMap make_pseudo_label(const ProbMap& p);

// Mean per-pixel Shannon entropy in nats, 0*ln 0 := 0, clamped into
// [0, ln num_classes] against rounding noise.
double image_entropy(const ProbMap& p);

struct UncertaintyScore {
    std::string sample_id;
    double score = 0.0;
};

struct FilterResult {
    std::vector<std::string> retained; // lexicographically sorted
    std::vector<UncertaintyScore> dropped;
};

// Reverse filtering: removes the floor(drop_fraction * n) lowest scores.
// Ties break toward the lexicographically smaller id, which is dropped
// first.
FilterResult filter_unlabeled(const std::vector<UncertaintyScore>& scores, double drop_fraction);

} // namespace segssl

#endif
