#ifndef SEGSSL_AUGMENT_HPP
#define SEGSSL_AUGMENT_HPP

#include <optional>

#include "segssl/rng.hpp"
#include "segssl/tensor.hpp"

namespace segssl {

// Lossless grid isometry: quarter-turn rotation followed by optional
// horizontal then vertical flip. No interpolation ever happens, so labels
// can be transported through it exactly.
//
// One quarter turn maps [[1,2],[3,4]] to [[3,1],[4,2]] (counter-clockwise
// in display coordinates, where y points down).
struct GeoTransform {
    int rot_quarter_turns = 0; // 0..3
    bool flip_horizontal = false;
    bool flip_vertical = false;
};

// Weak augmentation parameters. Ranges collapse to the identity when
// scale/contrast are [1,1] and the remaining bounds are 0.
struct WeakAugConfig {
    double scale_lo = 1.0, scale_hi = 1.0;        // multiplicative intensity scale
    double noise_sigma_max = 0.0;                 // additive Gaussian noise
    double brightness_shift_max = 0.0;            // additive shift
    double contrast_lo = 1.0, contrast_hi = 1.0;  // contrast about the image mean
    int shift_max = 0;                            // integer translation, zero padded

    void validate() const;
};

struct WeakAugResult {
    Image image;
    std::optional<LabelMap> label;
};

// Integer translation with zero padding: out(y, x) = in(y - dy, x - dx).
Image translate(const Image& image, int dx, int dy);
LabelMap translate(const LabelMap& label, int dx, int dy);

// In order: scale, contrast about the mean, brightness, noise, translation.
// The label, when present, receives the identical translation only
// (background fill 0).
WeakAugResult weak_augment(const Image& image, const LabelMap* label,
                           const WeakAugConfig& config, Rng& rng);

struct StrongAugResult {
    Image image;
    GeoTransform transform;
};

// Draws a uniform GeoTransform (4 rotations x 2 x 2 flips) and applies it.
// Odd quarter turns require a square image.
StrongAugResult strong_augment(const Image& image, Rng& rng);

Image apply_geo(const Image& image, const GeoTransform& t);
Image apply_geo_inverse(const Image& image, const GeoTransform& t);

// Moves label pixels through exactly the same grid bijection as the image.
LabelMap transport_label(const LabelMap& label, const GeoTransform& t);
LabelMap transport_label_inverse(const LabelMap& label, const GeoTransform& t);

} // namespace segssl

#endif
