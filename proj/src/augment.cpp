#include "segssl/augment.hpp"

#include <cmath>
#include <utility>

#include "segssl/errors.hpp"

namespace segssl {

namespace {

void check_geo(const GeoTransform& t, int h, int w) {
    if (t.rot_quarter_turns < 0 || t.rot_quarter_turns > 3)
        throw DataError("rot_quarter_turns must be in 0..3");
    if ((t.rot_quarter_turns & 1) && h != w)
        throw DataError("odd quarter turns require a square grid");
}

// Input pixel that lands on output pixel (i, j): undo flips, then rotation.
std::pair<int, int> geo_source(const GeoTransform& t, int h, int w, int i, int j) {
    if (t.flip_vertical) i = h - 1 - i;
    if (t.flip_horizontal) j = w - 1 - j;
    switch (t.rot_quarter_turns & 3) {
        case 1: return {h - 1 - j, i};
        case 2: return {h - 1 - i, w - 1 - j};
        case 3: return {j, w - 1 - i};
        default: return {i, j};
    }
}

template <typename Grid>
Grid map_forward(const Grid& in, const GeoTransform& t, int h, int w, int depth) {
    Grid out = in;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            auto [si, sj] = geo_source(t, h, w, i, j);
            for (int c = 0; c < depth; ++c)
                out.data[(static_cast<size_t>(i) * w + j) * depth + c] =
                    in.data[(static_cast<size_t>(si) * w + sj) * depth + c];
        }
    return out;
}

template <typename Grid>
Grid map_inverse(const Grid& in, const GeoTransform& t, int h, int w, int depth) {
    Grid out = in;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            auto [si, sj] = geo_source(t, h, w, i, j);
            for (int c = 0; c < depth; ++c)
                out.data[(static_cast<size_t>(si) * w + sj) * depth + c] =
                    in.data[(static_cast<size_t>(i) * w + j) * depth + c];
        }
    return out;
}

} // namespace

void WeakAugConfig::validate() const {
    if (scale_lo > scale_hi) throw ConfigError("weak aug: scale_lo > scale_hi");
    if (contrast_lo > contrast_hi) throw ConfigError("weak aug: contrast_lo > contrast_hi");
    if (noise_sigma_max < 0.0) throw ConfigError("weak aug: noise_sigma_max < 0");
    if (brightness_shift_max < 0.0) throw ConfigError("weak aug: brightness_shift_max < 0");
    if (shift_max < 0) throw ConfigError("weak aug: shift_max < 0");
}

Image translate(const Image& image, int dx, int dy) {
    Image out(image.height, image.width, image.channels);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) {
            int sy = y - dy, sx = x - dx;
            if (sy < 0 || sy >= image.height || sx < 0 || sx >= image.width) continue;
            for (int ch = 0; ch < image.channels; ++ch)
                out.at(y, x, ch) = image.at(sy, sx, ch);
        }
    return out;
}

LabelMap translate(const LabelMap& label, int dx, int dy) {
    LabelMap out(label.height, label.width, 0);
    for (int y = 0; y < label.height; ++y)
        for (int x = 0; x < label.width; ++x) {
            int sy = y - dy, sx = x - dx;
            if (sy >= 0 && sy < label.height && sx >= 0 && sx < label.width)
                out.at(y, x) = label.at(sy, sx);
        }
    return out;
}

WeakAugResult weak_augment(const Image& image, const LabelMap* label,
                           const WeakAugConfig& config, Rng& rng) {
    config.validate();
    if (label && (label->height != image.height || label->width != image.width))
        throw DataError("weak_augment: label size does not match image");

    Image work = image;
    std::vector<double> v(image.data.begin(), image.data.end());

    double s = rng.uniform(config.scale_lo, config.scale_hi);
    for (double& x : v) x *= s;

    double c = rng.uniform(config.contrast_lo, config.contrast_hi);
    if (c != 1.0) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        for (double& x : v) x = mean + c * (x - mean);
    }

    double b = rng.uniform(-config.brightness_shift_max, config.brightness_shift_max);
    for (double& x : v) x += b;

    if (config.noise_sigma_max > 0.0) {
        double sigma = rng.uniform(0.0, config.noise_sigma_max);
        for (double& x : v) x += sigma * rng.gaussian();
    }
    for (size_t i = 0; i < v.size(); ++i) work.data[i] = static_cast<float>(v[i]);

    int dx = 0, dy = 0;
    if (config.shift_max > 0) {
        dx = static_cast<int>(rng.uniform_int(-config.shift_max, config.shift_max));
        dy = static_cast<int>(rng.uniform_int(-config.shift_max, config.shift_max));
    }

    WeakAugResult out;
    out.image = translate(work, dx, dy);
    if (label) out.label = translate(*label, dx, dy);
    return out;
}

StrongAugResult strong_augment(const Image& image, Rng& rng) {
    GeoTransform t;
    t.rot_quarter_turns = static_cast<int>(rng.uniform_int(0, 3));
    t.flip_horizontal = rng.uniform_int(0, 1) != 0;
    t.flip_vertical = rng.uniform_int(0, 1) != 0;
    return StrongAugResult{apply_geo(image, t), t};
}

Image apply_geo(const Image& image, const GeoTransform& t) {
    check_geo(t, image.height, image.width);
    return map_forward(image, t, image.height, image.width, image.channels);
}

Image apply_geo_inverse(const Image& image, const GeoTransform& t) {
    check_geo(t, image.height, image.width);
    return map_inverse(image, t, image.height, image.width, image.channels);
}

LabelMap transport_label(const LabelMap& label, const GeoTransform& t) {
    check_geo(t, label.height, label.width);
    return map_forward(label, t, label.height, label.width, 1);
}

LabelMap transport_label_inverse(const LabelMap& label, const GeoTransform& t) {
    check_geo(t, label.height, label.width);
    return map_inverse(label, t, label.height, label.width, 1);
}

} // namespace segssl
