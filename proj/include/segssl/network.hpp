#ifndef SEGSSL_NETWORK_HPP
#define SEGSSL_NETWORK_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "segssl/tensor.hpp"

namespace segssl {

// Compact encoder-decoder: one 3x3 conv + ReLU per stage, 2x2 max-pool
// down, 2x nearest-neighbor up, skip connections by channel concatenation,
// 1x1 head conv, per-pixel softmax. Small enough that every gradient can be
// checked against finite differences.
struct NetworkSpec {
    int input_channels = 1;
    int num_classes = 2;
    std::vector<int> stage_channels = {8, 16, 32};

    int num_stages() const { return static_cast<int>(stage_channels.size()); }
    // Input height/width must be divisible by this.
    int downsample_factor() const { return 1 << (num_stages() - 1); }
    void validate() const;

    bool operator==(const NetworkSpec&) const = default;
};

struct LayerDesc {
    std::string name;
    int in_ch = 0, out_ch = 0, ksize = 3;
    bool relu = true;
    size_t weight_count() const {
        return static_cast<size_t>(out_ch) * in_ch * ksize * ksize;
    }
};

// Layer order: enc0..enc(S-1), dec(S-2)..dec0, head.
std::vector<LayerDesc> layer_layout(const NetworkSpec& spec);

// Weights are stored [out_ch][ky][kx][in_ch], biases [out_ch], 64-bit.
struct NetworkParams {
    NetworkSpec spec;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    size_t total_parameters() const;
};

struct NetworkGrads {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

// Channel-last f64 activation grid.
struct Grid {
    int h = 0, w = 0, c = 0;
    std::vector<double> v;

    Grid() = default;
    Grid(int h_, int w_, int c_, double fill = 0.0)
        : h(h_), w(w_), c(c_), v(static_cast<size_t>(h_) * w_ * c_, fill) {}
    double& at(int y, int x, int ch) {
        return v[(static_cast<size_t>(y) * w + x) * c + ch];
    }
    double at(int y, int x, int ch) const {
        return v[(static_cast<size_t>(y) * w + x) * c + ch];
    }
};

// Everything backward needs: per-layer conv inputs and pre-activations plus
// max-pool argmax indices.
struct ForwardCache {
    NetworkSpec spec;
    std::vector<Grid> enc_in, enc_z;
    std::vector<std::vector<uint8_t>> pool_idx; // pool after stage s feeds stage s+1
    std::vector<Grid> dec_in, dec_z;
    Grid head_in;
    Grid logits;
};

// He fan-in Gaussian weights, zero biases, deterministic per seed.
NetworkParams init_network(const NetworkSpec& spec, uint64_t seed);

// Returns the per-pixel softmax output and the cache for backward.
ProbMap forward(const NetworkParams& params, const Image& image, ForwardCache& cache);

// Forward without keeping a cache.
ProbMap forward_probs(const NetworkParams& params, const Image& image);

// Exact analytic gradients for every parameter. g_logits is the loss
// gradient with respect to the pre-softmax logits, shape H x W x C.
NetworkGrads backward(const NetworkParams& params, const ForwardCache& cache,
                      const Grid& g_logits);

void accumulate(NetworkGrads& into, const NetworkGrads& from);

struct OptimState {
    std::vector<std::vector<double>> vel_w, vel_b; // momentum buffers
    double lr0 = 0.005;
    double wd = 0.003;
    double momentum = 0.9;
    int e_maximum = 300; // horizon of the polynomial decay

    OptimState() = default;
    OptimState(const NetworkParams& params, double lr0_, double wd_, double momentum_,
               int e_maximum_);
};

// lr(epoch) = lr0 * (1 - epoch/E_Maximum)^0.9 with epoch counted from 0;
// v <- momentum*v + (g + wd*w); w <- w - lr*v.
// Throws NumericError on non-finite gradients.
void sgd_step(NetworkParams& params, const NetworkGrads& grads, OptimState& state, int epoch);

// One SEGT file per weight/bias tensor plus a manifest.
void save_checkpoint(const NetworkParams& params, const std::filesystem::path& dir);
NetworkParams load_checkpoint(const std::filesystem::path& dir);

} // namespace segssl

#endif
