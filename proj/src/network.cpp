#include "segssl/network.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "segssl/errors.hpp"
#include "segssl/rng.hpp"

namespace segssl {

namespace {

size_t widx(const LayerDesc& d, int oc, int ky, int kx, int ic) {
    return ((static_cast<size_t>(oc) * d.ksize + ky) * d.ksize + kx) * d.in_ch + ic;
}

// Same-padding convolution, stride 1.
Grid conv_forward(const LayerDesc& d, const std::vector<double>& w,
                  const std::vector<double>& b, const Grid& in) {
    int pad = d.ksize / 2;
    Grid out(in.h, in.w, d.out_ch);
    std::vector<double> acc(d.out_ch);
    for (int y = 0; y < in.h; ++y) {
        for (int x = 0; x < in.w; ++x) {
            for (int oc = 0; oc < d.out_ch; ++oc) acc[oc] = b[oc];
            for (int ky = 0; ky < d.ksize; ++ky) {
                int sy = y + ky - pad;
                if (sy < 0 || sy >= in.h) continue;
                for (int kx = 0; kx < d.ksize; ++kx) {
                    int sx = x + kx - pad;
                    if (sx < 0 || sx >= in.w) continue;
                    const double* px = &in.v[(static_cast<size_t>(sy) * in.w + sx) * in.c];
                    for (int oc = 0; oc < d.out_ch; ++oc) {
                        const double* wrow = &w[widx(d, oc, ky, kx, 0)];
                        double a = 0.0;
                        for (int ic = 0; ic < d.in_ch; ++ic) a += px[ic] * wrow[ic];
                        acc[oc] += a;
                    }
                }
            }
            double* o = &out.v[(static_cast<size_t>(y) * out.w + x) * out.c];
            for (int oc = 0; oc < d.out_ch; ++oc) o[oc] = acc[oc];
        }
    }
    return out;
}

// Accumulates weight/bias gradients and returns the gradient w.r.t. input.
Grid conv_backward(const LayerDesc& d, const std::vector<double>& w, const Grid& in,
                   const Grid& g_out, std::vector<double>& g_w, std::vector<double>& g_b) {
    int pad = d.ksize / 2;
    Grid g_in(in.h, in.w, in.c);
    for (int y = 0; y < in.h; ++y) {
        for (int x = 0; x < in.w; ++x) {
            const double* go = &g_out.v[(static_cast<size_t>(y) * g_out.w + x) * g_out.c];
            for (int oc = 0; oc < d.out_ch; ++oc) g_b[oc] += go[oc];
            for (int ky = 0; ky < d.ksize; ++ky) {
                int sy = y + ky - pad;
                if (sy < 0 || sy >= in.h) continue;
                for (int kx = 0; kx < d.ksize; ++kx) {
                    int sx = x + kx - pad;
                    if (sx < 0 || sx >= in.w) continue;
                    size_t base = (static_cast<size_t>(sy) * in.w + sx) * in.c;
                    const double* px = &in.v[base];
                    double* gpx = &g_in.v[base];
                    for (int oc = 0; oc < d.out_ch; ++oc) {
                        double g = go[oc];
                        if (g == 0.0) continue;
                        size_t wb = widx(d, oc, ky, kx, 0);
                        for (int ic = 0; ic < d.in_ch; ++ic) {
                            g_w[wb + ic] += g * px[ic];
                            gpx[ic] += g * w[wb + ic];
                        }
                    }
                }
            }
        }
    }
    return g_in;
}

Grid maxpool_forward(const Grid& in, std::vector<uint8_t>& idx) {
    Grid out(in.h / 2, in.w / 2, in.c);
    idx.assign(out.v.size(), 0);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x)
            for (int ch = 0; ch < in.c; ++ch) {
                double best = in.at(2 * y, 2 * x, ch);
                uint8_t best_k = 0;
                for (uint8_t k = 1; k < 4; ++k) {
                    double v = in.at(2 * y + (k >> 1), 2 * x + (k & 1), ch);
                    if (v > best) {
                        best = v;
                        best_k = k;
                    }
                }
                size_t o = (static_cast<size_t>(y) * out.w + x) * out.c + ch;
                out.v[o] = best;
                idx[o] = best_k;
            }
    return out;
}

Grid maxpool_backward(const Grid& g_out, const std::vector<uint8_t>& idx, int in_h, int in_w) {
    Grid g_in(in_h, in_w, g_out.c);
    for (int y = 0; y < g_out.h; ++y)
        for (int x = 0; x < g_out.w; ++x)
            for (int ch = 0; ch < g_out.c; ++ch) {
                size_t o = (static_cast<size_t>(y) * g_out.w + x) * g_out.c + ch;
                uint8_t k = idx[o];
                g_in.at(2 * y + (k >> 1), 2 * x + (k & 1), ch) += g_out.v[o];
            }
    return g_in;
}

Grid upsample_forward(const Grid& in) {
    Grid out(in.h * 2, in.w * 2, in.c);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x)
            for (int ch = 0; ch < in.c; ++ch) out.at(y, x, ch) = in.at(y / 2, x / 2, ch);
    return out;
}

Grid upsample_backward(const Grid& g_out) {
    Grid g_in(g_out.h / 2, g_out.w / 2, g_out.c);
    for (int y = 0; y < g_out.h; ++y)
        for (int x = 0; x < g_out.w; ++x)
            for (int ch = 0; ch < g_out.c; ++ch) g_in.at(y / 2, x / 2, ch) += g_out.at(y, x, ch);
    return g_in;
}

Grid concat_channels(const Grid& a, const Grid& b) {
    Grid out(a.h, a.w, a.c + b.c);
    for (int y = 0; y < a.h; ++y)
        for (int x = 0; x < a.w; ++x) {
            for (int ch = 0; ch < a.c; ++ch) out.at(y, x, ch) = a.at(y, x, ch);
            for (int ch = 0; ch < b.c; ++ch) out.at(y, x, a.c + ch) = b.at(y, x, ch);
        }
    return out;
}

Grid relu(const Grid& z) {
    Grid a = z;
    for (double& v : a.v)
        if (v < 0.0) v = 0.0;
    return a;
}

void relu_backward_in_place(Grid& g, const Grid& z) {
    for (size_t i = 0; i < g.v.size(); ++i)
        if (z.v[i] <= 0.0) g.v[i] = 0.0;
}

void check_image(const NetworkSpec& spec, const Image& image) {
    int f = spec.downsample_factor();
    if (image.channels != spec.input_channels)
        throw DataError("forward: image channels do not match network spec");
    if (image.height % f != 0 || image.width % f != 0)
        throw DataError("forward: image size must be divisible by " + std::to_string(f));
    if (image.height < f || image.width < f)
        throw DataError("forward: image too small for the network depth");
}

ProbMap run_forward(const NetworkParams& params, const Image& image, ForwardCache& cache) {
    const NetworkSpec& spec = params.spec;
    spec.validate();
    check_image(spec, image);
    std::vector<LayerDesc> layers = layer_layout(spec);
    int stages = spec.num_stages();

    cache = ForwardCache{};
    cache.spec = spec;
    cache.enc_in.resize(stages);
    cache.enc_z.resize(stages);
    cache.pool_idx.resize(stages - 1);
    cache.dec_in.resize(stages - 1);
    cache.dec_z.resize(stages - 1);

    Grid a(image.height, image.width, image.channels);
    for (size_t i = 0; i < image.data.size(); ++i) a.v[i] = image.data[i];

    // Encoder.
    std::vector<Grid> skips(stages - 1);
    for (int s = 0; s < stages; ++s) {
        if (s > 0) a = maxpool_forward(a, cache.pool_idx[s - 1]);
        cache.enc_in[s] = a;
        cache.enc_z[s] = conv_forward(layers[s], params.weights[s], params.biases[s], a);
        a = relu(cache.enc_z[s]);
        if (s < stages - 1) skips[s] = a;
    }

    // Decoder. Layer index for dec_s is stages + (stages-2 - s).
    for (int s = stages - 2; s >= 0; --s) {
        int li = stages + (stages - 2 - s);
        Grid up = upsample_forward(a);
        cache.dec_in[s] = concat_channels(up, skips[s]);
        cache.dec_z[s] = conv_forward(layers[li], params.weights[li], params.biases[li],
                                      cache.dec_in[s]);
        a = relu(cache.dec_z[s]);
    }

    int head = static_cast<int>(layers.size()) - 1;
    cache.head_in = a;
    cache.logits = conv_forward(layers[head], params.weights[head], params.biases[head], a);

    // Per-pixel softmax with max subtraction.
    ProbMap probs(image.height, image.width, spec.num_classes);
    int C = spec.num_classes;
    for (size_t px = 0; px < probs.pixel_count(); ++px) {
        const double* z = &cache.logits.v[px * C];
        double m = z[0];
        for (int c = 1; c < C; ++c) m = std::max(m, z[c]);
        double sum = 0.0;
        for (int c = 0; c < C; ++c) sum += std::exp(z[c] - m);
        for (int c = 0; c < C; ++c) probs.data[px * C + c] = std::exp(z[c] - m) / sum;
    }
    return probs;
}

} // namespace

void NetworkSpec::validate() const {
    if (input_channels < 1) throw ConfigError("network: input_channels must be >= 1");
    if (num_classes < 2) throw ConfigError("network: num_classes must be >= 2");
    if (stage_channels.empty()) throw ConfigError("network: at least one stage required");
    for (int c : stage_channels)
        if (c < 1) throw ConfigError("network: stage channels must be >= 1");
}

std::vector<LayerDesc> layer_layout(const NetworkSpec& spec) {
    spec.validate();
    const auto& ch = spec.stage_channels;
    int stages = spec.num_stages();
    std::vector<LayerDesc> layers;
    for (int s = 0; s < stages; ++s)
        layers.push_back({"enc" + std::to_string(s), s == 0 ? spec.input_channels : ch[s - 1],
                          ch[s], 3, true});
    for (int s = stages - 2; s >= 0; --s)
        layers.push_back({"dec" + std::to_string(s), ch[s + 1] + ch[s], ch[s], 3, true});
    layers.push_back({"head", ch[0], spec.num_classes, 1, false});
    return layers;
}

size_t NetworkParams::total_parameters() const {
    size_t n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
}

NetworkParams init_network(const NetworkSpec& spec, uint64_t seed) {
    std::vector<LayerDesc> layers = layer_layout(spec);
    Rng rng(seed);
    NetworkParams params;
    params.spec = spec;
    for (const LayerDesc& d : layers) {
        double fan_in = static_cast<double>(d.in_ch) * d.ksize * d.ksize;
        double std_dev = std::sqrt(2.0 / fan_in);
        std::vector<double> w(d.weight_count());
        for (double& x : w) x = std_dev * rng.gaussian();
        params.weights.push_back(std::move(w));
        params.biases.emplace_back(d.out_ch, 0.0);
    }
    return params;
}

ProbMap forward(const NetworkParams& params, const Image& image, ForwardCache& cache) {
    return run_forward(params, image, cache);
}

ProbMap forward_probs(const NetworkParams& params, const Image& image) {
    ForwardCache cache;
    return run_forward(params, image, cache);
}

NetworkGrads backward(const NetworkParams& params, const ForwardCache& cache,
                      const Grid& g_logits) {
    if (!(cache.spec == params.spec)) throw DataError("backward: cache does not match params");
    std::vector<LayerDesc> layers = layer_layout(params.spec);
    int stages = params.spec.num_stages();
    if (g_logits.h != cache.logits.h || g_logits.w != cache.logits.w ||
        g_logits.c != cache.logits.c)
        throw DataError("backward: logit gradient shape mismatch");

    NetworkGrads grads;
    for (const LayerDesc& d : layers) {
        grads.weights.emplace_back(d.weight_count(), 0.0);
        grads.biases.emplace_back(d.out_ch, 0.0);
    }

    int head = static_cast<int>(layers.size()) - 1;
    Grid g = conv_backward(layers[head], params.weights[head], cache.head_in, g_logits,
                           grads.weights[head], grads.biases[head]);

    // Decoder stages in reverse of forward order (dec0 ran last).
    std::vector<Grid> g_skip(stages - 1);
    for (int s = 0; s <= stages - 2; ++s) {
        int li = stages + (stages - 2 - s);
        relu_backward_in_place(g, cache.dec_z[s]);
        Grid g_cat = conv_backward(layers[li], params.weights[li], cache.dec_in[s], g,
                                   grads.weights[li], grads.biases[li]);
        int up_c = params.spec.stage_channels[s + 1];
        Grid g_up(g_cat.h, g_cat.w, up_c);
        g_skip[s] = Grid(g_cat.h, g_cat.w, g_cat.c - up_c);
        for (int y = 0; y < g_cat.h; ++y)
            for (int x = 0; x < g_cat.w; ++x) {
                for (int ch = 0; ch < up_c; ++ch) g_up.at(y, x, ch) = g_cat.at(y, x, ch);
                for (int ch = up_c; ch < g_cat.c; ++ch)
                    g_skip[s].at(y, x, ch - up_c) = g_cat.at(y, x, ch);
            }
        g = upsample_backward(g_up);
    }

    // Encoder, deepest stage first. g arrives as the gradient w.r.t. the
    // stage's ReLU output; stages below the bottleneck also receive the
    // skip-connection gradient.
    for (int s = stages - 1; s >= 0; --s) {
        if (s < stages - 1)
            for (size_t i = 0; i < g.v.size(); ++i) g.v[i] += g_skip[s].v[i];
        relu_backward_in_place(g, cache.enc_z[s]);
        Grid g_in = conv_backward(layers[s], params.weights[s], cache.enc_in[s], g,
                                  grads.weights[s], grads.biases[s]);
        if (s > 0)
            g = maxpool_backward(g_in, cache.pool_idx[s - 1], cache.enc_z[s - 1].h,
                                 cache.enc_z[s - 1].w);
    }
    return grads;
}

void accumulate(NetworkGrads& into, const NetworkGrads& from) {
    if (into.weights.empty()) {
        into = from;
        return;
    }
    for (size_t l = 0; l < into.weights.size(); ++l) {
        for (size_t i = 0; i < into.weights[l].size(); ++i)
            into.weights[l][i] += from.weights[l][i];
        for (size_t i = 0; i < into.biases[l].size(); ++i)
            into.biases[l][i] += from.biases[l][i];
    }
}

OptimState::OptimState(const NetworkParams& params, double lr0_, double wd_, double momentum_,
                       int e_maximum_)
    : lr0(lr0_), wd(wd_), momentum(momentum_), e_maximum(e_maximum_) {
    for (const auto& w : params.weights) vel_w.emplace_back(w.size(), 0.0);
    for (const auto& b : params.biases) vel_b.emplace_back(b.size(), 0.0);
}

void sgd_step(NetworkParams& params, const NetworkGrads& grads, OptimState& state, int epoch) {
    if (grads.weights.size() != params.weights.size())
        throw DataError("sgd_step: gradient layer count mismatch");
    double frac = 1.0 - static_cast<double>(epoch) / static_cast<double>(state.e_maximum);
    if (frac < 0.0) frac = 0.0;
    double lr = state.lr0 * std::pow(frac, 0.9);

    for (size_t l = 0; l < params.weights.size(); ++l) {
        auto& w = params.weights[l];
        auto& v = state.vel_w[l];
        const auto& g = grads.weights[l];
        if (g.size() != w.size()) throw DataError("sgd_step: weight shape mismatch");
        for (size_t i = 0; i < w.size(); ++i) {
            if (!std::isfinite(g[i])) throw NumericError("non-finite weight gradient");
            v[i] = state.momentum * v[i] + (g[i] + state.wd * w[i]);
            w[i] -= lr * v[i];
        }
        auto& b = params.biases[l];
        auto& vb = state.vel_b[l];
        const auto& gb = grads.biases[l];
        if (gb.size() != b.size()) throw DataError("sgd_step: bias shape mismatch");
        for (size_t i = 0; i < b.size(); ++i) {
            if (!std::isfinite(gb[i])) throw NumericError("non-finite bias gradient");
            vb[i] = state.momentum * vb[i] + (gb[i] + state.wd * b[i]);
            b[i] -= lr * vb[i];
        }
    }
}

void save_checkpoint(const NetworkParams& params, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<LayerDesc> layers = layer_layout(params.spec);

    std::ofstream man(dir / "manifest.txt", std::ios::trunc);
    if (!man) throw Error("cannot write checkpoint manifest in " + dir.string());
    man << "# segssl checkpoint\n";
    man << "input_channels=" << params.spec.input_channels << "\n";
    man << "num_classes=" << params.spec.num_classes << "\n";
    man << "stage_channels=";
    for (size_t i = 0; i < params.spec.stage_channels.size(); ++i)
        man << (i ? "," : "") << params.spec.stage_channels[i];
    man << "\n";

    for (size_t l = 0; l < layers.size(); ++l) {
        const LayerDesc& d = layers[l];
        RawTensor w;
        w.dtype = DType::F64;
        w.shape = {static_cast<uint32_t>(d.out_ch), static_cast<uint32_t>(d.ksize),
                   static_cast<uint32_t>(d.ksize), static_cast<uint32_t>(d.in_ch)};
        w.f64 = params.weights[l];
        save_raw(w, dir / (d.name + "_w.segt"));

        RawTensor b;
        b.dtype = DType::F64;
        b.shape = {static_cast<uint32_t>(d.out_ch)};
        b.f64 = params.biases[l];
        save_raw(b, dir / (d.name + "_b.segt"));

        man << "layer=" << d.name << ",weights=" << d.name << "_w.segt,bias=" << d.name
            << "_b.segt\n";
    }
}

NetworkParams load_checkpoint(const std::filesystem::path& dir) {
    std::ifstream man(dir / "manifest.txt");
    if (!man) throw DataError("missing checkpoint manifest in " + dir.string());

    NetworkSpec spec;
    spec.stage_channels.clear();
    std::vector<std::string> layer_lines;
    std::string line;
    while (std::getline(man, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("input_channels=", 0) == 0) spec.input_channels = std::stoi(line.substr(15));
        else if (line.rfind("num_classes=", 0) == 0) spec.num_classes = std::stoi(line.substr(12));
        else if (line.rfind("stage_channels=", 0) == 0) {
            std::istringstream ss(line.substr(15));
            std::string tok;
            while (std::getline(ss, tok, ',')) spec.stage_channels.push_back(std::stoi(tok));
        } else if (line.rfind("layer=", 0) == 0) layer_lines.push_back(line);
    }

    std::vector<LayerDesc> layers = layer_layout(spec);
    if (layer_lines.size() != layers.size())
        throw DataError("checkpoint layer count does not match spec");

    NetworkParams params;
    params.spec = spec;
    for (const LayerDesc& d : layers) {
        RawTensor w = load_raw(dir / (d.name + "_w.segt"));
        if (w.dtype != DType::F64 || w.f64.size() != d.weight_count())
            throw DataError("checkpoint weight tensor mismatch for " + d.name);
        RawTensor b = load_raw(dir / (d.name + "_b.segt"));
        if (b.dtype != DType::F64 || b.f64.size() != static_cast<size_t>(d.out_ch))
            throw DataError("checkpoint bias tensor mismatch for " + d.name);
        params.weights.push_back(std::move(w.f64));
        params.biases.push_back(std::move(b.f64));
    }
    return params;
}

} // namespace segssl
