// Independent reference implementations used as test oracles. Everything
// here recomputes results from first principles and must stay decoupled
// from the library code paths it checks.
#ifndef SEGSSL_TESTS_ORACLES_HPP
#define SEGSSL_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "segssl/augment.hpp"
#include "segssl/network.hpp"
#include "segssl/tensor.hpp"

namespace oracles {

// Relative error with a floor so finite-difference noise on near-zero
// gradients does not dominate.
inline double rel_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// Gradient agreement: absolute closeness rescues near-zero entries whose
// finite differences are pure rounding noise.
inline bool grad_close(double analytic, double fd, double rel_tol, double abs_tol = 1e-9) {
    return std::abs(analytic - fd) < abs_tol || rel_error(analytic, fd) < rel_tol;
}

// Central finite differences over every parameter of a network.
// loss_fn re-evaluates the full loss from the (mutated) parameters.
inline double max_grad_rel_error(segssl::NetworkParams& params,
                                 const segssl::NetworkGrads& grads,
                                 const std::function<double()>& loss_fn, double step) {
    double worst = 0.0;
    for (size_t l = 0; l < params.weights.size(); ++l) {
        for (size_t i = 0; i < params.weights[l].size(); ++i) {
            double saved = params.weights[l][i];
            params.weights[l][i] = saved + step;
            double up = loss_fn();
            params.weights[l][i] = saved - step;
            double down = loss_fn();
            params.weights[l][i] = saved;
            double fd = (up - down) / (2.0 * step);
            worst = std::max(worst, rel_error(grads.weights[l][i], fd));
        }
        for (size_t i = 0; i < params.biases[l].size(); ++i) {
            double saved = params.biases[l][i];
            params.biases[l][i] = saved + step;
            double up = loss_fn();
            params.biases[l][i] = saved - step;
            double down = loss_fn();
            params.biases[l][i] = saved;
            double fd = (up - down) / (2.0 * step);
            worst = std::max(worst, rel_error(grads.biases[l][i], fd));
        }
    }
    return worst;
}

// Grid isometry built from scratch: k single quarter turns applied one at a
// time to an index array, then flips. Returns dest[src_index] = out_index.
inline std::vector<size_t> geo_index_map(const segssl::GeoTransform& t, int n) {
    std::vector<size_t> pos(static_cast<size_t>(n) * n);
    for (size_t i = 0; i < pos.size(); ++i) pos[i] = i;

    auto turn_once = [n](const std::vector<size_t>& in) {
        // One quarter turn: out(i, j) = in(n-1-j, i).
        std::vector<size_t> out(in.size());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out[static_cast<size_t>(i) * n + j] = in[static_cast<size_t>(n - 1 - j) * n + i];
        return out;
    };
    for (int k = 0; k < t.rot_quarter_turns; ++k) pos = turn_once(pos);
    if (t.flip_horizontal) {
        std::vector<size_t> out(pos.size());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out[static_cast<size_t>(i) * n + j] = pos[static_cast<size_t>(i) * n + (n - 1 - j)];
        pos = out;
    }
    if (t.flip_vertical) {
        std::vector<size_t> out(pos.size());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out[static_cast<size_t>(i) * n + j] = pos[static_cast<size_t>(n - 1 - i) * n + j];
        pos = out;
    }
    // pos[out_index] = source index; invert to get destination of each source.
    std::vector<size_t> dest(pos.size());
    for (size_t out_idx = 0; out_idx < pos.size(); ++out_idx) dest[pos[out_idx]] = out_idx;
    return dest;
}

// All-pairs directed surface distances plus nearest-rank percentile.
inline std::vector<double> directed_dists(const std::vector<std::pair<int, int>>& from,
                                          const std::vector<std::pair<int, int>>& to) {
    std::vector<double> out;
    for (auto [ay, ax] : from) {
        double best = 1e300;
        for (auto [by, bx] : to) {
            double d = std::hypot(static_cast<double>(ay - by), static_cast<double>(ax - bx));
            best = std::min(best, d);
        }
        out.push_back(best);
    }
    return out;
}

inline double nearest_rank_p95(std::vector<double> d) {
    std::sort(d.begin(), d.end());
    size_t rank = static_cast<size_t>(std::ceil(0.95 * static_cast<double>(d.size())));
    if (rank < 1) rank = 1;
    return d[rank - 1];
}

inline double hd95_oracle(const std::vector<std::pair<int, int>>& a,
                          const std::vector<std::pair<int, int>>& b) {
    return std::max(nearest_rank_p95(directed_dists(a, b)),
                    nearest_rank_p95(directed_dists(b, a)));
}

inline double asd_oracle(const std::vector<std::pair<int, int>>& a,
                         const std::vector<std::pair<int, int>>& b) {
    std::vector<double> ab = directed_dists(a, b);
    std::vector<double> ba = directed_dists(b, a);
    double sum = 0.0;
    for (double d : ab) sum += d;
    for (double d : ba) sum += d;
    return sum / static_cast<double>(ab.size() + ba.size());
}

// Boundary pixels of a binary mask: foreground with a background 4-neighbor
// or on the border.
inline std::vector<std::pair<int, int>> surface_oracle(const segssl::LabelMap& labels, int cls) {
    std::vector<std::pair<int, int>> out;
    auto fg = [&](int y, int x) {
        if (y < 0 || y >= labels.height || x < 0 || x >= labels.width) return false;
        return labels.at(y, x) == cls;
    };
    for (int y = 0; y < labels.height; ++y)
        for (int x = 0; x < labels.width; ++x)
            if (fg(y, x) && (!fg(y - 1, x) || !fg(y + 1, x) || !fg(y, x - 1) || !fg(y, x + 1)))
                out.emplace_back(y, x);
    return out;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Recursive byte-compare of two directories (file set plus contents).
inline bool dirs_identical(const std::filesystem::path& a, const std::filesystem::path& b) {
    namespace fs = std::filesystem;
    std::vector<std::string> rel_a, rel_b;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) rel_a.push_back(fs::relative(e.path(), a).string());
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) rel_b.push_back(fs::relative(e.path(), b).string());
    std::sort(rel_a.begin(), rel_a.end());
    std::sort(rel_b.begin(), rel_b.end());
    if (rel_a != rel_b) return false;
    for (const std::string& r : rel_a)
        if (read_file(a / r) != read_file(b / r)) return false;
    return true;
}

// Fresh temp directory, removed when the guard dies.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("segssl_" + tag + "_" + std::to_string(counter()++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

} // namespace oracles

#endif
