#ifndef SEGSSL_RNG_HPP
#define SEGSSL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace segssl {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Deterministic random stream. All distribution code lives here instead of
// <random>'s distribution classes, whose output is implementation-defined;
// this way equal seeds give equal draws on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    // Derived stream: independent of the parent for practical purposes,
    // fully determined by (seed, stream).
    Rng(uint64_t seed, uint64_t stream) : engine_(splitmix64(seed ^ splitmix64(stream + 1))) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi], inclusive. Rejection-sampled, unbiased.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
        if (range <= 1) return lo;
        uint64_t mask = ~0ull >> count_leading_zeros(range - 1);
        for (;;) {
            uint64_t v = next_u64() & mask;
            if (v < range) return lo + static_cast<int64_t>(v);
        }
    }

    // Standard normal via Box-Muller, second value cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static int count_leading_zeros(uint64_t x) {
        int n = 0;
        for (uint64_t bit = 1ull << 63; bit && !(x & bit); bit >>= 1) ++n;
        return n;
    }

    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace segssl

#endif
