#ifndef SEGSSL_PARALLEL_HPP
#define SEGSSL_PARALLEL_HPP

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace segssl {

// Thread cap: SEGSSL_THREADS when set, otherwise hardware concurrency.
inline int max_threads() {
    if (const char* env = std::getenv("SEGSSL_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n). Results must be written by index; the output
// is then independent of the thread schedule.
template <typename Fn>
void parallel_for(size_t n, Fn fn) {
    int threads = std::min<int>(max_threads(), static_cast<int>(n));
    if (threads <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

} // namespace segssl

#endif
