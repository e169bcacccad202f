#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace mla {

/// Intra-sweep worker cap: MLA_THREADS when set (clamped to [1,64]), else 1.
/// Sweeps snapshot their inputs, so the thread count never changes results.
inline int default_threads() {
    if (const char* env = std::getenv("MLA_THREADS")) {
        int n = std::atoi(env);
        if (n < 1) n = 1;
        if (n > 64) n = 64;
        return n;
    }
    return 1;
}

/// Runs fn(i) for i in [0, n), split into contiguous chunks across
/// `threads` workers. threads <= 1 degenerates to a plain loop.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace mla
