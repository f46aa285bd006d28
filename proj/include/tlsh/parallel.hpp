#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace tlsh {

/// Resolves a thread-count knob: 0 means "use the hardware".
inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs fn(i) for i in [begin, end) on up to `threads` threads with a static
/// block partition. Results must be written to per-index slots so the output
/// does not depend on the thread count.
template <typename F>
void parallel_for(size_t begin, size_t end, unsigned threads, F&& fn) {
    size_t total = end > begin ? end - begin : 0;
    unsigned t = std::min<size_t>(resolve_threads(threads), total ? total : 1);
    if (t <= 1) {
        for (size_t i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(t);
    size_t chunk = (total + t - 1) / t;
    for (unsigned k = 0; k < t; ++k) {
        size_t lo = begin + k * chunk;
        size_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace tlsh
