#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace ballcalc {

/// Number of worker threads: BALLCALC_THREADS if set (min 1), else the
/// hardware count.
inline unsigned thread_cap() {
    if (const char* env = std::getenv("BALLCALC_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
        return 1;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs fn(begin, end) on contiguous chunks of [0, n).
///
/// Every index is handled by exactly one invocation and each invocation
/// walks its chunk in increasing order, so results written to
/// per-index slots are identical for any thread count. Callers must not
/// accumulate across chunk boundaries in schedule-dependent order.
template <class Fn>
void parallel_chunks(std::size_t n, Fn&& fn) {
    unsigned threads = thread_cap();
    if (n == 0) return;
    if (threads <= 1 || n < 2048) {
        fn(std::size_t{0}, n);
        return;
    }
    std::size_t chunk = (n + threads - 1) / threads;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t begin = 0; begin < n; begin += chunk) {
        std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) t.join();
}

/// parallel_for over single indices.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    parallel_chunks(n, [&fn](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) fn(i);
    });
}

}  // namespace ballcalc
