#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace derham {

/// Worker-thread cap, read once from DERHAM_THREADS (default 1, which is the
/// deterministic single-threaded mode).
int thread_count();
/// Overrides the environment value; mainly for tests and benchmarks.
void set_thread_count(int n);

/// Splits [0, n) into contiguous chunks, one per worker. `body(begin, end)` must
/// only write to state owned by its range.
template <typename Body>
void parallel_for_range(std::int64_t n, Body&& body)
{
    const int threads = thread_count();
    if (threads <= 1 || n < 4096) {
        body(std::int64_t{0}, n);
        return;
    }
    const std::int64_t chunk = (n + threads - 1) / threads;
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (int t = 1; t < threads; ++t) {
        const std::int64_t begin = std::min(n, t * chunk);
        const std::int64_t end = std::min(n, begin + chunk);
        if (begin < end) {
            pool.emplace_back([&body, begin, end] { body(begin, end); });
        }
    }
    body(std::int64_t{0}, std::min(n, chunk));
    for (auto& th : pool) {
        th.join();
    }
}

}  // namespace derham
