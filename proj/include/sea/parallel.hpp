#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace sea {

// Thread budget: hardware concurrency capped by the SEA_THREADS env var.
inline int thread_budget() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* cap = std::getenv("SEA_THREADS")) {
        int c = std::atoi(cap);
        if (c >= 1 && c < n) n = c;
    }
    return n;
}

// Runs fn(i) for i in [0, n). Workers write to disjoint preallocated slots,
// so the result is identical to sequential execution.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
    int threads = thread_budget();
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    if (threads > n) threads = n;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([t, n, threads, &fn] {
            for (int i = t; i < n; i += threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace sea
