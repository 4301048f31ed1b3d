#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace assq {

// Worker count: SSQ_THREADS if set and positive, else hardware concurrency.
inline unsigned worker_count() {
    if (const char *env = std::getenv("SSQ_THREADS")) {
        try {
            long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs f(i) for i in [0, n). Each index is handled by exactly one worker.
template <class F>
void parallel_for(std::size_t n, F &&f) {
    unsigned nt = std::min<std::size_t>(worker_count(), n);
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) f(i);
        });
    }
    for (auto &th : pool) th.join();
}

} // namespace assq
