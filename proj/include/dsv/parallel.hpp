#pragma once

#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace dsv {

/// Worker cap from DSV_THREADS; 0 or unset means auto (hardware threads).
inline std::size_t worker_count() {
    std::size_t cap = 0;
    if (const char* env = std::getenv("DSV_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) cap = static_cast<std::size_t>(v);
    }
    if (cap == 0) cap = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    return cap;
}

/// Runs fn(i) for i in [0, n). Results must be written by index; chunks are
/// contiguous so output is identical for any thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : threads) t.join();
}

} // namespace dsv
