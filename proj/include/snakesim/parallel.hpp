#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

#include "snakesim/rng.hpp"

namespace snakesim {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SNAKESIM_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Replica-parallel map with one private rng stream per replica: results are
/// identical for any thread count, and merging is plain concatenation.
template <typename T, typename Fn>
std::vector<T> parallel_replicas(std::size_t n, std::uint64_t seed, Fn&& fn, int threads = 0) {
    std::vector<T> results(n);
    const int workers = std::min<int>(resolve_threads(threads), static_cast<int>(n == 0 ? 1 : n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};

    auto body = [&]() {
        Rng rng;
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load(std::memory_order_relaxed)) break;
            rng.reseed(seed, i);
            try {
                results[i] = fn(i, rng);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                break;
            }
        }
    };

    if (workers <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

}  // namespace snakesim
