#pragma once

// Trajectory-parallel ensembles.  Each trajectory gets the stream
// RngStream::for_trajectory(master_seed, index) and writes its result into
// slot `index`, so the output is identical for any thread count.

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "rdkmc/rng.hpp"

namespace rdkmc {

struct EnsembleOptions {
    std::uint64_t master_seed = 0;
    int threads = 0; // 0 = hardware concurrency
};

template <class Fn>
auto run_ensemble(std::size_t n, const EnsembleOptions& opt, Fn&& sample)
    -> std::vector<decltype(sample(std::size_t{}, std::declval<RngStream&>()))> {
    using R = decltype(sample(std::size_t{}, std::declval<RngStream&>()));
    std::vector<R> results(n);
    if (n == 0) return results;

    int threads = opt.threads > 0 ? opt.threads : static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    if (static_cast<std::size_t>(threads) > n) threads = static_cast<int>(n);

    std::atomic<std::size_t> cursor{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= n) return;
            try {
                RngStream rng = RngStream::for_trajectory(opt.master_seed, i);
                results[i] = sample(i, rng);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                cursor.store(n);
                return;
            }
        }
    };

    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

} // namespace rdkmc
