#pragma once

#include "parisian/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace parisian {

// Runs fn(block_index) for block_index in [0, n_blocks) across `workers`
// threads and returns results indexed by block. Blocks are claimed via an
// atomic counter but stored by index, so a sequential left fold over the
// result vector is identical for any worker count.
template <typename BlockResult, typename BlockFn>
std::vector<BlockResult> run_blocks(std::size_t n_blocks, int workers, BlockFn&& fn) {
    if (workers < 1) {
        throw param_error("workers must be >= 1");
    }
    std::vector<BlockResult> results(n_blocks);
    if (n_blocks == 0) {
        return results;
    }
    if (workers == 1 || n_blocks == 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) {
            results[b] = fn(b);
        }
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mu;

    const auto worker = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
            if (b >= n_blocks) {
                return;
            }
            try {
                results[b] = fn(b);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(workers), n_blocks);
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) {
        threads.emplace_back(worker);
    }
    for (auto& t : threads) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
    return results;
}

} // namespace parisian
