#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace simdetect {

/// Runs body(k) for k in [0, count) on up to `workers` threads. Work items
/// must write disjoint outputs. If items throw, the exception of the lowest
/// failing index is rethrown, so error reporting is scheduling-independent.
template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
    workers = std::max(1u, workers);
    if (workers == 1 || count < 2) {
        for (std::size_t k = 0; k < count; ++k) body(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_at = count;
    std::exception_ptr failure;
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < count;) {
            try {
                body(k);
            } catch (...) {
                std::lock_guard lock(mu);
                if (k < failed_at) {
                    failed_at = k;
                    failure = std::current_exception();
                }
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const auto n = std::min<std::size_t>(workers, count);
        for (std::size_t w = 0; w < n; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace simdetect
