#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace examqa::detail {

// Runs fn(0..n-1) on a bounded pool. Per-index work must handle its own
// domain errors; an escaping exception aborts the remaining work and is
// rethrown on the caller thread.
template <typename Fn>
void parallel_for(std::size_t n, int width, Fn&& fn) {
    if (n == 0) return;
    const std::size_t workers =
        std::min<std::size_t>(std::max(width, 1), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::exception_ptr first_error;
    std::mutex error_mu;

    auto worker = [&] {
        while (!abort.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                {
                    std::lock_guard lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                }
                abort.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace examqa::detail
