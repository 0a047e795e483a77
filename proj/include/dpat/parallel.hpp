#pragma once

// Minimal index-parallel loop. Work items write into their own slots, so
// results do not depend on scheduling.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dpat {

inline unsigned worker_count(unsigned requested = 0) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Calls body(i) for every i in [0, n). The first exception thrown by any
/// worker is rethrown on the calling thread after all workers stop.
template <class Body>
void parallel_for(std::size_t n, Body&& body, unsigned threads = 0) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(threads), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n || failed.load(std::memory_order_relaxed)) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock{error_mutex};
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace dpat
