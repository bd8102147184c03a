#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace symrank {

/// Runs fn(0..units-1) over a work-stealing pool. Units must write disjoint
/// state (callers index per-unit slots), so the result is independent of the
/// schedule and of the thread count.
inline void parallel_units(std::uint64_t units, int threads,
                           const std::function<void(std::uint64_t)>& fn) {
    if (threads <= 1 || units <= 1) {
        for (std::uint64_t u = 0; u < units; ++u) fn(u);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            const std::uint64_t u = next.fetch_add(1);
            if (u >= units || failed.load(std::memory_order_relaxed)) return;
            try {
                fn(u);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int k = static_cast<int>(std::min<std::uint64_t>(threads, units));
    pool.reserve(k);
    for (int t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace symrank
