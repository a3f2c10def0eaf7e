#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace shadow {

/// Reduction block length shared by every estimator kernel. Partial sums
/// are always formed over fixed [k*kReduceBlock, (k+1)*kReduceBlock)
/// snapshot ranges and combined in ascending block order, so results are
/// bit-identical for any worker count.
inline constexpr int kReduceBlock = 4096;

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

inline int block_count(int n, int block = kReduceBlock) {
    return n <= 0 ? 0 : (n + block - 1) / block;
}

/// Run fn(block_index) for every index in [0, nblocks) on up to `threads`
/// workers. Work assignment is dynamic; callers must make each block's
/// output independent of which worker ran it.
inline void parallel_blocks(int nblocks, int threads, const std::function<void(int)>& fn) {
    threads = std::min(resolve_threads(threads), nblocks);
    if (nblocks <= 0) return;
    if (threads <= 1) {
        for (int b = 0; b < nblocks; ++b) fn(b);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            int b = next.fetch_add(1, std::memory_order_relaxed);
            if (b >= nblocks || failed.load(std::memory_order_relaxed)) return;
            try {
                fn(b);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads) - 1);
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace shadow
