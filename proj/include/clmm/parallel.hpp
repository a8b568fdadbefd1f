#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace clmm {

// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
// concurrency). Each index is handled exactly once; callers write results
// into slot i so reductions can run afterwards in index order.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = 0) {
    if (n == 0) return;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        workers.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += threads) fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    workers.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace clmm
