#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pcw {

// Runs fn(0..n-1) on a small worker pool. Tasks must be independent and
// write only their own output slot, which keeps results identical for any
// thread count. The first exception wins and is rethrown after join.
template <typename Fn>
void parallel_for(int n, int threads, Fn &&fn) {
    if (threads < 1) threads = 1;
    if (threads == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    const int nworkers = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nworkers));
    for (int w = 0; w < nworkers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto &t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace pcw
