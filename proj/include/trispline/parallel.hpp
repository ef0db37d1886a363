#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace trispline {

// Run fn(i) for i in [0, count) on up to `threads` workers. Results must be
// written to per-index slots by the caller; the work distribution never
// affects them. The first exception is rethrown on the calling thread.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    const int workers = std::min(threads, count);
    std::atomic<int> next{0};
    std::mutex err_mtx;
    std::exception_ptr err;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mtx);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (err)
        std::rethrow_exception(err);
}

// thread-count resolution: explicit flag beats TRISPLINE_THREADS beats
// hardware concurrency
int resolve_threads(int requested);

} // namespace trispline
