#pragma once

// Fan-out over independent indices. Each index writes its own output slot,
// so results do not depend on the thread count.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "jacobi_scatter/error.hpp"

namespace jacobi_scatter {

inline constexpr const char* kThreadsEnv = "JACOBI_SCATTER_THREADS";

namespace detail {
inline std::atomic<int>& thread_setting() {
    static std::atomic<int> n{0};
    return n;
}
} // namespace detail

/// Explicit request, then JACOBI_SCATTER_THREADS, then 1.
inline int resolve_threads(std::optional<int> requested) {
    if (requested) {
        if (*requested < 1) throw ValidationError("threads must be at least 1");
        return *requested;
    }
    if (const char* env = std::getenv(kThreadsEnv)) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || n < 1)
            throw ValidationError(std::string(kThreadsEnv) + " must be a positive integer, got '" + env + "'");
        return static_cast<int>(n);
    }
    return 1;
}

inline void set_thread_count(int n) {
    if (n < 1) throw ValidationError("threads must be at least 1");
    detail::thread_setting().store(n);
}

/// Thread count used by library sweeps; 1 unless set.
inline int thread_count() {
    const int n = detail::thread_setting().load();
    return n > 0 ? n : 1;
}

/// Calls f(i) for i in [0, n). The first exception (lowest index) is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& f, int threads = thread_count()) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex m;
    std::size_t failed_at = n;
    std::exception_ptr failure;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(m);
                if (i < failed_at) {
                    failed_at = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace jacobi_scatter
