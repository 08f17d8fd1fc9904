#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace slidenoise::montecarlo {

/// Evaluates fn(chunk) for chunk in [0, n_chunks) on up to `threads` workers and returns the
/// results in chunk order. Chunk boundaries never depend on the worker count, so any reduction
/// done over the returned vector in index order is bit-identical for every thread count.
template <class Result, class Fn>
std::vector<Result> run_chunks(std::size_t n_chunks, unsigned threads, Fn&& fn) {
    std::vector<Result> out(n_chunks);
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_chunks)));
    if (workers == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) out[c] = fn(c);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            try {
                out[c] = fn(c);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n_chunks);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace slidenoise::montecarlo
