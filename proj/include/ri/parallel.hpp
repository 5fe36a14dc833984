#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ri {

// Deterministic task pool: body(i, worker) is called once for every index i.
// Each task derives its randomness from its own index and writes only to its
// own output slot, so results are identical for every worker count; the
// worker id exists solely to address per-worker scratch buffers.
template <class Body>
void parallel_for(uint64_t n, int threads, Body&& body) {
    if (threads < 1) threads = 1;
    if (threads == 1 || n <= 1) {
        for (uint64_t i = 0; i < n; ++i) body(i, 0);
        return;
    }
    std::atomic<uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto run = [&](int worker) {
        const uint64_t chunk = 16;
        for (;;) {
            uint64_t begin = next.fetch_add(chunk);
            if (begin >= n) return;
            uint64_t end = begin + chunk < n ? begin + chunk : n;
            try {
                for (uint64_t i = begin; i < end; ++i) body(i, worker);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(run, t);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

inline int default_threads() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace ri
