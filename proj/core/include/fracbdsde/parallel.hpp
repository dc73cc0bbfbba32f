#pragma once

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace fracbdsde {

// Worker count: FRACBDSDE_WORKERS env var, default = available cores.
inline int worker_count() {
    if (const char* env = std::getenv("FRACBDSDE_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : int(hc);
}

// Static-chunk parallel for over [0, n). Each index writes its own
// preallocated slot, and any reduction happens sequentially afterwards, so
// results are bit-identical for every worker count.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const int workers = worker_count();
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers) - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
}

}  // namespace fracbdsde
