#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace thermobem {

// Worker cap shared by all parallel loops. 0 = hardware concurrency.
// THERMO_TDBEM_THREADS is the environment fallback used by the CLI.
inline int& thread_cap() {
    static int cap = [] {
        if (const char* env = std::getenv("THERMO_TDBEM_THREADS")) {
            int v = std::atoi(env);
            if (v > 0) return v;
        }
        return 0;
    }();
    return cap;
}

inline int effective_threads(std::size_t work_items) {
    int cap = thread_cap();
    if (cap <= 0) cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap <= 0) cap = 1;
    return static_cast<int>(std::min<std::size_t>(cap, std::max<std::size_t>(work_items, 1)));
}

// Static block partition; fn(i) must be safe to run concurrently for distinct i.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    int nt = effective_threads(n);
    if (nt <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt - 1);
    std::size_t chunk = (n + nt - 1) / nt;
    auto run = [&fn](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
    };
    for (int t = 1; t < nt; ++t) {
        std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(run, lo, hi);
    }
    run(0, std::min(n, chunk));
    for (auto& th : pool) th.join();
}

} // namespace thermobem
