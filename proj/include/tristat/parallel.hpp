#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace tristat {

// Worker cap from TRISIG_THREADS; 0 or unset means hardware concurrency.
inline std::size_t thread_budget() {
    std::size_t n = 0;
    if (const char* env = std::getenv("TRISIG_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env) n = static_cast<std::size_t>(v);
    }
    if (n == 0) n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    return n;
}

// Parallel index map. f(i) must only write state owned by index i, which
// keeps results identical for any thread count.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t workers = std::min(thread_budget(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) f(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace tristat
