#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace radar {

// Static-partition parallel loop. Work items must be independent and write
// only their own slots; results are then reduced in index order by the
// caller, so thread count never affects output bytes.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t n_threads = std::min<std::size_t>(hw == 0 ? 1 : hw, 8);
    if (n_threads <= 1 || n < 2 * n_threads) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += n_threads) f(i);
        });
    }
    for (auto& t : workers) t.join();
}

}  // namespace radar
