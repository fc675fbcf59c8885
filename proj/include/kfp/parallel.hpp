#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace kfp {

// Run fn(0..n-1) on up to `jobs` workers. Work items must be independent and
// write only to their own output slot; the reduce step stays with the caller,
// so results cannot depend on the worker count.
template <class Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    const int count = std::min(jobs, n);
    workers.reserve(count);
    for (int k = 0; k < count; ++k) {
        workers.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& w : workers) w.join();
}

}  // namespace kfp
