#include "biphoton/threading.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace biphoton {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int threads) { g_max_threads.store(threads < 0 ? 0 : threads); }

int max_threads() {
    int t = g_max_threads.load();
    if (t > 0) return t;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int begin, int end, const std::function<void(int, int)>& fn,
                  int threads) {
    const int count = end - begin;
    if (count <= 0) return;
    int workers = threads > 0 ? threads : max_threads();
    workers = std::min(workers, count);
    if (workers <= 1) {
        fn(begin, end);
        return;
    }
    const int chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const int lo = begin + w * chunk;
        const int hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace biphoton
