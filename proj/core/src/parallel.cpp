#include "ctnet/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace ctnet {

namespace {
int g_threads = 1;
}

void set_threads(int n) {
    g_threads = n < 1 ? 1 : n;
}

int threads() {
    return g_threads;
}

void parallel_for(std::size_t blocks, const std::function<void(std::size_t)>& fn) {
    if (blocks == 0) return;
    const int nthreads = g_threads;
    if (nthreads <= 1 || blocks == 1) {
        for (std::size_t b = 0; b < blocks; ++b) fn(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t b = next.fetch_add(1);
            if (b >= blocks) return;
            fn(b);
        }
    };
    std::vector<std::thread> pool;
    const int spawn = static_cast<int>(std::min<std::size_t>(nthreads, blocks)) - 1;
    pool.reserve(spawn);
    for (int i = 0; i < spawn; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

}  // namespace ctnet
