#include "sob/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>
#include <vector>

namespace sob {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) {
    g_max_threads.store(n < 0 ? 0 : n);
}

int max_threads() {
    int n = g_max_threads.load();
    if (n == 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
        if (n == 0) n = 1;
    }
    return n;
}

void parallel_for(int count, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    const int workers = std::min(count, max_threads());
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    std::mutex err_mutex;
    for (int w = 0; w < workers; ++w) {
        const int begin = static_cast<int>(static_cast<long long>(count) * w / workers);
        const int end = static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
        pool.emplace_back([&, begin, end] {
            try {
                for (int i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!failed.exchange(true)) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed.load()) std::rethrow_exception(first_error);
}

} // namespace sob
