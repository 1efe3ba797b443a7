#include "nouk/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nouk {

namespace {

std::atomic<int> g_threads{1};
thread_local bool t_in_worker = false;

}  // namespace

int worker_threads()
{
    return g_threads.load();
}

void set_worker_threads(int threads)
{
    g_threads.store(std::max(1, threads));
}

void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body)
{
    const std::size_t workers =
        std::min<std::size_t>(chunks, static_cast<std::size_t>(worker_threads()));
    if (workers <= 1 || t_in_worker) {
        for (std::size_t c = 0; c < chunks; ++c) body(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            t_in_worker = true;
            for (std::size_t c = next++; c < chunks; c = next++) {
                try {
                    body(c);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace nouk
