#include "otmorph/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace otm {

int worker_thread_count() {
    const char* env = std::getenv("OTMORPH_THREADS");
    if (!env || !*env) return 1;
    const long n = std::strtol(env, nullptr, 10);
    return n <= 1 ? 1 : static_cast<int>(n);
}

void parallel_for(int count, const std::function<void(int)>& body) {
    const int workers = std::min(worker_thread_count(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const int begin = count * w / workers;
        const int end = count * (w + 1) / workers;
        pool.emplace_back([&, begin, end] {
            try {
                for (int i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace otm
