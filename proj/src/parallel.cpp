#include <cmag/parallel.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace cmag
{

int worker_count()
{
    const char *env = std::getenv("CMAG_WORKERS");
    if (env == nullptr || *env == '\0') {
        return 1;
    }
    char *end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || v < 1) {
        return 1;
    }
    return static_cast<int>(std::min(v, 256L));
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn, int workers)
{
    if (workers <= 0) {
        workers = worker_count();
    }
    const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    if (nw <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (std::size_t t = 0; t < nw; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!err) {
                        err = std::current_exception();
                    }
                    next.store(n);
                }
            }
        });
    }
    for (auto &th : pool) {
        th.join();
    }
    if (err) {
        std::rethrow_exception(err);
    }
}

double pairwise_sum(const double *v, std::size_t n)
{
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += v[i];
        }
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

} // namespace cmag
