#ifndef CMAG_PARALLEL_HPP
#define CMAG_PARALLEL_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace cmag
{

// Worker count from CMAG_WORKERS (default 1, clamped to [1, 256]).
int worker_count();

// Runs fn(i) for i in [0, n) on `workers` threads; each index is visited once.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn, int workers = 0);

// Pairwise (cascade) summation in index order; independent of thread count.
double pairwise_sum(const double *v, std::size_t n);
inline double pairwise_sum(const std::vector<double> &v)
{
    return pairwise_sum(v.data(), v.size());
}

} // namespace cmag

#endif
