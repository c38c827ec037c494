#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace kmis {

// Worker count used by parallel_for: KMIS_THREADS if set, else
// hardware_concurrency. Always >= 1.
int worker_count();

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks over
// worker_count() threads; nested calls from inside a worker run serially.
// Callers must only write to disjoint, index-addressed slots so results
// are independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Pairwise (tree) summation with a fixed reduction order.
double pairwise_sum(std::span<const double> values);

// Sorts a copy of the terms and pairwise-sums them: the result depends only
// on the multiset of terms, so it is invariant under permutation of the
// inputs and under the thread count that produced them.
double stable_sum(std::span<const double> values);

}  // namespace kmis
