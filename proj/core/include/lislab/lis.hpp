#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "lislab/distributions.hpp"

namespace lislab {

// Length of the longest strictly increasing subsequence, O(n log n).
long long lis_strict(std::span<const double> seq);

// Quadratic DP reference with the same contract as lis_strict.  Guarded to
// n <= 1e4 so it cannot be used on production-sized inputs by accident.
long long lis_oracle(std::span<const double> seq);

// LIS of a planar point set: longest chain strictly increasing in both
// coordinates.  Abscissas must be pairwise distinct.
long long lis_planar(std::vector<std::pair<double, double>> points);

// Walks seq once, taking the first occurrence of targets[0], then the first
// later occurrence of targets[1], and so on.  Targets must be strictly
// increasing, so the hits always form an increasing subsequence.  Returns the
// number of targets found; 0-based hit positions are appended on request.
long long greedy_scan(std::span<const double> seq, std::span<const double> targets,
                      std::vector<std::size_t>* positions = nullptr);

struct GreedyResult {
    long long count = 0;                 // targets found
    std::vector<std::size_t> positions;  // 0-based indices of the hits
};

// Constructive lower bound for the LIS of a sample from d: targets the
// heaviest atoms -- as many as fit the sample-size budget n -- in increasing
// atom order and scans the first n entries of seq for them.  count never
// exceeds the number of targets.
GreedyResult greedy_subsequence(const DiscretePmf& d, std::span<const double> seq, long long n);

// Number of distinct values.
long long distinct_count(std::span<const double> seq);

}  // namespace lislab
