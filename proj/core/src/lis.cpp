#include "lislab/lis.hpp"

#include <algorithm>

#include "lislab/common.hpp"
#include "lislab/variational.hpp"

namespace lislab {

long long lis_strict(std::span<const double> seq) {
    std::vector<double> tails;  // tails[k] = smallest tail of an increasing run of length k+1
    tails.reserve(256);
    for (double x : seq) {
        auto it = std::lower_bound(tails.begin(), tails.end(), x);
        if (it == tails.end())
            tails.push_back(x);
        else
            *it = x;
    }
    return static_cast<long long>(tails.size());
}

long long lis_oracle(std::span<const double> seq) {
    if (seq.size() > 10000)
        throw TooLarge("lis_oracle: input longer than 1e4");
    std::vector<long long> best(seq.size(), 1);
    long long out = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j)
            if (seq[j] < seq[i] && best[j] + 1 > best[i]) best[i] = best[j] + 1;
        if (best[i] > out) out = best[i];
    }
    return out;
}

long long lis_planar(std::vector<std::pair<double, double>> points) {
    std::sort(points.begin(), points.end());
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].first == points[i - 1].first)
            throw DuplicateAbscissa("lis_planar: two points share an abscissa");
    std::vector<double> tails;
    tails.reserve(256);
    for (const auto& [x, y] : points) {
        auto it = std::lower_bound(tails.begin(), tails.end(), y);
        if (it == tails.end())
            tails.push_back(y);
        else
            *it = y;
    }
    return static_cast<long long>(tails.size());
}

long long greedy_scan(std::span<const double> seq, std::span<const double> targets,
                      std::vector<std::size_t>* positions) {
    long long found = 0;
    const long long want = static_cast<long long>(targets.size());
    for (std::size_t i = 0; i < seq.size() && found < want; ++i) {
        if (seq[i] == targets[static_cast<std::size_t>(found)]) {
            if (positions) positions->push_back(i);
            ++found;
        }
    }
    return found;
}

GreedyResult greedy_subsequence(const DiscretePmf& d, std::span<const double> seq, long long n) {
    if (n < 0 || std::cmp_less(seq.size(), n))
        throw DomainError("greedy_subsequence: sequence shorter than n");
    const long long r = solve_r(d, static_cast<double>(n));
    auto heavy = d.sorted_prefix(r);
    std::vector<double> targets;
    targets.reserve(heavy.size());
    for (const auto& [mass, atom] : heavy) targets.push_back(static_cast<double>(atom));
    std::sort(targets.begin(), targets.end());
    GreedyResult out;
    out.count = greedy_scan(seq.first(static_cast<std::size_t>(n)), targets, &out.positions);
    return out;
}

long long distinct_count(std::span<const double> seq) {
    std::vector<double> v(seq.begin(), seq.end());
    std::sort(v.begin(), v.end());
    return static_cast<long long>(std::unique(v.begin(), v.end()) - v.begin());
}

}  // namespace lislab
