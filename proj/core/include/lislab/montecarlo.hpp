#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lislab/distributions.hpp"

namespace lislab {

// Which statistics an experiment computes per grid point.  `coupling_alpha`
// switches the whole run to the coupled particle system (the grid is then a
// grid of t values, which may be fractional); everything else samples n-point
// sequences and works off their LIS values.
struct ExperimentStats {
    bool mean = true;
    bool variance = false;
    bool quantiles = false;
    bool ratios = false;
    bool greedy = false;  // heaviest-atom scan; discrete families only
    bool distinct = false;
    std::optional<double> tail_eps;        // tail_check(eps)
    std::optional<double> coupling_alpha;  // coupling_check(alpha)
};

struct ExperimentSpec {
    AnyDistribution dist;
    std::vector<double> n_grid{};  // ascending; sample sizes, or t values for coupling
    long long replicates = 100;
    std::uint64_t master_seed = kDefaultSeed;
    ExperimentStats stats{};
    int jobs = 1;
};

// One output row.  stderr_est is NaN and violations is -1 when not applicable;
// both serialize as empty/null.
struct StatCell {
    double n = 0;
    long long replicates = 0;
    std::string stat;
    double estimate = 0;
    double stderr_est = 0;
    long long violations = -1;
};

// Solver values attached to each grid point (NaN / -1 where unavailable).
struct Sidecars {
    double f = 0, w = 0, mu = 0, nu = 0, asymptotic = 0;
    long long r = -1;
};

struct ExperimentResult {
    std::string family;
    std::string params;
    std::vector<StatCell> cells;        // grouped by n, grid order
    std::map<double, Sidecars> sidecars;  // keyed by the grid value
};

// Replicate r at grid value n is seeded with
//     derive_seed(master_seed, bit_cast<uint64>(double(n)), r)
// so any single replicate can be replayed.  Replicates fill pre-assigned
// slots and are aggregated in index order: results are bit-identical for any
// worker count, and shard merges are plain concatenations.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Mean/variance/ratio summary of L_n over the grid.
ExperimentResult estimate_lis(const AnyDistribution& d, const std::vector<double>& n_grid,
                              long long replicates, std::uint64_t master_seed = kDefaultSeed,
                              int jobs = 1);

// Var(L_n) <= E[L_n]; pass iff var_hat <= mean_hat + 3 * SE(var_hat).
struct VarianceCheck {
    double n = 0;
    double mean_hat = 0, var_hat = 0, se_var = 0;
    bool pass = false;
};
VarianceCheck variance_check(const AnyDistribution& d, double n, long long replicates,
                             std::uint64_t master_seed = kDefaultSeed, int jobs = 1);

// P(L_n <= (1-eps) w_n) against the bound 3 exp(-eps^2 (1-eps) w_n / 40);
// pass iff freq <= bound + 3 * SE(freq).  Finite-support families where w
// saturates at the atom count get a note (the bound is vacuous there).
struct TailCheck {
    double n = 0, eps = 0;
    double freq = 0, se = 0, bound = 0;
    bool pass = false;
    std::string note;
};
TailCheck tail_check(const DiscretePmf& d, double n, long long replicates, double eps,
                     std::uint64_t master_seed = kDefaultSeed, int jobs = 1);

// L_n / (2 sqrt(n)) against sqrt(rho1) for mixed draws.
struct MixedLimitCell {
    double n = 0;
    double ratio = 0, se = 0, target = 0;
};
std::vector<MixedLimitCell> mixed_limit(const MixedDistribution& d,
                                        const std::vector<double>& n_grid, long long replicates,
                                        std::uint64_t master_seed = kDefaultSeed, int jobs = 1);

// Greedy head count R_n against r_n and the LIS mean.  greedy_gt_r counts
// replicates with R_n > r_n (must stay 0); chain_violations counts replicates
// breaking R_n <= L_n <= K_n.
struct GreedyRow {
    double n = 0;
    double greedy_mean = 0, lis_mean = 0;
    long long r = -1;
    long long greedy_gt_r = -1;
    long long chain_violations = 0;
};
std::vector<GreedyRow> greedy_vs_lis(const AnyDistribution& d, const std::vector<double>& n_grid,
                                     long long replicates, std::uint64_t master_seed = kDefaultSeed,
                                     int jobs = 1);

// Coupled-system sweep over a (t, alpha) grid.  Each cell gets its own master
// seed splitmix64(master ^ bit_cast(alpha)) so cells are independent; every
// violation row carries the replicate's engine seed for replay.
struct CouplingCell {
    double t = 0, alpha = 0;
    long long replicates = 0, violations = 0;
    double lis_mean = 0, upper_mean = 0, lower_mean = 0, h_count_mean = 0;
    double truncation_mean = 0;
};
struct CouplingViolation {
    double t = 0, alpha = 0;
    long long replicate = -1;
    std::uint64_t seed = 0;
    long long lis = 0, lower = 0, upper = 0;
    double truncation = 0;
};
struct CouplingReport {
    std::vector<CouplingCell> cells;
    std::vector<CouplingViolation> violations;
};
CouplingReport coupling_study(const DiscretePmf& d, const std::vector<double>& t_grid,
                              const std::vector<double>& alpha_grid, long long replicates,
                              std::uint64_t master_seed = kDefaultSeed, int jobs = 1,
                              int head_rows = 0);

// Table serialization.  CSV header:
// family,params,n,replicates,stat,estimate,stderr,sidecar_f,sidecar_w,
// sidecar_r,sidecar_mu,sidecar_nu,asymptotic,violations
std::string to_csv(const ExperimentResult& r);
std::string to_json(const ExperimentResult& r);

}  // namespace lislab
