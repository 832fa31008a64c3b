#pragma once

#include "lislab/distributions.hpp"

namespace lislab {

struct SolverConfig {
    double sum_tolerance = 1e-9;  // truncation tolerance for series sums
    double opt_tolerance = 1e-8;  // relative tolerance on the located argument
    int max_iterations = 200;
};

struct VariationalResult {
    double value = 0;
    double argmin = 0;            // location of the optimum / root
    bool on_boundary = false;     // minimum pinned at the left edge of the bracket
    long long truncation_terms = 0;
    double truncation_bound = 0;
    int iterations = 0;
};

// g_t(a) = a t + sum_i p_i / (p_i + a), the objective whose infimum over a > 0
// is the limit shape value f_t.
double g_objective(const DiscretePmf& d, double t, double a, const SolverConfig& cfg = {});

// f_t = inf_{a>0} g_t(a), located by golden-section search on [tol/t, 2/sqrt(t)].
VariationalResult solve_f(const DiscretePmf& d, double t, const SolverConfig& cfg = {});

// w_t: unique root of  w = sum_i t p_i / (t p_i + w).
VariationalResult solve_w(const DiscretePmf& d, double t, const SolverConfig& cfg = {});

// r_n = sup{ r : sum of 1/p over the r heaviest atoms <= n }.
long long solve_r(const DiscretePmf& d, double n);

// mu_t: root of  x / p(x) = t  on the decreasing branch of the interpolation.
VariationalResult solve_mu(const DiscretePmf& d, double t, const SolverConfig& cfg = {});

// nu_t: root of  x^2 / F(x) = t  where F is the integral tail.
VariationalResult solve_nu(const DiscretePmf& d, double t, const SolverConfig& cfg = {});

// Closed-form leading-order growth prediction; DomainError when the family has
// no closed form (explicit atoms).
double asymptotic_prediction(const DiscretePmf& d, double n);

}  // namespace lislab
