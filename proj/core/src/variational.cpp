#include "lislab/variational.hpp"

#include <cmath>
#include <limits>

namespace lislab {

double g_objective(const DiscretePmf& d, double t, double a, const SolverConfig& cfg) {
    if (!(t > 0.0)) throw DomainError("g_objective: t must be positive");
    if (!(a > 0.0)) throw DomainError("g_objective: a must be positive");
    return a * t + d.sum_phi(a, cfg.sum_tolerance).value;
}

VariationalResult solve_f(const DiscretePmf& d, double t, const SolverConfig& cfg) {
    if (!(t > 0.0)) throw DomainError("solve_f: t must be positive");
    VariationalResult res;
    auto eval = [&](double a) {
        SeriesSum s = d.sum_phi(a, cfg.sum_tolerance);
        res.truncation_terms = s.terms;
        res.truncation_bound = s.bound;
        return a * t + s.value;
    };
    const double floor_a = cfg.opt_tolerance / t;
    double lo = floor_a;
    // the minimizer satisfies sum p/(p+a)^2 = t, which forces a <= 1/sqrt(t);
    // expand defensively in case of slack
    double hi = 2.0 / std::sqrt(t) + 4.0 * floor_a;
    int it = 0;
    double ghalf = eval(hi * 0.5), ghi = eval(hi);
    while (ghi < ghalf) {
        if (++it > 80) throw SolverFailure("solve_f: bracket expansion failed");
        hi *= 2.0;
        ghalf = ghi;
        ghi = eval(hi);
    }
    const double inv_phi = 0.6180339887498949;
    double x1 = hi - (hi - lo) * inv_phi;
    double x2 = lo + (hi - lo) * inv_phi;
    double f1 = eval(x1), f2 = eval(x2);
    while (hi - lo > cfg.opt_tolerance * hi + 0.5 * floor_a) {
        if (++it > cfg.max_iterations) throw SolverFailure("solve_f: golden section did not converge");
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - (hi - lo) * inv_phi;
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + (hi - lo) * inv_phi;
            f2 = eval(x2);
        }
    }
    res.argmin = 0.5 * (lo + hi);
    res.value = eval(res.argmin);
    res.on_boundary = res.argmin <= 4.0 * floor_a;
    res.iterations = it;
    return res;
}

VariationalResult solve_w(const DiscretePmf& d, double t, const SolverConfig& cfg) {
    if (!(t > 0.0)) throw DomainError("solve_w: t must be positive");
    VariationalResult res;
    auto resid = [&](double w) {
        SeriesSum s = d.sum_phi(w / t, cfg.sum_tolerance);
        res.truncation_terms = s.terms;
        res.truncation_bound = s.bound;
        return w - s.value;
    };
    double lo = std::min(1e-12, 0.5 / t);
    double hi = 2.0 * std::sqrt(t) + 2.0;
    if (resid(lo) >= 0.0) {
        res.value = res.argmin = lo;
        res.on_boundary = true;
        return res;
    }
    int it = 0;
    while (resid(hi) < 0.0) {
        hi *= 2.0;
        if (++it > 80) throw SolverFailure("solve_w: no upper bracket");
    }
    while (hi - lo > cfg.opt_tolerance * hi) {
        if (++it > cfg.max_iterations) throw SolverFailure("solve_w: bisection did not converge");
        double mid = 0.5 * (lo + hi);
        (resid(mid) < 0.0 ? lo : hi) = mid;
    }
    res.value = 0.5 * (lo + hi);
    res.argmin = res.value / t;
    res.iterations = it;
    return res;
}

long long solve_r(const DiscretePmf& d, double n) {
    if (!(n >= 0.0)) throw DomainError("solve_r: n must be non-negative");
    long long cap = d.finite_support() ? d.support_count() : (4LL << 20);
    std::size_t k = 256;
    while (true) {
        if (static_cast<long long>(k) > cap) k = static_cast<std::size_t>(cap);
        auto pref = d.sorted_prefix(k);
        long double acc = 0.0L;
        long long r = 0;
        for (const auto& [mass, atom] : pref) {
            (void)atom;
            if (acc + 1.0L / mass <= static_cast<long double>(n)) {
                acc += 1.0L / mass;
                ++r;
            } else {
                return r;
            }
        }
        if (static_cast<long long>(k) >= cap) return r;  // whole support consumed
        k *= 4;
    }
}

VariationalResult solve_mu(const DiscretePmf& d, double t, const SolverConfig& cfg) {
    if (!d.has_interpolation()) throw NoInterpolation("solve_mu: family has no interpolation");
    if (!(t > 0.0)) throw DomainError("solve_mu: t must be positive");
    auto ratio = [&](double x) {
        double p = d.interpolated_pmf(x);
        if (!(p > 0.0) || !std::isfinite(p)) return std::numeric_limits<double>::infinity();
        return x / p;
    };
    VariationalResult res;
    double x0 = static_cast<double>(std::max(d.support_min(), d.decreasing_from()));
    double lo, hi;
    int it = 0;
    if (ratio(x0) <= t) {
        // monotone branch: x/p(x) is increasing past the mode
        lo = x0;
        hi = x0 + 2.0;
        while (ratio(hi) <= t) {
            hi = x0 + (hi - x0) * 2.0;
            if (++it > 400) throw SolverFailure("solve_mu: no upper bracket");
        }
    } else {
        lo = static_cast<double>(d.support_min());
        hi = x0;
        if (ratio(lo) > t) throw DomainError("solve_mu: t below the scale of the support");
    }
    while (hi - lo > cfg.opt_tolerance * std::max(1.0, hi)) {
        if (++it > cfg.max_iterations + 400) throw SolverFailure("solve_mu: bisection did not converge");
        double mid = 0.5 * (lo + hi);
        (ratio(mid) <= t ? lo : hi) = mid;
    }
    res.value = res.argmin = 0.5 * (lo + hi);
    res.iterations = it;
    return res;
}

VariationalResult solve_nu(const DiscretePmf& d, double t, const SolverConfig& cfg) {
    if (!d.has_interpolation()) throw NoInterpolation("solve_nu: family has no interpolation");
    if (!(t > 0.0)) throw DomainError("solve_nu: t must be positive");
    auto ratio = [&](double x) {
        double F = d.integral_tail(x);
        if (!(F > 0.0) || !std::isfinite(F)) return std::numeric_limits<double>::infinity();
        return x * x / F;
    };
    VariationalResult res;
    double lo = std::max<double>(1.0, static_cast<double>(d.support_min()));
    if (ratio(lo) > t) throw DomainError("solve_nu: t below the scale of the support");
    double hi = lo + 2.0;
    int it = 0;
    while (ratio(hi) <= t) {
        hi = lo + (hi - lo) * 2.0;
        if (++it > 400) throw SolverFailure("solve_nu: no upper bracket");
    }
    while (hi - lo > cfg.opt_tolerance * std::max(1.0, hi)) {
        if (++it > cfg.max_iterations + 400) throw SolverFailure("solve_nu: bisection did not converge");
        double mid = 0.5 * (lo + hi);
        (ratio(mid) <= t ? lo : hi) = mid;
    }
    res.value = res.argmin = 0.5 * (lo + hi);
    res.iterations = it;
    return res;
}

double asymptotic_prediction(const DiscretePmf& d, double n) {
    if (!(n > 1.0)) throw DomainError("asymptotic_prediction: n must exceed 1");
    auto fp = d.params();
    switch (d.family()) {
        case Family::geometric:
            return std::log(n) / (-std::log1p(-fp.p));
        case Family::poisson: {
            double ll = std::log(std::log(n));
            if (!(ll > 0.0)) throw DomainError("asymptotic_prediction: n too small for this scale");
            return std::log(n) / ll;
        }
        case Family::power_log: {
            double b1 = 1.0 + fp.beta;
            return std::pow(fp.norm_c * n * std::pow(std::log(n) / b1, fp.gamma), 1.0 / b1);
        }
        case Family::borderline_power_log: {
            double g1 = fp.gamma + 1.0;  // < 0
            double c2 = std::sqrt(fp.norm_c * std::pow(2.0, -g1) / (-g1));
            return c2 * std::sqrt(n * std::pow(std::log(n), g1));
        }
        case Family::finite_uniform:
            return static_cast<double>(fp.m);
        case Family::explicit_atoms:
            throw DomainError("asymptotic_prediction: no closed form for explicit atoms");
    }
    throw DomainError("unreachable");
}

}  // namespace lislab
