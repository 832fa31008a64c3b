#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lislab/common.hpp"

namespace lislab {

enum class Family {
    geometric,
    poisson,
    power_log,
    borderline_power_log,
    finite_uniform,
    explicit_atoms,
};

// Partial series sum with an explicit truncation bound: |true - value| <= bound
// (bound is exact for enumerated tails, an estimate for the analytic machinery).
struct SeriesSum {
    double value = 0;
    double bound = 0;
    long long terms = 0;
};

// Probability distribution on a set of integer atoms.  Instances are immutable
// after construction and cheap to copy (shared internal state), so they can be
// shared freely across threads.
//
// Families and their closed forms (atom i):
//   geometric(p):             p (1-p)^(i-1),                    i >= 1
//   poisson(lambda):          e^-lambda lambda^i / i!,          i >= 0
//   power_log(beta, gamma):   c (log(e-1+i))^gamma i^-beta,     i >= 1, beta > 1
//   borderline_power_log(g):  c (log(e-1+i))^g / i,             i >= 1, g < -1
//   finite_uniform(m):        1/m,                              1 <= i <= m
//   explicit_atoms(map):      given masses,                     atoms as given
//
// The shifted logarithm log(e-1+i) equals 1 at i=1 and is asymptotically
// log(i); it is the smooth splice used both for the mass function and for the
// continuous interpolation of the two power-log families.
class DiscretePmf {
  public:
    static DiscretePmf geometric(double p);
    static DiscretePmf poisson(double lambda);
    static DiscretePmf power_log(double beta, double gamma);
    static DiscretePmf borderline_power_log(double gamma);
    static DiscretePmf finite_uniform(long long m);
    static DiscretePmf explicit_atoms(std::vector<std::pair<long long, double>> atoms);

    Family family() const;
    std::string family_name() const;
    std::string params_label() const;

    struct FamilyParams {
        double p = 0, lambda = 0, beta = 0, gamma = 0;
        double norm_c = 1;  // normalizing constant of the power-log families
        long long m = 0;
    };
    FamilyParams params() const;

    bool finite_support() const;
    long long support_min() const;
    // Number of atoms, or -1 for infinite support.
    long long support_count() const;
    long long support_max() const;  // largest atom, -1 for infinite support

    // Mass at an integer atom; throws OutOfSupport outside the support.
    double pmf(long long atom) const;

    // Discrete tail: sum of masses at atoms strictly greater than x (x >= 0).
    double tail(double x) const;

    // Integral tail of the continuous interpolation, \int_x^inf p(u) du.
    // Requires has_interpolation().
    double integral_tail(double x) const;

    bool has_interpolation() const;

    // Continuous interpolation p(x); equals pmf exactly at integer atoms.
    double interpolated_pmf(double x) const;

    // The k heaviest atoms as (mass, atom) pairs, mass non-increasing,
    // ties broken by ascending atom value.
    std::vector<std::pair<double, long long>> sorted_prefix(std::size_t k) const;

    // S(a)  = sum_i p_i / (p_i + a), a > 0.
    // S2(a) = sum_i p_i / (p_i + a)^2.
    // Heavy-tailed families switch to an Euler-Maclaurin + series tail past the
    // cached head; the returned bound covers the truncation either way.
    SeriesSum sum_phi(double a, double tol) const;
    SeriesSum sum_phi_sq(double a, double tol) const;

    // One draw.  The value is the exact atom whenever it is representable; for
    // the power-log families, astronomically deep draws (beyond ~e^709) map to
    // an order-preserving surrogate so that ordering statistics are unaffected.
    double sample_one(Rng& rng) const;
    std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

    // Smallest atom c with tail(c) <= bound, searched over [support_min, cap];
    // returns cap if the tail is still larger there.
    long long tail_cutoff(double bound, long long cap) const;

    // First atom at or past which the mass function is non-increasing.
    long long decreasing_from() const;

    struct Impl;
    const Impl& impl() const { return *impl_; }

  private:
    explicit DiscretePmf(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

// rho1 * Uniform(lo,hi) + (1 - rho1) * discrete part.  The open interval
// (lo,hi) must contain no integer so the atomless part never collides with an
// atom of the discrete part.
class MixedDistribution {
  public:
    MixedDistribution(double rho1, std::optional<DiscretePmf> discrete,
                      double lo = 0.0, double hi = 1.0);

    double rho1() const { return rho1_; }
    double uniform_lo() const { return lo_; }
    double uniform_hi() const { return hi_; }
    const std::optional<DiscretePmf>& discrete() const { return discrete_; }

    std::string params_label() const;

    double sample_one(Rng& rng) const;
    std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

  private:
    double rho1_;
    std::optional<DiscretePmf> discrete_;
    double lo_, hi_;
};

// Either kind of sampling model accepted by the simulation layer.
using AnyDistribution = std::variant<DiscretePmf, MixedDistribution>;

std::string any_family_name(const AnyDistribution& d);
std::string any_params_label(const AnyDistribution& d);
double any_sample_one(const AnyDistribution& d, Rng& rng);

}  // namespace lislab
