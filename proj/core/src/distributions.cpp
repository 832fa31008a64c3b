#include "lislab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lislab {
namespace {

constexpr double kEm1 = 1.7182818284590452354;  // e - 1
// u(v) = e^v - (e-1) stays below 2^53 (exact integer range) up to here.
constexpr double kExactVCut = 36.0;
// past this, e^v overflows double; deep draws switch to a surrogate encoding
constexpr double kOverflowV = 709.0;

double sq(double x) { return x * x; }
double cube(double x) { return x * x * x; }

double log_u_of_v(double v) { return v + std::log1p(-kEm1 * std::exp(-v)); }

// ---------------------------------------------------------------------------
// adaptive Simpson
// ---------------------------------------------------------------------------

template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// relative tolerance against the coarse whole-interval estimate
template <class F>
double integrate(const F& f, double a, double b, double rel_tol) {
    if (!(b > a)) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double tol = rel_tol * std::abs(whole) + 1e-300;
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 30);
}

// ---------------------------------------------------------------------------
// power-log tail integrals, computed in v = log(e-1+u) coordinates
//
//   J(G, B, v0) = \int_{u(v0)}^inf (log(e-1+u))^G u^-B du
//               = \int_{v0}^inf v^G e^{(1-B)v} (1 - (e-1)e^{-v})^{-B} dv
//
// Returned as log J so that deep tails (B up to ~100, v0 up to ~1000) never
// overflow or underflow.  B == 1 splits off the analytic leading term
// v0^{G+1}/|G+1| (needs G < -1) plus an exponentially small correction.
// ---------------------------------------------------------------------------

double log_J_tail(double G, double B, double v0, double rel_tol) {
    if (B > 1.0 + 1e-12) {
        auto logf = [&](double v) {
            return G * std::log(v) + (1.0 - B) * v - B * std::log1p(-kEm1 * std::exp(-v));
        };
        double lf0 = logf(v0);
        auto g = [&](double v) { return std::exp(logf(v) - lf0); };
        double rate = B - 1.0;
        double w = std::clamp(6.0 / rate, 0.05, 2.0);
        double grow_until = G > 0.0 ? v0 + G / rate : v0;
        double total = 0.0, v = v0;
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 400; ++k) {
            double piece = integrate(g, v, v + w, rel_tol);
            total += piece;
            v += w;
            if (v > grow_until && piece <= prev && piece <= 1e-15 * total) break;
            prev = piece;
        }
        return lf0 + std::log(total);
    }
    if (std::abs(B - 1.0) <= 1e-12) {
        if (G >= -1.0) throw DomainError("tail integral diverges for these parameters");
        double lead = (G + 1.0) * std::log(v0) - std::log(-(G + 1.0));
        auto logf = [&](double v) {
            return G * std::log(v) - v + std::log(kEm1) - std::log1p(-kEm1 * std::exp(-v));
        };
        double lf0 = logf(v0);
        auto g = [&](double v) { return std::exp(logf(v) - lf0); };
        double total = 0.0, v = v0;
        for (int k = 0; k < 200; ++k) {
            double piece = integrate(g, v, v + 2.0, rel_tol);
            total += piece;
            v += 2.0;
            if (piece <= 1e-15 * total) break;
        }
        double corr = lf0 + std::log(total);
        double hi = std::max(lead, corr), lo = std::min(lead, corr);
        return hi + std::log1p(std::exp(lo - hi));
    }
    throw DomainError("tail integral requires exponent >= 1");
}

}  // namespace

// ---------------------------------------------------------------------------
// Impl
// ---------------------------------------------------------------------------

struct DiscretePmf::Impl {
    Family family = Family::geometric;
    double p = 0, lambda = 0, beta = 0, gamma = 0;
    long long m = 0;

    // explicit support
    std::vector<long long> ex_atoms;
    std::vector<double> ex_mass, ex_cum, ex_suffix;  // ex_suffix[i] = sum of masses at index >= i

    // power-log families
    double c = 1.0, log_c = 0.0;
    long long head_n = 0;                           // cached atoms 1..head_n
    std::vector<double> head_mass, head_cum, head_suffix;

    // poisson sampler anchors
    long long mode = 0;
    double mode_mass = 0, cdf_below_mode = 0;

    long long support_min = 1;
    long long dec_from = 1;

    double beta_eff() const {
        return family == Family::borderline_power_log ? 1.0 : beta;
    }
    // h(v) with the normalizing constant included
    double h_v(double v) const {
        return std::exp(log_c + gamma * std::log(v) - beta_eff() * log_u_of_v(v));
    }
    double h_u(double u) const { return h_v(std::log(kEm1 + u)); }
    // (dh/du)/h at real u; s = e-1+u
    double dlogh_du(double u) const {
        double s = kEm1 + u;
        return gamma / (std::log(s) * s) - beta_eff() / u;
    }
    // smooth continuation of the discrete tail past the head, v-coordinates
    double tail_smooth_v(double v) const {
        double lj = log_J_tail(gamma, beta_eff(), v, 1e-12);
        double h = h_v(v);
        double hp = h * (gamma / v * std::exp(-v) - beta_eff() * std::exp(-log_u_of_v(v)));
        return c * std::exp(lj) + 0.5 * h - hp / 12.0;
    }
};

namespace {

double poisson_pmf(double lambda, long long i) {
    if (i <= 20)
        return std::exp(-lambda) * std::pow(lambda, static_cast<double>(i)) /
               std::tgamma(static_cast<double>(i) + 1.0);
    return std::exp(-lambda + static_cast<double>(i) * std::log(lambda) -
                    std::lgamma(static_cast<double>(i) + 1.0));
}

// atom value carried by a deep power-log draw located at v = log(e-1+x)
double deep_value_of_v(double v, long long min_atom) {
    if (v <= kExactVCut) {
        double x = std::ceil(std::exp(v) - kEm1);
        return std::max(x, static_cast<double>(min_atom));
    }
    if (v <= kOverflowV) return std::exp(v) - kEm1;
    // order-preserving surrogate for atoms beyond double range; starts just
    // above e^709 and increases toward ~1.66e308 as v grows
    return 8.3e307 * (2.0 - 710.0 / v);
}

}  // namespace

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

DiscretePmf DiscretePmf::geometric(double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw DomainError("geometric: p must lie in (0,1)");
    auto im = std::make_shared<Impl>();
    im->family = Family::geometric;
    im->p = p;
    im->support_min = 1;
    im->dec_from = 1;
    return DiscretePmf(std::move(im));
}

DiscretePmf DiscretePmf::poisson(double lambda) {
    if (!(lambda > 0.0) || !(lambda <= 1e6)) throw DomainError("poisson: lambda must lie in (0, 1e6]");
    auto im = std::make_shared<Impl>();
    im->family = Family::poisson;
    im->lambda = lambda;
    im->support_min = 0;
    im->mode = static_cast<long long>(std::floor(lambda));
    im->dec_from = im->mode;
    long double acc = 0.0L, q = std::exp((long double)-lambda);
    for (long long i = 0; i < im->mode; ++i) {
        acc += q;
        q *= lambda / static_cast<long double>(i + 1);
    }
    im->cdf_below_mode = static_cast<double>(acc);
    im->mode_mass = static_cast<double>(q);
    return DiscretePmf(std::move(im));
}

static void build_power_log(DiscretePmf::Impl& im) {
    long long head_n = std::max<long long>(32768, im.dec_from + 1024);
    im.head_n = head_n;
    im.head_mass.resize(head_n);
    long double s = 0.0L;
    for (long long j = 0; j < head_n; ++j) {
        double u = static_cast<double>(j + 1);
        double v = std::log(kEm1 + u);
        double raw = std::exp(im.gamma * std::log(v) - im.beta_eff() * std::log(u));
        im.head_mass[j] = raw;
        s += raw;
    }
    double A = static_cast<double>(head_n + 1);
    double vA = std::log(kEm1 + A);
    double raw_hA = std::exp(im.gamma * std::log(vA) - im.beta_eff() * std::log(A));
    double raw_hpA = raw_hA * im.dlogh_du(A);
    long double tail_raw =
        std::exp(log_J_tail(im.gamma, im.beta_eff(), vA, 1e-13)) + 0.5L * raw_hA - raw_hpA / 12.0L;
    long double total = s + tail_raw;
    im.c = static_cast<double>(1.0L / total);
    im.log_c = -static_cast<double>(std::log(total));
    im.head_cum.resize(head_n);
    im.head_suffix.resize(head_n);
    long double run = 0.0L;
    for (long long j = 0; j < head_n; ++j) {
        im.head_mass[j] = static_cast<double>(im.head_mass[j] / static_cast<double>(total));
        run += im.head_mass[j];
        im.head_cum[j] = static_cast<double>(run);
    }
    long double suf = tail_raw / total;
    im.head_suffix[head_n - 1] = static_cast<double>(suf);
    for (long long j = head_n - 1; j > 0; --j) {
        suf += im.head_mass[j];
        im.head_suffix[j - 1] = static_cast<double>(suf);
    }
}

DiscretePmf DiscretePmf::power_log(double beta, double gamma) {
    if (!(beta > 1.0 + 1e-6) || !(beta <= 60.0)) throw DomainError("power_log: beta must lie in (1, 60]");
    if (!(std::abs(gamma) <= 60.0)) throw DomainError("power_log: |gamma| too large");
    auto im = std::make_shared<Impl>();
    im->family = Family::power_log;
    im->beta = beta;
    im->gamma = gamma;
    im->support_min = 1;
    im->dec_from = 1;
    if (gamma > 0.0)
        im->dec_from = std::max<long long>(
            1, static_cast<long long>(std::ceil(std::exp(gamma / beta) - kEm1)) + 1);
    build_power_log(*im);
    return DiscretePmf(std::move(im));
}

DiscretePmf DiscretePmf::borderline_power_log(double gamma) {
    if (!(gamma <= -1.0 - 1e-6) || !(gamma >= -60.0))
        throw DomainError("borderline_power_log: gamma must lie in [-60, -1)");
    auto im = std::make_shared<Impl>();
    im->family = Family::borderline_power_log;
    im->gamma = gamma;
    im->beta = 1.0;
    im->support_min = 1;
    im->dec_from = 1;
    build_power_log(*im);
    return DiscretePmf(std::move(im));
}

DiscretePmf DiscretePmf::finite_uniform(long long m) {
    if (m < 1 || m > (1LL << 40)) throw DomainError("finite_uniform: m must lie in [1, 2^40]");
    auto im = std::make_shared<Impl>();
    im->family = Family::finite_uniform;
    im->m = m;
    im->support_min = 1;
    im->dec_from = 1;
    return DiscretePmf(std::move(im));
}

DiscretePmf DiscretePmf::explicit_atoms(std::vector<std::pair<long long, double>> atoms) {
    std::vector<std::pair<long long, double>> kept;
    kept.reserve(atoms.size());
    for (auto& [a, w] : atoms) {
        if (a < 0) throw DomainError("explicit_atoms: atoms must be non-negative integers");
        if (w < 0.0 || !std::isfinite(w)) throw DomainError("explicit_atoms: masses must be finite and >= 0");
        if (w > 0.0) kept.emplace_back(a, w);
    }
    if (kept.empty()) throw DomainError("explicit_atoms: no positive mass");
    std::sort(kept.begin(), kept.end());
    for (std::size_t i = 1; i < kept.size(); ++i)
        if (kept[i].first == kept[i - 1].first) throw DomainError("explicit_atoms: duplicate atom");
    long double s = 0.0L;
    for (auto& [a, w] : kept) s += w;
    if (std::abs(static_cast<double>(s) - 1.0) > 1e-9)
        throw DomainError("explicit_atoms: masses must sum to 1 (within 1e-9)");
    auto im = std::make_shared<Impl>();
    im->family = Family::explicit_atoms;
    im->ex_atoms.reserve(kept.size());
    im->ex_mass.reserve(kept.size());
    long double run = 0.0L;
    for (auto& [a, w] : kept) {
        im->ex_atoms.push_back(a);
        im->ex_mass.push_back(static_cast<double>(w / s));
    }
    im->ex_cum.resize(kept.size());
    im->ex_suffix.resize(kept.size() + 1);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        run += im->ex_mass[i];
        im->ex_cum[i] = static_cast<double>(run);
    }
    im->ex_suffix[kept.size()] = 0.0;
    long double suf = 0.0L;
    for (std::size_t i = kept.size(); i-- > 0;) {
        suf += im->ex_mass[i];
        im->ex_suffix[i] = static_cast<double>(suf);
    }
    im->support_min = im->ex_atoms.front();
    im->dec_from = im->ex_atoms.back();
    return DiscretePmf(std::move(im));
}

// ---------------------------------------------------------------------------
// basic queries
// ---------------------------------------------------------------------------

Family DiscretePmf::family() const { return impl_->family; }

std::string DiscretePmf::family_name() const {
    switch (impl_->family) {
        case Family::geometric: return "geometric";
        case Family::poisson: return "poisson";
        case Family::power_log: return "power_log";
        case Family::borderline_power_log: return "borderline_power_log";
        case Family::finite_uniform: return "finite_uniform";
        case Family::explicit_atoms: return "explicit";
    }
    return "?";
}

std::string DiscretePmf::params_label() const {
    std::ostringstream os;
    switch (impl_->family) {
        case Family::geometric: os << "p=" << impl_->p; break;
        case Family::poisson: os << "lambda=" << impl_->lambda; break;
        case Family::power_log: os << "beta=" << impl_->beta << ";gamma=" << impl_->gamma; break;
        case Family::borderline_power_log: os << "gamma=" << impl_->gamma; break;
        case Family::finite_uniform: os << "m=" << impl_->m; break;
        case Family::explicit_atoms: os << "atoms=" << impl_->ex_atoms.size(); break;
    }
    return os.str();
}

DiscretePmf::FamilyParams DiscretePmf::params() const {
    FamilyParams fp;
    fp.p = impl_->p;
    fp.lambda = impl_->lambda;
    fp.beta = impl_->beta;
    fp.gamma = impl_->gamma;
    fp.norm_c = impl_->c;
    fp.m = impl_->family == Family::explicit_atoms
               ? static_cast<long long>(impl_->ex_atoms.size())
               : impl_->m;
    return fp;
}

bool DiscretePmf::finite_support() const {
    return impl_->family == Family::finite_uniform || impl_->family == Family::explicit_atoms;
}

long long DiscretePmf::support_min() const { return impl_->support_min; }

long long DiscretePmf::support_count() const {
    if (impl_->family == Family::finite_uniform) return impl_->m;
    if (impl_->family == Family::explicit_atoms) return static_cast<long long>(impl_->ex_atoms.size());
    return -1;
}

long long DiscretePmf::support_max() const {
    if (impl_->family == Family::finite_uniform) return impl_->m;
    if (impl_->family == Family::explicit_atoms) return impl_->ex_atoms.back();
    return -1;
}

long long DiscretePmf::decreasing_from() const { return impl_->dec_from; }

// ---------------------------------------------------------------------------
// pmf / interpolation / tails
// ---------------------------------------------------------------------------

double DiscretePmf::pmf(long long atom) const {
    const Impl& im = *impl_;
    switch (im.family) {
        case Family::geometric:
            if (atom < 1) throw OutOfSupport("geometric: atom < 1");
            return im.p * std::pow(1.0 - im.p, static_cast<double>(atom - 1));
        case Family::poisson:
            if (atom < 0) throw OutOfSupport("poisson: atom < 0");
            return poisson_pmf(im.lambda, atom);
        case Family::power_log:
        case Family::borderline_power_log: {
            if (atom < 1) throw OutOfSupport("power_log: atom < 1");
            if (atom <= im.head_n) return im.head_mass[atom - 1];
            double u = static_cast<double>(atom);
            return im.h_u(u);
        }
        case Family::finite_uniform:
            if (atom < 1 || atom > im.m) throw OutOfSupport("finite_uniform: atom outside [1, m]");
            return 1.0 / static_cast<double>(im.m);
        case Family::explicit_atoms: {
            auto it = std::lower_bound(im.ex_atoms.begin(), im.ex_atoms.end(), atom);
            if (it == im.ex_atoms.end() || *it != atom) throw OutOfSupport("explicit: atom not in support");
            return im.ex_mass[static_cast<std::size_t>(it - im.ex_atoms.begin())];
        }
    }
    throw DomainError("unreachable");
}

bool DiscretePmf::has_interpolation() const {
    switch (impl_->family) {
        case Family::geometric:
        case Family::poisson:
        case Family::power_log:
        case Family::borderline_power_log: return true;
        default: return false;
    }
}

double DiscretePmf::interpolated_pmf(double x) const {
    const Impl& im = *impl_;
    if (!has_interpolation()) throw NoInterpolation("no continuous interpolation for this family");
    if (!(x >= static_cast<double>(im.support_min))) throw OutOfSupport("interpolated_pmf: x below support");
    switch (im.family) {
        case Family::geometric:
            return im.p * std::pow(1.0 - im.p, x - 1.0);
        case Family::poisson: {
            double r = std::nearbyint(x);
            if (r == x && x < 9e15) return pmf(static_cast<long long>(r));
            return std::exp(-im.lambda + x * std::log(im.lambda) - std::lgamma(x + 1.0));
        }
        case Family::power_log:
        case Family::borderline_power_log: {
            double r = std::nearbyint(x);
            if (r == x && r >= 1.0 && r <= static_cast<double>(im.head_n))
                return im.head_mass[static_cast<long long>(r) - 1];
            return im.h_u(x);
        }
        default: break;
    }
    throw DomainError("unreachable");
}

double DiscretePmf::tail(double x) const {
    const Impl& im = *impl_;
    switch (im.family) {
        case Family::geometric: {
            if (x < 1.0) return 1.0;
            double m = std::floor(x);
            return std::pow(1.0 - im.p, m);
        }
        case Family::poisson: {
            if (x < 0.0) return 1.0;
            long long m = static_cast<long long>(std::floor(x));
            long double acc = 0.0L;
            long double q = poisson_pmf(im.lambda, m + 1);
            for (long long k = m + 1; k < m + 1 + 30000; ++k) {
                acc += q;
                q *= im.lambda / static_cast<long double>(k + 1);
                if (q < acc * 1e-19L + 1e-320L) break;
            }
            return static_cast<double>(acc);
        }
        case Family::power_log:
        case Family::borderline_power_log: {
            if (x < 1.0) return 1.0;
            if (x < static_cast<double>(im.head_n)) {
                long long idx = static_cast<long long>(std::floor(x)) - 1;
                return im.head_suffix[idx];
            }
            // analytic continuation; past 2^52 the integer grid is finer than
            // double resolution, so evaluate at x directly
            double at = x < 4.5e15 ? std::floor(x) + 1.0 : x;
            return im.tail_smooth_v(std::log(kEm1 + at));
        }
        case Family::finite_uniform: {
            if (x < 1.0) return 1.0;
            double m = std::floor(x);
            if (m >= static_cast<double>(im.m)) return 0.0;
            return (static_cast<double>(im.m) - m) / static_cast<double>(im.m);
        }
        case Family::explicit_atoms: {
            auto it = std::upper_bound(im.ex_atoms.begin(), im.ex_atoms.end(),
                                       static_cast<long long>(std::floor(x)));
            if (x < static_cast<double>(im.ex_atoms.front())) return 1.0;
            return im.ex_suffix[static_cast<std::size_t>(it - im.ex_atoms.begin())];
        }
    }
    throw DomainError("unreachable");
}

double DiscretePmf::integral_tail(double x) const {
    const Impl& im = *impl_;
    if (!has_interpolation()) throw NoInterpolation("no continuous interpolation for this family");
    switch (im.family) {
        case Family::geometric: {
            double lo = std::max(x, 1.0);
            double lq = std::log1p(-im.p);
            return im.p * std::exp((lo - 1.0) * lq) / (-lq);
        }
        case Family::poisson: {
            double lo = std::max(x, 0.0);
            auto f = [&](double u) {
                return std::exp(-im.lambda + u * std::log(im.lambda) - std::lgamma(u + 1.0));
            };
            double total = 0.0, v = lo, w = std::max(4.0, std::sqrt(im.lambda));
            for (int k = 0; k < 64; ++k) {
                double piece = integrate(f, v, v + w, 1e-12);
                total += piece;
                v += w;
                if (k > 1 && piece <= 1e-16 * total) break;
            }
            return total;
        }
        case Family::power_log:
        case Family::borderline_power_log: {
            double lo = std::max(x, 1.0);
            return im.c * std::exp(log_J_tail(im.gamma, im.beta_eff(), std::log(kEm1 + lo), 1e-12));
        }
        default: break;
    }
    throw DomainError("unreachable");
}

// ---------------------------------------------------------------------------
// sorted prefix
// ---------------------------------------------------------------------------

std::vector<std::pair<double, long long>> DiscretePmf::sorted_prefix(std::size_t k) const {
    const Impl& im = *impl_;
    if (k == 0) return {};
    std::vector<std::pair<double, long long>> items;
    if (finite_support()) {
        if (static_cast<long long>(k) > support_count())
            throw OutOfSupport("sorted_prefix: k exceeds the support size");
        if (im.family == Family::finite_uniform) {
            // all masses equal: ties resolve to the k smallest atoms
            items.reserve(k);
            for (long long a = 1; a <= static_cast<long long>(k); ++a)
                items.emplace_back(1.0 / static_cast<double>(im.m), a);
            return items;
        } else {
            items.reserve(im.ex_atoms.size());
            for (std::size_t i = 0; i < im.ex_atoms.size(); ++i)
                items.emplace_back(im.ex_mass[i], im.ex_atoms[i]);
        }
    } else {
        // masses are non-increasing past dec_from, so the k heaviest atoms lie
        // within the first (dec_from - support_min) + k + 1 atoms
        long long window = (im.dec_from - im.support_min) + static_cast<long long>(k) + 1;
        if (window > 8'000'000) throw TooLarge("sorted_prefix: window too large");
        items.reserve(window);
        for (long long j = 0; j < window; ++j) {
            long long atom = im.support_min + j;
            items.emplace_back(pmf(atom), atom);
        }
    }
    auto cmp = [](const std::pair<double, long long>& a, const std::pair<double, long long>& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    };
    std::size_t take = std::min(k, items.size());
    std::partial_sort(items.begin(), items.begin() + take, items.end(), cmp);
    items.resize(take);
    return items;
}

// ---------------------------------------------------------------------------
// series sums  S(a) = sum p_i/(p_i+a),  S2(a) = sum p_i/(p_i+a)^2
// ---------------------------------------------------------------------------

namespace {

SeriesSum sum_phi_enumerated(const DiscretePmf& d, double a, double tol, int pw) {
    SeriesSum out;
    long double acc = 0.0L;
    if (d.finite_support()) {
        const auto& im = d.impl();
        if (im.family == Family::finite_uniform) {
            double pi = 1.0 / static_cast<double>(im.m);
            double term = pw == 1 ? pi / (pi + a) : pi / sq(pi + a);
            out.value = static_cast<double>(im.m) * term;
            out.terms = im.m;
            return out;
        }
        for (double pi : im.ex_mass) {
            acc += pw == 1 ? pi / (pi + a) : pi / sq(pi + a);
            ++out.terms;
        }
        out.value = static_cast<double>(acc);
        out.bound = 0.0;
        return out;
    }
    double denom = pw == 1 ? a : a * a;
    long long atom = d.support_min();
    for (; atom < d.support_min() + (1LL << 22); ++atom) {
        double pi = d.pmf(atom);
        acc += pw == 1 ? pi / (pi + a) : pi / sq(pi + a);
        ++out.terms;
        if (atom >= d.decreasing_from()) {
            double rem = d.tail(static_cast<double>(atom)) / denom;
            if (rem <= tol * 0.5) {
                out.bound = rem;
                out.value = static_cast<double>(acc);
                return out;
            }
        }
    }
    out.bound = d.tail(static_cast<double>(atom - 1)) / denom;
    out.value = static_cast<double>(acc);
    return out;
}

// head cache + Euler-Maclaurin + alternating series for the power-log families
SeriesSum sum_phi_power_log(const DiscretePmf::Impl& im, double a, double tol, int pw) {
    SeriesSum out;
    long double head = 0.0L;
    for (long long j = 0; j < im.head_n; ++j) {
        double pi = im.head_mass[j];
        head += pw == 1 ? pi / (pi + a) : pi / sq(pi + a);
    }
    out.terms = im.head_n;

    double A = static_cast<double>(im.head_n + 1);
    double vA = std::log(kEm1 + A);

    // expansion point u* with h(u*) <= a/kappa, so successive series terms
    // contract by at least 1/2 (pw=1) or 2/3 (pw=2)
    double target = a / (pw == 1 ? 2.0 : 3.0);
    double v_star = vA;
    if (im.h_v(vA) > target) {
        double lo = vA, hi = vA + 1.0;
        int guard = 0;
        while (im.h_v(hi) > target) {
            lo = hi;
            hi = vA + (hi - vA) * 2.0;
            if (++guard > 120) throw SolverFailure("sum_phi: expansion point search failed");
        }
        for (int it = 0; it < 96; ++it) {
            double mid = 0.5 * (lo + hi);
            (im.h_v(mid) > target ? lo : hi) = mid;
        }
        v_star = hi;
    }

    // integral over [A, u*] where h is still comparable to a
    double part1 = 0.0;
    if (v_star > vA + 1e-14) {
        auto f = [&](double v) {
            double h = im.h_v(v);
            double base = pw == 1 ? h / (h + a) : h / sq(h + a);
            return base * std::exp(v);
        };
        double v = vA;
        while (v < v_star) {
            double vn = std::min(v + 0.5, v_star);
            part1 += integrate(f, v, vn, 1e-12);
            v = vn;
        }
    }

    // alternating series for \int_{u*}^inf of h/(h+a) (resp. h/(h+a)^2)
    double log_a = std::log(a);
    long double series = 0.0L;
    double bound_series = 0.0, term = 0.0;
    for (int k = 1; k <= 80; ++k) {
        double lj = log_J_tail(k * im.gamma, k * im.beta_eff(), v_star, 1e-12);
        double lt = k * (im.log_c - log_a) + lj;
        if (pw == 2) lt += std::log(static_cast<double>(k)) - log_a;
        term = std::exp(lt);
        series += (k % 2 ? 1.0 : -1.0) * term;
        ++out.terms;
        if (term < tol * 0.05 || term < 1e-17 * std::abs(static_cast<double>(series))) break;
    }
    bound_series = 3.0 * term;

    // Euler-Maclaurin corrections at the first non-enumerated atom
    auto phi_prime = [&](double u) {
        double h = im.h_u(u);
        double hp = h * im.dlogh_du(u);
        return pw == 1 ? a * hp / sq(h + a) : hp * (a - h) / cube(h + a);
    };
    double hA = im.h_u(A);
    double phiA = pw == 1 ? hA / (hA + a) : hA / sq(hA + a);
    double d3 = phi_prime(A + 1.0) + phi_prime(A - 1.0) - 2.0 * phi_prime(A);

    out.value = static_cast<double>(head + part1 + series) + 0.5 * phiA - phi_prime(A) / 12.0;
    out.bound = std::abs(d3) / 240.0 + bound_series + 1e-13 * std::abs(out.value);
    return out;
}

}  // namespace

SeriesSum DiscretePmf::sum_phi(double a, double tol) const {
    if (!(a > 0.0)) throw DomainError("sum_phi: a must be positive");
    if (impl_->family == Family::power_log || impl_->family == Family::borderline_power_log)
        return sum_phi_power_log(*impl_, a, tol, 1);
    return sum_phi_enumerated(*this, a, tol, 1);
}

SeriesSum DiscretePmf::sum_phi_sq(double a, double tol) const {
    if (!(a > 0.0)) throw DomainError("sum_phi_sq: a must be positive");
    if (impl_->family == Family::power_log || impl_->family == Family::borderline_power_log)
        return sum_phi_power_log(*impl_, a, tol, 2);
    return sum_phi_enumerated(*this, a, tol, 2);
}

// ---------------------------------------------------------------------------
// sampling
// ---------------------------------------------------------------------------

namespace {

// solve tail(x) = V past the cached head by bisection on the smooth tail
double deep_power_log_bisect(const DiscretePmf::Impl& im, double V) {
    double v_lo = std::log(kEm1 + static_cast<double>(im.head_n));
    double step = 1.0, v_hi = v_lo + step;
    int guard = 0;
    while (im.tail_smooth_v(v_hi) > V) {
        v_lo = v_hi;
        v_hi += (step *= 2.0);
        if (++guard > 90) break;
    }
    for (int it = 0; it < 90; ++it) {
        double mid = 0.5 * (v_lo + v_hi);
        (im.tail_smooth_v(mid) > V ? v_lo : v_hi) = mid;
        if (v_hi - v_lo <= 1e-12 * v_hi) break;
    }
    return v_hi;
}

// borderline deep tail: T(v) ~ c [ v^{g+1}/|g+1| + v^g e^{-v}((e-1)(1+g/v)+1/2) ],
// inverted by a seeded Newton iteration; O(1) per draw
double deep_borderline_newton(const DiscretePmf::Impl& im, double V) {
    double g1 = im.gamma + 1.0;  // < 0
    double v_lo = std::log(kEm1 + static_cast<double>(im.head_n));
    double v = std::exp(std::log(-g1 * V / im.c) / g1);
    v = std::max(v, v_lo);
    for (int it = 0; it < 8; ++it) {
        double ev = v < 700.0 ? std::exp(-v) : 0.0;
        double vg = std::pow(v, im.gamma);
        double T = im.c * (vg * v / (-g1) + vg * ev * (kEm1 * (1.0 + im.gamma / v) + 0.5));
        double dv = (T - V) / (im.c * vg);
        v = std::max(v + dv, v_lo);
        if (std::abs(dv) <= 1e-12 * v) break;
    }
    return v;
}

}  // namespace

double DiscretePmf::sample_one(Rng& rng) const {
    const Impl& im = *impl_;
    double u = rng.uniform();
    switch (im.family) {
        case Family::geometric: {
            double r = std::floor(std::log1p(-u) / std::log1p(-im.p));
            return 1.0 + std::max(0.0, r);
        }
        case Family::poisson: {
            if (u >= im.cdf_below_mode) {
                double acc = im.cdf_below_mode, q = im.mode_mass;
                long long k = im.mode;
                for (long long g = 0; g < 400000; ++g) {
                    if (u < acc + q) return static_cast<double>(k);
                    acc += q;
                    q *= im.lambda / static_cast<double>(k + 1);
                    ++k;
                    if (q < 1e-320) break;
                }
                return static_cast<double>(k);
            }
            double acc = im.cdf_below_mode;
            double q = im.mode_mass * static_cast<double>(im.mode) / im.lambda;
            for (long long k = im.mode - 1; k >= 0; --k) {
                if (u >= acc - q) return static_cast<double>(k);
                acc -= q;
                q *= static_cast<double>(k) / im.lambda;
            }
            return 0.0;
        }
        case Family::power_log:
        case Family::borderline_power_log: {
            double cum_back = im.head_cum.back();
            if (u < cum_back) {
                auto it = std::upper_bound(im.head_cum.begin(), im.head_cum.end(), u);
                return static_cast<double>(1 + (it - im.head_cum.begin()));
            }
            double V = 1.0 - u;
            double v = im.family == Family::borderline_power_log
                           ? deep_borderline_newton(im, V)
                           : deep_power_log_bisect(im, V);
            double val = deep_value_of_v(v, im.head_n + 1);
            return std::max(val, static_cast<double>(im.head_n + 1));
        }
        case Family::finite_uniform: {
            double k = std::floor(u * static_cast<double>(im.m));
            return 1.0 + std::min(k, static_cast<double>(im.m - 1));
        }
        case Family::explicit_atoms: {
            auto it = std::upper_bound(im.ex_cum.begin(), im.ex_cum.end(), u);
            std::size_t idx = std::min(static_cast<std::size_t>(it - im.ex_cum.begin()),
                                       im.ex_atoms.size() - 1);
            return static_cast<double>(im.ex_atoms[idx]);
        }
    }
    throw DomainError("unreachable");
}

std::vector<double> DiscretePmf::sample(std::size_t n, std::uint64_t seed) const {
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(rng));
    return out;
}

long long DiscretePmf::tail_cutoff(double bound, long long cap) const {
    long long lo = support_min() - 1;  // tail(lo) is the full mass
    long long hi = finite_support() ? support_max() : cap;
    if (hi <= lo) return hi;
    if (tail(static_cast<double>(hi)) > bound) return hi;
    if (tail(static_cast<double>(lo)) <= bound) return lo + 1 <= hi ? lo + 1 : hi;
    while (hi - lo > 1) {
        long long mid = lo + (hi - lo) / 2;
        (tail(static_cast<double>(mid)) > bound ? lo : hi) = mid;
    }
    return hi;
}

// ---------------------------------------------------------------------------
// MixedDistribution
// ---------------------------------------------------------------------------

MixedDistribution::MixedDistribution(double rho1, std::optional<DiscretePmf> discrete,
                                     double lo, double hi)
    : rho1_(rho1), discrete_(std::move(discrete)), lo_(lo), hi_(hi) {
    if (!(rho1 >= 0.0) || !(rho1 <= 1.0)) throw DomainError("mixed: rho1 must lie in [0,1]");
    if (rho1 < 1.0 && !discrete_) throw DomainError("mixed: discrete part required when rho1 < 1");
    if (rho1 > 0.0) {
        if (!(lo_ < hi_)) throw DomainError("mixed: uniform interval is empty");
        double k = std::floor(lo_) + 1.0;  // smallest integer > lo unless lo is integral
        if (lo_ == std::floor(lo_)) k = lo_ + 1.0;
        if (k < hi_) throw DomainError("mixed: open uniform interval must contain no integer");
    }
}

std::string MixedDistribution::params_label() const {
    std::ostringstream os;
    os << "rho1=" << rho1_ << ";uniform=(" << lo_ << "," << hi_ << ")";
    if (discrete_) os << ";discrete=" << discrete_->family_name() << "(" << discrete_->params_label() << ")";
    return os.str();
}

double MixedDistribution::sample_one(Rng& rng) const {
    double u = rng.uniform();
    if (u < rho1_) {
        // open-interval uniform so endpoints (possible atoms) are never hit
        double v = static_cast<double>(rng.next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
        return lo_ + (hi_ - lo_) * v;
    }
    return discrete_->sample_one(rng);
}

std::vector<double> MixedDistribution::sample(std::size_t n, std::uint64_t seed) const {
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(rng));
    return out;
}

std::string any_family_name(const AnyDistribution& d) {
    if (const auto* p = std::get_if<DiscretePmf>(&d)) return p->family_name();
    return "mixed";
}

std::string any_params_label(const AnyDistribution& d) {
    return std::visit([](const auto& v) { return v.params_label(); }, d);
}

double any_sample_one(const AnyDistribution& d, Rng& rng) {
    return std::visit([&](const auto& v) { return v.sample_one(rng); }, d);
}

}  // namespace lislab
