#include "lislab/hammersley.hpp"

#include <algorithm>
#include <cmath>

#include "lislab/lis.hpp"

namespace lislab {
namespace {

// mode-anchored inversion walk; mean kept moderate by callers
long long poisson_count(double mean, Rng& rng) {
    if (!(mean >= 0.0)) throw DomainError("poisson_count: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean > 8e6) throw TooLarge("poisson_count: mean too large");
    long long mode = static_cast<long long>(std::floor(mean));
    long double acc = 0.0L, q = std::exp(static_cast<long double>(-mean));
    for (long long i = 0; i < mode; ++i) {
        acc += q;
        q *= mean / static_cast<long double>(i + 1);
    }
    double below = static_cast<double>(acc), pm = static_cast<double>(q);
    double u = rng.uniform();
    if (u >= below) {
        double run = below, w = pm;
        long long k = mode;
        for (long long g = 0; g < 2000000; ++g) {
            if (u < run + w) return k;
            run += w;
            w *= mean / static_cast<double>(k + 1);
            ++k;
            if (w < 1e-320) break;
        }
        return k;
    }
    double run = below, w = pm * static_cast<double>(mode) / mean;
    for (long long k = mode - 1; k >= 0; --k) {
        if (u >= run - w) return k;
        run -= w;
        w *= static_cast<double>(k) / mean;
    }
    return 0;
}

std::vector<double> uniform_points(double t, long long n, Rng& rng) {
    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) xs.push_back(t * rng.uniform());
    std::sort(xs.begin(), xs.end());
    return xs;
}

double pmf_or_zero(const DiscretePmf& d, long long atom) {
    try {
        return d.pmf(atom);
    } catch (const OutOfSupport&) {
        return 0.0;  // gap in an explicit support
    }
}

}  // namespace

std::size_t PoissonField::total_points() const {
    std::size_t n = 0;
    for (const auto& [row, xs] : rows) n += xs.size();
    return n;
}

std::vector<std::pair<double, double>> PoissonField::planar_points() const {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(total_points());
    for (const auto& [row, xs] : rows)
        for (double x : xs) pts.emplace_back(x, row);
    return pts;
}

PoissonField sample_field(const DiscretePmf& d, double t, Rng& rng, FieldMode mode) {
    if (!(t > 0.0)) throw DomainError("sample_field: t must be positive");
    if (t > 4e6) throw TooLarge("sample_field: t too large for an explicit field");
    PoissonField field;
    field.t = t;
    if (mode == FieldMode::superposition) {
        long long n = poisson_count(t, rng);
        std::vector<std::pair<double, double>> marked;  // (row, x)
        marked.reserve(static_cast<std::size_t>(n));
        for (long long i = 0; i < n; ++i) {
            double x = t * rng.uniform();
            double y = d.sample_one(rng);
            marked.emplace_back(y, x);
        }
        std::sort(marked.begin(), marked.end());
        for (std::size_t i = 0; i < marked.size();) {
            std::size_t j = i;
            while (j < marked.size() && marked[j].first == marked[i].first) ++j;
            std::vector<double> xs;
            xs.reserve(j - i);
            for (std::size_t k = i; k < j; ++k) xs.push_back(marked[k].second);
            field.rows.emplace_back(marked[i].first, std::move(xs));
            i = j;
        }
    } else {
        long long cutoff = d.tail_cutoff(1e-6 / t, 1LL << 22);
        field.omitted_mass = t * d.tail(static_cast<double>(cutoff));
        for (long long a = d.support_min(); a <= cutoff; ++a) {
            double pa = pmf_or_zero(d, a);
            if (pa <= 0.0) continue;
            long long n = poisson_count(t * pa, rng);
            if (n == 0) continue;
            field.rows.emplace_back(static_cast<double>(a), uniform_points(t, n, rng));
        }
    }
    field.max_row = field.rows.empty() ? -1.0 : field.rows.back().first;
    return field;
}

RowStep evolve_row(const std::vector<double>& particles, const std::vector<double>& points) {
    RowStep out;
    out.particles.reserve(particles.size() + 1);
    std::size_t j = 0;
    for (double x : particles) {
        if (j < points.size() && points[j] <= x) {
            out.particles.push_back(points[j]);
            while (j < points.size() && points[j] <= x) ++j;  // x consumes all points it passes
        } else {
            out.particles.push_back(x);
        }
    }
    if (j < points.size()) {  // leftover point beyond every particle
        out.particles.push_back(points[j]);
        out.created = true;
    }
    return out;
}

long long run_plain(const PoissonField& field) {
    std::vector<double> h;
    for (const auto& [row, xs] : field.rows) h = evolve_row(h, xs).particles;
    return static_cast<long long>(h.size());
}

CouplingOutcome run_coupled(const DiscretePmf& d, double t, double alpha, std::uint64_t seed,
                            int head_rows) {
    if (!(alpha > 0.0)) throw DomainError("run_coupled: alpha must be positive");
    CouplingOutcome out;
    out.seed = seed;
    Rng rng(seed);

    PoissonField field = sample_field(d, t, rng, FieldMode::superposition);
    out.lis = lis_planar(field.planar_points());

    long long ns = poisson_count(alpha * t, rng);
    std::vector<double> h = uniform_points(t, ns, rng);

    out.sink_cutoff = d.tail_cutoff(1e-3 * alpha, 1LL << 21);
    out.sink_truncation = d.tail(static_cast<double>(out.sink_cutoff)) / alpha;

    long long smin = d.support_min();
    long long i_cut = out.sink_cutoff;
    if (field.max_row >= 0.0) {
        if (field.max_row > 9e15) throw TooLarge("run_coupled: field row beyond integer range");
        i_cut = std::max(i_cut, static_cast<long long>(field.max_row));
    }
    if (d.finite_support()) i_cut = std::min(i_cut, d.support_max());

    std::size_t row_idx = 0;
    std::vector<double> merged;
    for (long long a = smin; a <= i_cut; ++a) {
        double pa = pmf_or_zero(d, a);
        bool sink = rng.uniform() < pa / (pa + alpha);
        const std::vector<double>* xs = nullptr;
        if (row_idx < field.rows.size() &&
            field.rows[row_idx].first == static_cast<double>(a)) {
            xs = &field.rows[row_idx].second;
            ++row_idx;
        }
        merged.clear();
        if (sink) merged.push_back(0.0);
        if (xs) merged.insert(merged.end(), xs->begin(), xs->end());

        RowStep st = evolve_row(h, merged);
        h = std::move(st.particles);
        if (sink && !h.empty() && h.front() == 0.0) h.erase(h.begin());

        out.sum_sinks += sink ? 1 : 0;
        out.sum_creations += st.created ? 1 : 0;
        ++out.rows_processed;
        if (static_cast<long long>(out.sink_head.size()) < head_rows) {
            out.sink_head.push_back(sink ? 1 : 0);
            out.creation_head.push_back(st.created ? 1 : 0);
        }
    }
    out.h_count = static_cast<long long>(h.size());
    return out;
}

BurkeStep burke_row(double rho, double alpha, double t, Rng& rng) {
    if (!(rho > 0.0) || !(alpha > 0.0) || !(t > 0.0))
        throw DomainError("burke_row: rho, alpha, t must be positive");
    BurkeStep out;
    std::vector<double> h = uniform_points(t, poisson_count(alpha * t, rng), rng);
    out.sink = rng.uniform() < rho / (rho + alpha);
    std::vector<double> pts = uniform_points(t, poisson_count(rho * t, rng), rng);
    if (out.sink) pts.insert(pts.begin(), 0.0);
    RowStep st = evolve_row(h, pts);
    out.next_particles = std::move(st.particles);
    out.creation = st.created;
    if (out.sink && !out.next_particles.empty() && out.next_particles.front() == 0.0)
        out.next_particles.erase(out.next_particles.begin());
    return out;
}

Trajectory run_trajectory(const DiscretePmf& d, double t, double alpha, std::uint64_t seed) {
    Trajectory tr;
    tr.t = t;
    tr.alpha = alpha;
    Rng rng(seed);
    tr.field = sample_field(d, t, rng, FieldMode::superposition);
    tr.lis = lis_planar(tr.field.planar_points());

    bool coupled = alpha > 0.0;
    long long smin = d.support_min();
    long long i_cut;
    if (coupled) {
        long long ns = poisson_count(alpha * t, rng);
        tr.sources = uniform_points(t, ns, rng);
        i_cut = d.tail_cutoff(1e-3 * alpha, 1LL << 21);
    } else {
        i_cut = smin - 1;
    }
    if (tr.field.max_row >= 0.0) {
        if (tr.field.max_row > 9e15) throw TooLarge("run_trajectory: field row beyond integer range");
        i_cut = std::max(i_cut, static_cast<long long>(tr.field.max_row));
    }
    if (d.finite_support()) i_cut = std::min(i_cut, d.support_max());
    if (i_cut - smin > 4096) throw TooLarge("run_trajectory: too many rows to record");

    std::vector<double> h = tr.sources;
    std::size_t row_idx = 0;
    std::vector<double> merged;
    for (long long a = smin; a <= i_cut; ++a) {
        double pa = pmf_or_zero(d, a);
        bool sink = coupled && rng.uniform() < pa / (pa + alpha);
        const std::vector<double>* xs = nullptr;
        if (row_idx < tr.field.rows.size() &&
            tr.field.rows[row_idx].first == static_cast<double>(a)) {
            xs = &tr.field.rows[row_idx].second;
            ++row_idx;
        }
        merged.clear();
        if (sink) merged.push_back(0.0);
        if (xs) merged.insert(merged.end(), xs->begin(), xs->end());
        RowStep st = evolve_row(h, merged);
        h = std::move(st.particles);
        bool absorbed = false;
        if (sink && !h.empty() && h.front() == 0.0) {
            h.erase(h.begin());
            absorbed = true;
        }
        if (sink) tr.sink_rows.push_back(a);
        if (st.created) tr.creation_rows.push_back(a);
        if (absorbed) tr.absorbed_rows.push_back(a);
        tr.states.emplace_back(a, h);
    }
    tr.h_count = static_cast<long long>(h.size());
    return tr;
}

}  // namespace lislab
