#include "lislab/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "lislab/hammersley.hpp"
#include "lislab/json_io.hpp"
#include "lislab/lis.hpp"
#include "lislab/variational.hpp"

namespace lislab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Grid values enter the seed hash by bit pattern: stable, and fractional t
// values stay distinguishable.
std::uint64_t grid_key(double n) { return std::bit_cast<std::uint64_t>(n); }

void parallel_for(long long count, int jobs, const std::function<void(long long)>& body) {
    if (count <= 0) return;
    int workers = static_cast<int>(std::min<long long>(std::max(jobs, 1), count));
    if (workers == 1) {
        for (long long i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<long long> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&errors, &next, &body, count, w] {
            try {
                for (;;) {
                    long long i = next.fetch_add(1, std::memory_order_relaxed);
                    if (i >= count) break;
                    body(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct Moments {
    long long count = 0;
    double mean = kNaN, var = kNaN, se_mean = kNaN, se_var = kNaN;
};

// Accumulates in index order with long double so the result does not depend
// on how replicates were sharded.
Moments moments_of(const std::vector<double>& xs) {
    Moments m;
    m.count = static_cast<long long>(xs.size());
    if (xs.empty()) return m;
    long double s = 0;
    for (double x : xs) s += x;
    long double mean = s / static_cast<long double>(xs.size());
    m.mean = static_cast<double>(mean);
    if (xs.size() < 2) return m;
    long double s2 = 0, s4 = 0;
    for (double x : xs) {
        long double d = x - mean;
        long double d2 = d * d;
        s2 += d2;
        s4 += d2 * d2;
    }
    long double R = static_cast<long double>(xs.size());
    long double var = s2 / (R - 1);
    m.var = static_cast<double>(var);
    m.se_mean = std::sqrt(static_cast<double>(var / R));
    long double m4 = s4 / R;
    long double vv = (m4 - var * var * (R - 3) / (R - 1)) / R;  // Var(s^2) to O(1/R^2)
    m.se_var = vv > 0 ? std::sqrt(static_cast<double>(vv)) : 0.0;
    return m;
}

double quantile_of(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return kNaN;
    long long idx = std::llround(q * static_cast<double>(sorted.size() - 1));
    idx = std::clamp<long long>(idx, 0, static_cast<long long>(sorted.size()) - 1);
    return sorted[static_cast<std::size_t>(idx)];
}

std::string fmt_plain(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

Sidecars solve_sidecars(const AnyDistribution& dist, double n) {
    Sidecars sc;
    sc.f = sc.w = sc.mu = sc.nu = sc.asymptotic = kNaN;
    const auto* d = std::get_if<DiscretePmf>(&dist);
    if (!d) return sc;
    try {
        sc.f = solve_f(*d, n).value;
    } catch (const Error&) {
    }
    try {
        sc.w = solve_w(*d, n).value;
    } catch (const Error&) {
    }
    if (n >= 1) {
        try {
            sc.r = solve_r(*d, n);
        } catch (const Error&) {
        }
    }
    try {
        sc.mu = solve_mu(*d, n).value;
    } catch (const Error&) {
    }
    try {
        sc.nu = solve_nu(*d, n).value;
    } catch (const Error&) {
    }
    try {
        sc.asymptotic = asymptotic_prediction(*d, n);
    } catch (const Error&) {
    }
    return sc;
}

struct SampleBatch {
    std::vector<double> lis, greedy, distinct;
};

// greedy_targets: ascending atom values for greedy_scan, or nullptr to skip
// the greedy statistic (mixed families have no atom list).
SampleBatch run_sample_cell(const AnyDistribution& dist, double n, long long replicates,
                            std::uint64_t master, int jobs,
                            const std::vector<double>* greedy_targets, bool want_distinct) {
    long long nn = std::llround(n);
    if (nn < 1 || std::fabs(n - static_cast<double>(nn)) > 1e-9)
        throw DomainError("sample size must be a positive integer, got " + fmt_plain(n));
    SampleBatch out;
    out.lis.assign(static_cast<std::size_t>(replicates), 0);
    if (greedy_targets) out.greedy.assign(static_cast<std::size_t>(replicates), 0);
    if (want_distinct) out.distinct.assign(static_cast<std::size_t>(replicates), 0);
    parallel_for(replicates, jobs, [&](long long r) {
        thread_local std::vector<double> buf;
        buf.clear();
        buf.reserve(static_cast<std::size_t>(nn));
        Rng rng(derive_seed(master, grid_key(n), static_cast<std::uint64_t>(r)));
        if (const auto* pd = std::get_if<DiscretePmf>(&dist)) {
            for (long long i = 0; i < nn; ++i) buf.push_back(pd->sample_one(rng));
        } else {
            const auto& md = std::get<MixedDistribution>(dist);
            for (long long i = 0; i < nn; ++i) buf.push_back(md.sample_one(rng));
        }
        auto ri = static_cast<std::size_t>(r);
        out.lis[ri] = static_cast<double>(lis_strict(buf));
        if (greedy_targets)
            out.greedy[ri] = static_cast<double>(greedy_scan(buf, *greedy_targets));
        if (want_distinct) out.distinct[ri] = static_cast<double>(distinct_count(buf));
    });
    return out;
}

std::vector<CouplingOutcome> run_coupling_cell(const DiscretePmf& d, double t, double alpha,
                                               long long replicates, std::uint64_t master,
                                               int jobs, int head_rows) {
    std::vector<CouplingOutcome> outs(static_cast<std::size_t>(replicates));
    parallel_for(replicates, jobs, [&](long long r) {
        outs[static_cast<std::size_t>(r)] =
            run_coupled(d, t, alpha, derive_seed(master, grid_key(t), static_cast<std::uint64_t>(r)),
                        head_rows);
    });
    return outs;
}

bool coupling_violated(const CouplingOutcome& o) {
    return o.lis < o.lower() ||
           static_cast<double>(o.lis) > static_cast<double>(o.upper()) + o.sink_truncation;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.replicates < 1) throw DomainError("replicates must be >= 1");
    if (spec.n_grid.empty()) throw DomainError("n_grid must be non-empty");
    for (std::size_t i = 0; i < spec.n_grid.size(); ++i) {
        if (!std::isfinite(spec.n_grid[i]) || !(spec.n_grid[i] > 0))
            throw DomainError("grid values must be positive and finite");
        if (i > 0 && !(spec.n_grid[i] > spec.n_grid[i - 1]))
            throw DomainError("n_grid must be strictly ascending");
    }

    ExperimentResult res;
    res.family = any_family_name(spec.dist);
    res.params = any_params_label(spec.dist);
    const long long R = spec.replicates;
    const ExperimentStats& st = spec.stats;

    for (double n : spec.n_grid) {
        Sidecars sc = solve_sidecars(spec.dist, n);
        res.sidecars[n] = sc;
        auto cell = [&](const std::string& stat, double est, double se = kNaN,
                        long long viol = -1) {
            res.cells.push_back(StatCell{n, R, stat, est, se, viol});
        };

        if (st.coupling_alpha) {
            const auto* d = std::get_if<DiscretePmf>(&spec.dist);
            if (!d) throw DomainError("coupling requires a discrete distribution");
            double alpha = *st.coupling_alpha;
            if (!(alpha > 0)) throw DomainError("coupling alpha must be positive");
            auto outs = run_coupling_cell(*d, n, alpha, R, spec.master_seed, spec.jobs, 10);
            std::vector<double> ls(outs.size()), us(outs.size()), os_(outs.size()),
                hs(outs.size()), tr(outs.size());
            long long viol = 0;
            for (std::size_t r = 0; r < outs.size(); ++r) {
                const CouplingOutcome& o = outs[r];
                ls[r] = static_cast<double>(o.lis);
                us[r] = static_cast<double>(o.upper());
                os_[r] = static_cast<double>(o.lower());
                hs[r] = static_cast<double>(o.h_count);
                tr[r] = o.sink_truncation;
                if (coupling_violated(o)) ++viol;
            }
            cell("coupling_violations", static_cast<double>(viol), kNaN, viol);
            Moments ml = moments_of(ls);
            cell("lis_mean", ml.mean, ml.se_mean);
            Moments mup = moments_of(us);
            cell("upper_mean", mup.mean, mup.se_mean);
            Moments mlo = moments_of(os_);
            cell("lower_mean", mlo.mean, mlo.se_mean);
            Moments mh = moments_of(hs);
            cell("h_count_mean", mh.mean, mh.se_mean);
            Moments mt = moments_of(tr);
            cell("sink_truncation_mean", mt.mean);
            std::size_t head = outs.empty() ? 0 : outs[0].sink_head.size();
            for (const auto& o : outs) head = std::min(head, o.sink_head.size());
            long long smin = d->support_min();
            for (std::size_t j = 0; j < head; ++j) {
                long double ssum = 0, csum = 0;
                for (const auto& o : outs) {
                    ssum += o.sink_head[j];
                    csum += o.creation_head[j];
                }
                double fs = static_cast<double>(ssum / static_cast<long double>(R));
                double fc = static_cast<double>(csum / static_cast<long double>(R));
                double Rd = static_cast<double>(R);
                std::string row = std::to_string(smin + static_cast<long long>(j));
                cell("sink_freq(row=" + row + ")", fs,
                     std::sqrt(std::max(0.0, fs * (1 - fs) / Rd)));
                cell("creation_freq(row=" + row + ")", fc,
                     std::sqrt(std::max(0.0, fc * (1 - fc) / Rd)));
            }
            continue;
        }

        // The greedy statistic targets the heaviest r_n atoms in increasing
        // order, so counts can never exceed r_n.
        std::vector<double> targets;
        bool greedy_on = false;
        if (st.greedy) {
            const auto* pd = std::get_if<DiscretePmf>(&spec.dist);
            if (pd && sc.r >= 0) {
                for (const auto& [mass, atom] : pd->sorted_prefix(sc.r))
                    targets.push_back(static_cast<double>(atom));
                std::sort(targets.begin(), targets.end());
                greedy_on = true;
            }
        }
        SampleBatch b = run_sample_cell(spec.dist, n, R, spec.master_seed, spec.jobs,
                                        greedy_on ? &targets : nullptr, st.distinct);
        Moments m = moments_of(b.lis);
        if (st.mean) cell("mean", m.mean, m.se_mean);
        if (st.variance) cell("variance", m.var, m.se_var);
        if (st.quantiles) {
            std::vector<double> s = b.lis;
            std::sort(s.begin(), s.end());
            const std::pair<double, const char*> qs[] = {
                {0.05, "q05"}, {0.25, "q25"}, {0.50, "q50"}, {0.75, "q75"}, {0.95, "q95"}};
            for (const auto& [q, name] : qs) cell(name, quantile_of(s, q));
        }
        if (st.ratios) {
            if (std::isfinite(sc.f) && sc.f > 0)
                cell("mean_over_f", m.mean / sc.f, m.se_mean / sc.f);
            if (std::isfinite(sc.w) && sc.w > 0)
                cell("mean_over_w", m.mean / sc.w, m.se_mean / sc.w);
            if (sc.r >= 1) {
                double rd = static_cast<double>(sc.r);
                cell("mean_over_r", m.mean / rd, m.se_mean / rd);
            }
            if (std::isfinite(sc.asymptotic) && sc.asymptotic > 0)
                cell("mean_over_asymptotic", m.mean / sc.asymptotic, m.se_mean / sc.asymptotic);
            if (const auto* mx = std::get_if<MixedDistribution>(&spec.dist)) {
                double denom = 2 * std::sqrt(n);
                cell("mean_over_2sqrt_n", m.mean / denom, m.se_mean / denom);
                cell("mixed_target", std::sqrt(mx->rho1()));
            }
        }
        if (greedy_on) {
            Moments mg = moments_of(b.greedy);
            long long gv = 0;
            for (double g : b.greedy)
                if (g > static_cast<double>(sc.r)) ++gv;
            cell("greedy_mean", mg.mean, mg.se_mean, gv);
            if (sc.r >= 1) {
                double rd = static_cast<double>(sc.r);
                cell("greedy_over_r", mg.mean / rd, mg.se_mean / rd);
            }
        }
        if (st.distinct) {
            Moments mk = moments_of(b.distinct);
            long long cv = 0;
            for (std::size_t r = 0; r < b.lis.size(); ++r) {
                bool ok = b.lis[r] <= b.distinct[r];
                if (greedy_on) ok = ok && b.greedy[r] <= b.lis[r];
                if (!ok) ++cv;
            }
            cell("distinct_mean", mk.mean, mk.se_mean, cv);
        }
        if (st.tail_eps) {
            double eps = *st.tail_eps;
            if (!(eps > 0 && eps < 1)) throw DomainError("tail eps must lie in (0,1)");
            if (std::isfinite(sc.w) && sc.w > 0) {
                double thr = (1 - eps) * sc.w;
                long long hits = 0;
                for (double l : b.lis)
                    if (l <= thr) ++hits;
                double freq = static_cast<double>(hits) / static_cast<double>(R);
                double se = std::sqrt(std::max(0.0, freq * (1 - freq) / static_cast<double>(R)));
                double bound = 3 * std::exp(-eps * eps * (1 - eps) * sc.w / 40.0);
                std::string tag = "(eps=" + fmt_plain(eps) + ")";
                cell("tail_freq" + tag, freq, se, hits);
                cell("tail_bound" + tag, bound);
            }
        }
    }
    return res;
}

ExperimentResult estimate_lis(const AnyDistribution& d, const std::vector<double>& n_grid,
                              long long replicates, std::uint64_t master_seed, int jobs) {
    ExperimentSpec spec{.dist = d};
    spec.n_grid = n_grid;
    spec.replicates = replicates;
    spec.master_seed = master_seed;
    spec.jobs = jobs;
    spec.stats.mean = spec.stats.variance = spec.stats.ratios = true;
    return run_experiment(spec);
}

VarianceCheck variance_check(const AnyDistribution& d, double n, long long replicates,
                             std::uint64_t master_seed, int jobs) {
    ExperimentSpec spec{.dist = d};
    spec.n_grid = {n};
    spec.replicates = replicates;
    spec.master_seed = master_seed;
    spec.jobs = jobs;
    spec.stats.mean = spec.stats.variance = true;
    ExperimentResult res = run_experiment(spec);
    VarianceCheck out;
    out.n = n;
    for (const StatCell& c : res.cells) {
        if (c.stat == "mean") out.mean_hat = c.estimate;
        if (c.stat == "variance") {
            out.var_hat = c.estimate;
            out.se_var = c.stderr_est;
        }
    }
    out.pass = out.var_hat <= out.mean_hat + 3 * out.se_var;
    return out;
}

TailCheck tail_check(const DiscretePmf& d, double n, long long replicates, double eps,
                     std::uint64_t master_seed, int jobs) {
    ExperimentSpec spec{.dist = d};
    spec.n_grid = {n};
    spec.replicates = replicates;
    spec.master_seed = master_seed;
    spec.jobs = jobs;
    spec.stats.mean = true;
    spec.stats.tail_eps = eps;
    ExperimentResult res = run_experiment(spec);
    TailCheck out;
    out.n = n;
    out.eps = eps;
    bool have = false;
    for (const StatCell& c : res.cells) {
        if (c.stat.rfind("tail_freq", 0) == 0) {
            out.freq = c.estimate;
            out.se = c.stderr_est;
            have = true;
        }
        if (c.stat.rfind("tail_bound", 0) == 0) out.bound = c.estimate;
    }
    if (!have) {
        out.pass = true;
        out.note = "w unavailable; check skipped";
        return out;
    }
    out.pass = out.freq <= out.bound + 3 * out.se;
    const Sidecars& sc = res.sidecars.at(n);
    if (d.finite_support() && std::isfinite(sc.w) &&
        sc.w >= 0.95 * static_cast<double>(d.support_count()))
        out.note = "finite support: w saturates at the atom count; bound is vacuous";
    return out;
}

std::vector<MixedLimitCell> mixed_limit(const MixedDistribution& d,
                                        const std::vector<double>& n_grid, long long replicates,
                                        std::uint64_t master_seed, int jobs) {
    ExperimentSpec spec{.dist = d};
    spec.n_grid = n_grid;
    spec.replicates = replicates;
    spec.master_seed = master_seed;
    spec.jobs = jobs;
    spec.stats.mean = spec.stats.ratios = true;
    ExperimentResult res = run_experiment(spec);
    std::vector<MixedLimitCell> out;
    for (double n : n_grid) {
        MixedLimitCell c;
        c.n = n;
        c.target = std::sqrt(d.rho1());
        for (const StatCell& cellv : res.cells)
            if (cellv.n == n && cellv.stat == "mean_over_2sqrt_n") {
                c.ratio = cellv.estimate;
                c.se = cellv.stderr_est;
            }
        out.push_back(c);
    }
    return out;
}

std::vector<GreedyRow> greedy_vs_lis(const AnyDistribution& d, const std::vector<double>& n_grid,
                                     long long replicates, std::uint64_t master_seed, int jobs) {
    ExperimentSpec spec{.dist = d};
    spec.n_grid = n_grid;
    spec.replicates = replicates;
    spec.master_seed = master_seed;
    spec.jobs = jobs;
    spec.stats.mean = spec.stats.greedy = spec.stats.distinct = true;
    ExperimentResult res = run_experiment(spec);
    std::vector<GreedyRow> out;
    for (double n : n_grid) {
        GreedyRow row;
        row.n = n;
        row.r = res.sidecars.at(n).r;
        for (const StatCell& c : res.cells) {
            if (c.n != n) continue;
            if (c.stat == "mean") row.lis_mean = c.estimate;
            if (c.stat == "greedy_mean") {
                row.greedy_mean = c.estimate;
                row.greedy_gt_r = c.violations;
            }
            if (c.stat == "distinct_mean") row.chain_violations = c.violations;
        }
        out.push_back(row);
    }
    return out;
}

CouplingReport coupling_study(const DiscretePmf& d, const std::vector<double>& t_grid,
                              const std::vector<double>& alpha_grid, long long replicates,
                              std::uint64_t master_seed, int jobs, int head_rows) {
    if (replicates < 1) throw DomainError("replicates must be >= 1");
    if (t_grid.empty() || alpha_grid.empty()) throw DomainError("grids must be non-empty");
    for (double t : t_grid)
        if (!std::isfinite(t) || !(t > 0)) throw DomainError("t must be positive");
    for (double a : alpha_grid)
        if (!std::isfinite(a) || !(a > 0)) throw DomainError("alpha must be positive");
    CouplingReport rep;
    for (double alpha : alpha_grid) {
        std::uint64_t amaster = splitmix64(master_seed ^ grid_key(alpha));
        for (double t : t_grid) {
            auto outs = run_coupling_cell(d, t, alpha, replicates, amaster, jobs, head_rows);
            CouplingCell cellv;
            cellv.t = t;
            cellv.alpha = alpha;
            cellv.replicates = replicates;
            long double sl = 0, su = 0, so = 0, sh = 0, str = 0;
            for (std::size_t r = 0; r < outs.size(); ++r) {
                const CouplingOutcome& o = outs[r];
                sl += o.lis;
                su += o.upper();
                so += o.lower();
                sh += o.h_count;
                str += o.sink_truncation;
                if (coupling_violated(o)) {
                    ++cellv.violations;
                    rep.violations.push_back(CouplingViolation{t, alpha,
                                                               static_cast<long long>(r), o.seed,
                                                               o.lis, o.lower(), o.upper(),
                                                               o.sink_truncation});
                }
            }
            long double Rd = static_cast<long double>(replicates);
            cellv.lis_mean = static_cast<double>(sl / Rd);
            cellv.upper_mean = static_cast<double>(su / Rd);
            cellv.lower_mean = static_cast<double>(so / Rd);
            cellv.h_count_mean = static_cast<double>(sh / Rd);
            cellv.truncation_mean = static_cast<double>(str / Rd);
            rep.cells.push_back(cellv);
        }
    }
    return rep;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

std::string csv_num(double v) { return std::isfinite(v) ? fmt_sci(v) : std::string(); }

// Grid values are printed as plain integers when they are integers.
std::string grid_label(double n) {
    double r = std::nearbyint(n);
    if (std::fabs(n - r) < 1e-9 && std::fabs(n) < 9e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(r));
        return buf;
    }
    return fmt_sci(n);
}

}  // namespace

std::string to_csv(const ExperimentResult& r) {
    std::ostringstream os;
    os << "family,params,n,replicates,stat,estimate,stderr,sidecar_f,sidecar_w,sidecar_r,"
          "sidecar_mu,sidecar_nu,asymptotic,violations\n";
    for (const StatCell& c : r.cells) {
        const Sidecars& sc = r.sidecars.at(c.n);
        os << csv_field(r.family) << ',' << csv_field(r.params) << ',' << grid_label(c.n) << ','
           << c.replicates << ',' << csv_field(c.stat) << ',' << csv_num(c.estimate) << ','
           << csv_num(c.stderr_est) << ',' << csv_num(sc.f) << ',' << csv_num(sc.w) << ','
           << (sc.r >= 0 ? std::to_string(sc.r) : std::string()) << ',' << csv_num(sc.mu) << ','
           << csv_num(sc.nu) << ',' << csv_num(sc.asymptotic) << ','
           << (c.violations >= 0 ? std::to_string(c.violations) : std::string()) << '\n';
    }
    return os.str();
}

std::string to_json(const ExperimentResult& r) {
    std::ostringstream os;
    auto num = [](double v) { return std::isfinite(v) ? fmt_sci(v) : std::string("null"); };
    os << "{\n  \"family\": \"" << json_escape(r.family) << "\",\n  \"params\": \""
       << json_escape(r.params) << "\",\n  \"sidecars\": {";
    bool first = true;
    for (const auto& [n, sc] : r.sidecars) {
        os << (first ? "\n" : ",\n") << "    \"" << grid_label(n) << "\": {\"f\": " << num(sc.f)
           << ", \"w\": " << num(sc.w)
           << ", \"r\": " << (sc.r >= 0 ? std::to_string(sc.r) : "null")
           << ", \"mu\": " << num(sc.mu) << ", \"nu\": " << num(sc.nu)
           << ", \"asymptotic\": " << num(sc.asymptotic) << "}";
        first = false;
    }
    os << "\n  },\n  \"results\": [";
    first = true;
    for (const StatCell& c : r.cells) {
        os << (first ? "\n" : ",\n") << "    {\"n\": " << grid_label(c.n)
           << ", \"replicates\": " << c.replicates << ", \"stat\": \"" << json_escape(c.stat)
           << "\", \"estimate\": " << num(c.estimate) << ", \"stderr\": " << num(c.stderr_est)
           << ", \"violations\": "
           << (c.violations >= 0 ? std::to_string(c.violations) : std::string("null")) << "}";
        first = false;
    }
    os << "\n  ]\n}\n";
    return os.str();
}

}  // namespace lislab
