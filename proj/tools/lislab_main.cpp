#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lislab/hammersley.hpp"
#include "lislab/json_io.hpp"
#include "lislab/montecarlo.hpp"
#include "lislab/variational.hpp"

namespace {

using namespace lislab;

// Integral values print as plain integers, everything else as fmt_sci.
std::string plain_or_sci(double v) {
    double r = std::nearbyint(v);
    if (std::fabs(v - r) < 1e-9 && std::fabs(v) < 9e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(r));
        return buf;
    }
    return fmt_sci(v);
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot read file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open output file: " + path);
    os << content;
}

std::string swap_ext(const std::string& p, const std::string& ext) {
    std::size_t slash = p.find_last_of("/\\");
    std::size_t dot = p.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return p + ext;
    return p.substr(0, dot) + ext;
}

const DiscretePmf& require_discrete(const AnyDistribution& any, const char* cmd) {
    const auto* d = std::get_if<DiscretePmf>(&any);
    if (!d) throw DomainError(std::string(cmd) + " requires a discrete distribution");
    return *d;
}

int run_solve(const std::string& dist_text, double t, const std::string& out_path) {
    AnyDistribution any = parse_distribution(dist_text);
    const DiscretePmf& d = require_discrete(any, "solve");
    if (!(t > 0)) throw DomainError("--t must be positive");
    VariationalResult f = solve_f(d, t);
    VariationalResult w = solve_w(d, t);
    std::string r = "null", mu = "null", nu = "null", asym = "null";
    if (t >= 1) {
        try {
            r = std::to_string(solve_r(d, t));
        } catch (const Error&) {
        }
    }
    try {
        mu = fmt_sci(solve_mu(d, t).value);
    } catch (const Error&) {
    }
    try {
        nu = fmt_sci(solve_nu(d, t).value);
    } catch (const Error&) {
    }
    try {
        asym = fmt_sci(asymptotic_prediction(d, t));
    } catch (const Error&) {
    }
    std::ostringstream os;
    os << "{\n"
       << "  \"t\": " << fmt_sci(t) << ",\n"
       << "  \"f\": " << fmt_sci(f.value) << ",\n"
       << "  \"alpha_star\": " << fmt_sci(f.argmin) << ",\n"
       << "  \"w\": " << fmt_sci(w.value) << ",\n"
       << "  \"r\": " << r << ",\n"
       << "  \"mu\": " << mu << ",\n"
       << "  \"nu\": " << nu << ",\n"
       << "  \"asymptotic\": " << asym << ",\n"
       << "  \"truncation_bound\": " << fmt_sci(std::max(f.truncation_bound, w.truncation_bound))
       << "\n}\n";
    write_output(out_path, os.str());
    return 0;
}

int run_simulate(const std::string& dist_text, const std::vector<double>& n_grid,
                 long long replicates, std::uint64_t seed, int jobs, bool has_eps, double eps,
                 const std::string& out_path, const std::string& format) {
    ExperimentSpec spec{.dist = parse_distribution(dist_text)};
    spec.n_grid = n_grid;
    spec.replicates = replicates;
    spec.master_seed = seed;
    spec.jobs = jobs;
    spec.stats.mean = spec.stats.variance = spec.stats.ratios = true;
    if (has_eps) spec.stats.tail_eps = eps;
    ExperimentResult res = run_experiment(spec);
    write_output(out_path, format == "json" ? to_json(res) : to_csv(res));
    return 0;
}

int run_coupled_cmd(const std::string& dist_text, const std::vector<double>& t_grid,
                    const std::vector<double>& alpha_grid, long long replicates,
                    std::uint64_t seed, int jobs, const std::string& out_path) {
    AnyDistribution any = parse_distribution(dist_text);
    const DiscretePmf& d = require_discrete(any, "coupled");
    CouplingReport rep = coupling_study(d, t_grid, alpha_grid, replicates, seed, jobs, 0);
    std::ostringstream os;
    os << "t,alpha,replicates,violations,lis_mean,upper_mean,lower_mean,h_count_mean,"
          "truncation_mean\n";
    long long total = 0;
    for (const CouplingCell& c : rep.cells) {
        total += c.violations;
        os << plain_or_sci(c.t) << ',' << fmt_sci(c.alpha) << ',' << c.replicates << ','
           << c.violations << ',' << fmt_sci(c.lis_mean) << ',' << fmt_sci(c.upper_mean) << ','
           << fmt_sci(c.lower_mean) << ',' << fmt_sci(c.h_count_mean) << ','
           << fmt_sci(c.truncation_mean) << '\n';
    }
    write_output(out_path, os.str());
    for (const CouplingViolation& v : rep.violations)
        std::cerr << "violation: t=" << plain_or_sci(v.t) << " alpha=" << fmt_sci(v.alpha)
                  << " replicate=" << v.replicate << " seed=" << v.seed << " lis=" << v.lis
                  << " lower=" << v.lower << " upper=" << v.upper
                  << " truncation=" << fmt_sci(v.truncation) << "\n";
    std::cerr << "pathwise violations: " << total << "\n";
    return 0;
}

int run_experiment_cmd(const std::string& spec_path, const std::string& out_path,
                       bool has_seed, std::uint64_t seed, bool has_jobs, int jobs,
                       const std::string& format) {
    ExperimentSpec spec = parse_experiment_spec(slurp(spec_path));
    if (has_seed) spec.master_seed = seed;
    if (has_jobs) spec.jobs = jobs;
    ExperimentResult res = run_experiment(spec);
    std::string csv = to_csv(res), js = to_json(res);
    if (out_path.empty()) {
        std::cout << (format == "json" ? js : csv);
        return 0;
    }
    if (format == "json") {
        write_output(out_path, js);
        write_output(swap_ext(out_path, ".csv"), csv);
    } else {
        write_output(out_path, csv);
        write_output(swap_ext(out_path, ".json"), js);
    }
    return 0;
}

int run_asymptotics(const std::string& dist_text, const std::vector<double>& n_grid,
                    const std::string& out_path) {
    AnyDistribution any = parse_distribution(dist_text);
    const DiscretePmf& d = require_discrete(any, "asymptotics");
    std::ostringstream os;
    os << "n,f,w,r,mu,nu,asymptotic\n";
    for (double n : n_grid) {
        if (!(n > 0)) throw DomainError("--n values must be positive");
        std::string f, w, r, mu, nu, asym;
        try {
            f = fmt_sci(solve_f(d, n).value);
        } catch (const Error&) {
        }
        try {
            w = fmt_sci(solve_w(d, n).value);
        } catch (const Error&) {
        }
        if (n >= 1) {
            try {
                r = std::to_string(solve_r(d, n));
            } catch (const Error&) {
            }
        }
        try {
            mu = fmt_sci(solve_mu(d, n).value);
        } catch (const Error&) {
        }
        try {
            nu = fmt_sci(solve_nu(d, n).value);
        } catch (const Error&) {
        }
        try {
            asym = fmt_sci(asymptotic_prediction(d, n));
        } catch (const Error&) {
        }
        os << plain_or_sci(n) << ',' << f << ',' << w << ',' << r << ',' << mu << ',' << nu << ','
           << asym << '\n';
    }
    write_output(out_path, os.str());
    return 0;
}

void json_num_array(std::ostringstream& os, const std::vector<double>& xs) {
    os << '[';
    for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? ", " : "") << fmt_sci(xs[i]);
    os << ']';
}

void json_int_array(std::ostringstream& os, const std::vector<long long>& xs) {
    os << '[';
    for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? ", " : "") << xs[i];
    os << ']';
}

int run_trajectory_cmd(const std::string& dist_text, double t, double alpha, std::uint64_t seed,
                       const std::string& out_path) {
    AnyDistribution any = parse_distribution(dist_text);
    const DiscretePmf& d = require_discrete(any, "trajectory");
    if (!(t > 0)) throw DomainError("--t must be positive");
    Trajectory tr = run_trajectory(d, t, alpha, seed);
    std::ostringstream os;
    os << "{\n  \"t\": " << fmt_sci(tr.t) << ",\n  \"alpha\": " << fmt_sci(tr.alpha)
       << ",\n  \"seed\": " << seed << ",\n  \"lis\": " << tr.lis
       << ",\n  \"h_count\": " << tr.h_count << ",\n  \"field\": [";
    for (std::size_t i = 0; i < tr.field.rows.size(); ++i) {
        os << (i ? ",\n" : "\n") << "    {\"row\": " << plain_or_sci(tr.field.rows[i].first)
           << ", \"points\": ";
        json_num_array(os, tr.field.rows[i].second);
        os << '}';
    }
    os << "\n  ],\n  \"sources\": ";
    json_num_array(os, tr.sources);
    os << ",\n  \"sink_rows\": ";
    json_int_array(os, tr.sink_rows);
    os << ",\n  \"creation_rows\": ";
    json_int_array(os, tr.creation_rows);
    os << ",\n  \"absorbed_rows\": ";
    json_int_array(os, tr.absorbed_rows);
    os << ",\n  \"states\": [";
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
        os << (i ? ",\n" : "\n") << "    {\"row\": " << tr.states[i].first << ", \"particles\": ";
        json_num_array(os, tr.states[i].second);
        os << '}';
    }
    os << "\n  ]\n}\n";
    write_output(out_path, os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LIS growth laboratory: variational solvers and Hammersley-style simulators"};
    app.require_subcommand(1);

    std::string dist_text, spec_path, out_path, format = "csv";
    std::vector<double> n_grid, t_grid, alpha_grid;
    double t_single = 0, alpha_single = 0, eps = 0.5;
    long long replicates = 100;
    std::uint64_t seed = 0;
    int jobs = 1;

    auto* solve = app.add_subcommand(
        "solve", "Evaluate f, alpha*, w, r, mu, nu and the asymptotic prediction at t");
    solve->add_option("--dist", dist_text, "distribution, inline (geometric:0.5) or JSON")
        ->required();
    solve->add_option("--t", t_single, "parameter t > 0")->required();
    solve->add_option("--out", out_path, "output file (default stdout)");

    auto* simulate =
        app.add_subcommand("simulate", "Monte Carlo LIS table over an ascending n grid");
    simulate->add_option("--dist", dist_text, "distribution, inline or JSON")->required();
    simulate->add_option("--n", n_grid, "sample sizes, ascending")->required();
    simulate->add_option("--replicates", replicates, "replicates per n (default 100)");
    simulate->add_option("--seed", seed, "master seed (default LISLAB_SEED or 12345)");
    simulate->add_option("--jobs", jobs, "worker threads (default 1)");
    simulate->add_option("--eps", eps, "also report tail_check(eps) cells");
    simulate->add_option("--out", out_path, "output file (default stdout)");
    simulate->add_option("--format", format, "csv or json (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* coupled =
        app.add_subcommand("coupled", "Source/sink-coupled runs over a (t, alpha) grid");
    coupled->add_option("--dist", dist_text, "distribution, inline or JSON")->required();
    coupled->add_option("--t", t_grid, "t grid")->required();
    coupled->add_option("--alpha", alpha_grid, "alpha grid")->required();
    coupled->add_option("--replicates", replicates, "replicates per cell (default 100)");
    coupled->add_option("--seed", seed, "master seed (default LISLAB_SEED or 12345)");
    coupled->add_option("--jobs", jobs, "worker threads (default 1)");
    coupled->add_option("--out", out_path, "output file (default stdout)");

    auto* experiment = app.add_subcommand("experiment", "Run a JSON experiment file");
    experiment->add_option("--spec", spec_path, "experiment JSON file")->required();
    experiment->add_option("--out", out_path,
                           "output file; a mirror with the other extension is written too");
    experiment->add_option("--seed", seed, "override the file's master seed");
    experiment->add_option("--jobs", jobs, "override the file's worker count");
    experiment->add_option("--format", format, "csv or json (default csv)")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* asymptotics =
        app.add_subcommand("asymptotics", "Solver values f, w, r, mu, nu across an n grid");
    asymptotics->add_option("--dist", dist_text, "distribution, inline or JSON")->required();
    asymptotics->add_option("--n", n_grid, "n grid")->required();
    asymptotics->add_option("--out", out_path, "output file (default stdout)");

    auto* trajectory =
        app.add_subcommand("trajectory", "Dump one full particle-system run as JSON");
    trajectory->add_option("--dist", dist_text, "distribution, inline or JSON")->required();
    trajectory->add_option("--t", t_single, "parameter t > 0")->required();
    trajectory->add_option("--alpha", alpha_single, "source rate (0 = plain run)");
    trajectory->add_option("--seed", seed, "engine seed (default LISLAB_SEED or 12345)");
    trajectory->add_option("--out", out_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (solve->parsed()) return run_solve(dist_text, t_single, out_path);
        if (simulate->parsed()) {
            std::uint64_t s = simulate->count("--seed") ? seed : default_master_seed();
            return run_simulate(dist_text, n_grid, replicates, s, jobs,
                                simulate->count("--eps") > 0, eps, out_path, format);
        }
        if (coupled->parsed()) {
            std::uint64_t s = coupled->count("--seed") ? seed : default_master_seed();
            return run_coupled_cmd(dist_text, t_grid, alpha_grid, replicates, s, jobs, out_path);
        }
        if (experiment->parsed())
            return run_experiment_cmd(spec_path, out_path, experiment->count("--seed") > 0, seed,
                                      experiment->count("--jobs") > 0, jobs, format);
        if (asymptotics->parsed()) return run_asymptotics(dist_text, n_grid, out_path);
        if (trajectory->parsed()) {
            std::uint64_t s = trajectory->count("--seed") ? seed : default_master_seed();
            return run_trajectory_cmd(dist_text, t_single, alpha_single, s, out_path);
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
