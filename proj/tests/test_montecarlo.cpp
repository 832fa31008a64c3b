#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "lislab/common.hpp"
#include "lislab/distributions.hpp"
#include "lislab/montecarlo.hpp"
#include "lislab/variational.hpp"

using namespace lislab;
using doctest::Approx;

namespace {

const StatCell& find_cell(const ExperimentResult& r, double n, const std::string& stat) {
    for (const StatCell& c : r.cells)
        if (c.n == n && c.stat == stat) return c;
    FAIL("missing cell " << stat << " at n=" << n);
    static StatCell dummy;
    return dummy;
}

bool has_cell(const ExperimentResult& r, double n, const std::string& prefix) {
    for (const StatCell& c : r.cells)
        if (c.n == n && c.stat.rfind(prefix, 0) == 0) return true;
    return false;
}

}  // namespace

TEST_CASE("finite alphabets saturate: mean exactly the atom count") {
    ExperimentResult r = estimate_lis(DiscretePmf::finite_uniform(3), {1000}, 1000, 99);
    CHECK(find_cell(r, 1000, "mean").estimate == 3.0);
    CHECK(find_cell(r, 1000, "variance").estimate == 0.0);
    CHECK(find_cell(r, 1000, "mean").stderr_est == 0.0);
}

TEST_CASE("single-draw sequences always have LIS 1") {
    ExperimentResult r = estimate_lis(DiscretePmf::geometric(0.5), {1}, 200, 5);
    CHECK(find_cell(r, 1, "mean").estimate == 1.0);
}

TEST_CASE("ratio bands at moderate n") {
    ExperimentResult r = estimate_lis(DiscretePmf::geometric(0.5), {10000}, 100, 2024);
    double over_f = find_cell(r, 10000, "mean_over_f").estimate;
    double over_w = find_cell(r, 10000, "mean_over_w").estimate;
    CHECK(over_f > 0.5);
    CHECK(over_f < 1.1);
    CHECK(over_w >= 0.9);
    const Sidecars& sc = r.sidecars.at(10000);
    CHECK(sc.f >= sc.w);
    CHECK(sc.r >= 1);
    CHECK(find_cell(r, 10000, "mean_over_r").estimate ==
          Approx(find_cell(r, 10000, "mean").estimate / static_cast<double>(sc.r)));
}

TEST_CASE("output is bit-stable across reruns and worker counts") {
    ExperimentSpec spec{.dist = DiscretePmf::poisson(1)};
    spec.n_grid = {100, 300};
    spec.replicates = 60;
    spec.master_seed = 31415;
    spec.stats.variance = spec.stats.ratios = spec.stats.quantiles = true;
    spec.stats.greedy = spec.stats.distinct = true;

    std::string once = to_csv(run_experiment(spec));
    std::string twice = to_csv(run_experiment(spec));
    CHECK(once == twice);

    spec.jobs = 3;
    CHECK(to_csv(run_experiment(spec)) == once);
}

TEST_CASE("greedy head count against r and the LIS chain") {
    std::vector<GreedyRow> rows =
        greedy_vs_lis(DiscretePmf::geometric(0.5), {100000}, 200, 17);
    REQUIRE(rows.size() == 1);
    const GreedyRow& row = rows.front();
    CHECK(row.r == 15);  // sum of 2^i, i<=15, is 65534 <= 1e5
    CHECK(row.greedy_gt_r == 0);
    CHECK(row.chain_violations == 0);
    double ratio = row.greedy_mean / static_cast<double>(row.r);
    CHECK(ratio >= 0.8);
    CHECK(ratio <= 1.0);
    CHECK(row.greedy_mean <= row.lis_mean);
}

TEST_CASE("variance stays below the mean") {
    VarianceCheck a = variance_check(DiscretePmf::finite_uniform(2), 100, 400, 7);
    CHECK(a.pass);
    CHECK(a.var_hat == 0.0);
    CHECK(a.mean_hat == 2.0);

    CHECK(variance_check(DiscretePmf::geometric(0.5), 3000, 1000, 7).pass);
    CHECK(variance_check(DiscretePmf::power_log(2.2, 0), 10000, 400, 7).pass);
}

TEST_CASE("lower-tail inequality frequencies") {
    TailCheck t1 = tail_check(DiscretePmf::geometric(0.5), 10000, 100, 0.5, 23);
    CHECK(t1.pass);
    CHECK(t1.freq == 0.0);  // no replicate dips to half of w_n at this size
    CHECK(t1.bound > 0);

    // eps -> 1 makes the exponent vanish: bound ~ 3 covers any frequency.
    TailCheck t2 = tail_check(DiscretePmf::geometric(0.5), 1000, 50, 0.999, 23);
    CHECK(t2.pass);
    CHECK(t2.bound > 1.0);

    TailCheck t3 = tail_check(DiscretePmf::finite_uniform(2), 100, 100, 0.9, 23);
    CHECK(t3.pass);
    CHECK(t3.note.find("finite support") != std::string::npos);
}

TEST_CASE("mixed-draw limit approaches sqrt(rho1)") {
    MixedDistribution pure(1.0, std::nullopt);
    std::vector<MixedLimitCell> cells = mixed_limit(pure, {10000}, 60, 11);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].target == 1.0);
    CHECK(cells[0].ratio > 0.9);
    CHECK(cells[0].ratio < 1.05);

    MixedDistribution atoms(0.0, DiscretePmf::geometric(0.5));
    std::vector<MixedLimitCell> degenerate = mixed_limit(atoms, {1000, 10000}, 60, 11);
    CHECK(degenerate[0].target == 0.0);
    CHECK(degenerate[1].ratio < degenerate[0].ratio);  // decays like log(n)/sqrt(n)
    CHECK(degenerate[1].ratio < 0.1);
}

TEST_CASE("coupled statistics through the experiment surface") {
    ExperimentSpec spec{.dist = DiscretePmf::geometric(0.5)};
    spec.n_grid = {20, 100};  // t values
    spec.replicates = 400;
    spec.master_seed = 4242;
    spec.stats.coupling_alpha = 0.3;
    ExperimentResult r = run_experiment(spec);

    for (double t : {20.0, 100.0}) {
        CHECK(find_cell(r, t, "coupling_violations").violations == 0);
        double h = find_cell(r, t, "h_count_mean").estimate;
        CHECK(std::abs(h - 0.3 * t) <= 4 * std::sqrt(0.3 * t / 400));
        CHECK(find_cell(r, t, "upper_mean").estimate >= find_cell(r, t, "lis_mean").estimate);
        CHECK(find_cell(r, t, "sink_truncation_mean").estimate < 0.01);
        REQUIRE(has_cell(r, t, "sink_freq(row="));
        REQUIRE(has_cell(r, t, "creation_freq(row="));
    }
    double q1 = 0.5 / 0.8;  // p_1/(p_1 + alpha)
    double s1 = find_cell(r, 100, "sink_freq(row=1)").estimate;
    CHECK(std::abs(s1 - q1) <= 4 * std::sqrt(q1 * (1 - q1) / 400));
}

TEST_CASE("expected upper bound meets f at the optimal alpha") {
    DiscretePmf d = DiscretePmf::geometric(0.5);
    VariationalResult f = solve_f(d, 100);
    CouplingReport rep = coupling_study(d, {100}, {f.argmin}, 1000, 606);
    REQUIRE(rep.cells.size() == 1);
    CHECK(rep.violations.empty());
    // E[upper] = g_t(alpha*) = f_t; 1000 replicates put the mean within ~0.4.
    CHECK(std::abs(rep.cells[0].upper_mean - f.value) <= 0.4);
    CHECK(rep.cells[0].lis_mean <= rep.cells[0].upper_mean);
    CHECK(rep.cells[0].lower_mean <= rep.cells[0].lis_mean);
}

TEST_CASE("spec validation") {
    ExperimentSpec bad{.dist = DiscretePmf::geometric(0.5)};
    bad.n_grid = {100};
    bad.replicates = 0;
    CHECK_THROWS_AS((void)run_experiment(bad), DomainError);

    ExperimentSpec empty{.dist = DiscretePmf::geometric(0.5)};
    empty.replicates = 10;
    CHECK_THROWS_AS((void)run_experiment(empty), DomainError);

    ExperimentSpec desc{.dist = DiscretePmf::geometric(0.5)};
    desc.n_grid = {100, 50};
    desc.replicates = 10;
    CHECK_THROWS_AS((void)run_experiment(desc), DomainError);

    ExperimentSpec frac{.dist = DiscretePmf::geometric(0.5)};
    frac.n_grid = {10.5};
    frac.replicates = 10;
    CHECK_THROWS_AS((void)run_experiment(frac), DomainError);

    ExperimentSpec mixcpl{.dist = MixedDistribution(1.0, std::nullopt)};
    mixcpl.n_grid = {10};
    mixcpl.replicates = 10;
    mixcpl.stats.coupling_alpha = 0.5;
    CHECK_THROWS_AS((void)run_experiment(mixcpl), DomainError);

    ExperimentSpec badeps{.dist = DiscretePmf::geometric(0.5)};
    badeps.n_grid = {10};
    badeps.replicates = 10;
    badeps.stats.tail_eps = 1.2;
    CHECK_THROWS_AS((void)run_experiment(badeps), DomainError);
}

TEST_CASE("CSV shape and quoting") {
    ExperimentResult r = estimate_lis(MixedDistribution(0.5, DiscretePmf::geometric(0.5)),
                                      {100}, 20, 3);
    std::string csv = to_csv(r);
    CHECK(csv.rfind("family,params,n,replicates,stat,estimate,stderr,sidecar_f,sidecar_w,"
                    "sidecar_r,sidecar_mu,sidecar_nu,asymptotic,violations\n",
                    0) == 0);
    // The mixed params label contains a comma, so the field must be quoted.
    REQUIRE(r.params.find(',') != std::string::npos);
    CHECK(csv.find('"' + r.params + '"') != std::string::npos);
    // One line per cell plus the header.
    std::size_t lines = 0;
    for (char ch : csv) lines += ch == '\n';
    CHECK(lines == r.cells.size() + 1);
}

TEST_CASE("JSON mirrors the table") {
    ExperimentResult r = estimate_lis(DiscretePmf::geometric(0.5), {50, 100}, 30, 8);
    nlohmann::json j = nlohmann::json::parse(to_json(r));
    CHECK(j["family"] == "geometric");
    CHECK(j.contains("params"));
    REQUIRE(j["sidecars"].contains("100"));
    CHECK(j["sidecars"]["100"]["f"].is_number());
    CHECK(j["sidecars"]["100"]["r"].is_number_integer());
    REQUIRE(j["results"].is_array());
    CHECK(j["results"].size() == r.cells.size());
    bool saw_null_violations = false;
    for (const auto& cellv : j["results"]) {
        CHECK(cellv.contains("stat"));
        CHECK(cellv["estimate"].is_number());
        if (cellv["violations"].is_null()) saw_null_violations = true;
    }
    CHECK(saw_null_violations);  // plain mean rows carry no violation counter

    // Explicit families have no interpolation: mu/nu serialize as null.
    ExperimentResult ex =
        estimate_lis(DiscretePmf::explicit_atoms({{1, 0.5}, {2, 0.5}}), {100}, 20, 8);
    nlohmann::json je = nlohmann::json::parse(to_json(ex));
    CHECK(je["sidecars"]["100"]["mu"].is_null());
    CHECK(je["sidecars"]["100"]["nu"].is_null());
    CHECK(je["sidecars"]["100"]["asymptotic"].is_null());
}
