// End-to-end checks of the lislab binary: argv[1] is the path to the tool.
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

int failures = 0;

#define CHECK_MSG(cond, msg)                                                       \
    do {                                                                           \
        if (!(cond)) {                                                             \
            ++failures;                                                            \
            std::cerr << "FAIL " << __FILE__ << ":" << __LINE__ << ": " << (msg)   \
                      << "\n";                                                     \
        }                                                                          \
    } while (0)

struct RunResult {
    int exit_code = -1;
    std::string out;
};

// Runs through the shell; append "2>&1" to the args to capture stderr too.
RunResult run(const std::string& cli, const std::string& args) {
    RunResult r;
    std::string cmd = "'" + cli + "' " + args;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
    int st = pclose(p);
    r.exit_code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

bool exists(const std::string& path) { return std::ifstream(path).good(); }

const char* kCsvHeader =
    "family,params,n,replicates,stat,estimate,stderr,sidecar_f,sidecar_w,sidecar_r,"
    "sidecar_mu,sidecar_nu,asymptotic,violations\n";

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: test_cli <path-to-lislab>\n";
        return 1;
    }
    const std::string cli = argv[1];

    char tmpl[] = "/tmp/lislab_cli_XXXXXX";
    const char* tmp = mkdtemp(tmpl);
    if (!tmp) {
        std::cerr << "mkdtemp failed\n";
        return 1;
    }
    const std::string dir = tmp;
    unsetenv("LISLAB_SEED");

    // solve: closed values for Geometric(0.5) at t=100.
    {
        RunResult r = run(cli, "solve --dist geometric:0.5 --t 100");
        CHECK_MSG(r.exit_code == 0, "solve exits 0");
        nlohmann::json j = nlohmann::json::parse(r.out, nullptr, false);
        CHECK_MSG(!j.is_discarded(), "solve output is JSON");
        if (!j.is_discarded()) {
            CHECK_MSG(std::abs(j["f"].get<double>() - 7.08609036658) < 1e-8, "f at t=100");
            CHECK_MSG(std::abs(j["w"].get<double>() - 4.16621006839) < 1e-8, "w at t=100");
            CHECK_MSG(j["r"].get<long long>() == 5, "r at t=100");
            CHECK_MSG(std::abs(j["mu"].get<double>() - 4.48027040064) < 1e-8, "mu at t=100");
            CHECK_MSG(std::abs(j["nu"].get<double>() - 3.53180839121) < 1e-8, "nu at t=100");
            CHECK_MSG(std::abs(j["asymptotic"].get<double>() - 6.64385618977) < 1e-8,
                      "asymptotic at t=100");
            CHECK_MSG(j["truncation_bound"].get<double>() <= 1e-9, "truncation recorded");
        }
        RunResult again = run(cli, "solve --dist geometric:0.5 --t 100");
        CHECK_MSG(again.out == r.out, "solve output is deterministic");
    }

    // solve on a family without interpolation: mu/nu/asymptotic are null.
    {
        RunResult r = run(cli, "solve --dist explicit:1=0.5,2=0.5 --t 4");
        CHECK_MSG(r.exit_code == 0, "solve explicit exits 0");
        nlohmann::json j = nlohmann::json::parse(r.out, nullptr, false);
        CHECK_MSG(!j.is_discarded() && j["mu"].is_null() && j["nu"].is_null() &&
                      j["asymptotic"].is_null(),
                  "explicit family solves report null mu/nu/asymptotic");
        CHECK_MSG(!j.is_discarded() && j["f"].is_number() && j["w"].is_number(),
                  "explicit family still gets f and w");
    }

    // Exit codes: 2 for usage/parse problems, 1 for runtime failures.
    {
        CHECK_MSG(run(cli, "solve --bogus 2>/dev/null").exit_code == 2, "unknown flag is 2");
        CHECK_MSG(run(cli, "solve --dist geometric:0.5 2>/dev/null").exit_code == 2,
                  "missing required option is 2");
        CHECK_MSG(run(cli, "nonsense 2>/dev/null").exit_code == 2, "unknown subcommand is 2");
        CHECK_MSG(run(cli, "solve --dist zeta:2 --t 10 2>/dev/null").exit_code == 2,
                  "bad descriptor is 2");
        CHECK_MSG(run(cli, "--help").exit_code == 0, "--help exits 0");
        RunResult help = run(cli, "--help");
        for (const char* sub :
             {"solve", "simulate", "coupled", "experiment", "asymptotics", "trajectory"})
            CHECK_MSG(help.out.find(sub) != std::string::npos, "help lists subcommand");

        RunResult big = run(cli,
                            "coupled --dist geometric:0.5 --t 5000000 --alpha 0.5 "
                            "--replicates 1 2>&1");
        CHECK_MSG(big.exit_code == 1, "oversized horizon is a runtime error (1)");
        CHECK_MSG(big.out.find("error:") != std::string::npos, "runtime error is reported");
    }

    // simulate: CSV shape, JSON alternative, seed handling.
    {
        RunResult csv = run(cli, "simulate --dist geometric:0.5 --n 50 100 --replicates 20 "
                                 "--seed 7");
        CHECK_MSG(csv.exit_code == 0, "simulate exits 0");
        CHECK_MSG(csv.out.rfind(kCsvHeader, 0) == 0, "simulate CSV header");
        CHECK_MSG(csv.out.find(",mean,") != std::string::npos, "simulate has mean rows");

        RunResult js = run(cli, "simulate --dist geometric:0.5 --n 50 100 --replicates 20 "
                                "--seed 7 --format json");
        nlohmann::json j = nlohmann::json::parse(js.out, nullptr, false);
        CHECK_MSG(!j.is_discarded() && j["family"] == "geometric", "simulate JSON parses");

        setenv("LISLAB_SEED", "777", 1);
        RunResult env = run(cli, "simulate --dist geometric:0.5 --n 50 --replicates 20");
        RunResult flag = run(cli, "simulate --dist geometric:0.5 --n 50 --replicates 20 "
                                  "--seed 777");
        CHECK_MSG(env.out == flag.out, "LISLAB_SEED matches --seed 777");
        RunResult wins =
            run(cli, "simulate --dist geometric:0.5 --n 50 --replicates 20 --seed 12345");
        unsetenv("LISLAB_SEED");
        RunResult noenv =
            run(cli, "simulate --dist geometric:0.5 --n 50 --replicates 20 --seed 12345");
        CHECK_MSG(wins.out == noenv.out, "--seed wins over LISLAB_SEED");
    }

    // coupled: violation-free table plus the stderr summary line.
    {
        RunResult r = run(cli, "coupled --dist geometric:0.5 --t 20 --alpha 0.3 0.6 "
                               "--replicates 50 --seed 3 2>&1");
        CHECK_MSG(r.exit_code == 0, "coupled exits 0");
        CHECK_MSG(r.out.find("t,alpha,replicates,violations,") != std::string::npos,
                  "coupled table header");
        CHECK_MSG(r.out.find("pathwise violations: 0") != std::string::npos,
                  "coupled reports zero violations");
    }

    // experiment: file in, CSV + JSON mirror out, byte-stable across reruns.
    {
        const std::string spec_path = dir + "/exp.json";
        std::ofstream spec(spec_path);
        spec << R"json({
            "distribution": "geometric:0.5",
            "n_grid": [100, 200],
            "replicates": 25,
            "master_seed": 99,
            "statistics": ["mean", "variance", "ratios", "greedy", "distinct"]
        })json";
        spec.close();

        const std::string out_csv = dir + "/table.csv";
        RunResult r = run(cli, "experiment --spec " + spec_path + " --out " + out_csv);
        CHECK_MSG(r.exit_code == 0, "experiment exits 0");
        CHECK_MSG(exists(out_csv), "experiment writes CSV");
        CHECK_MSG(exists(dir + "/table.json"), "experiment writes JSON mirror");
        std::string first = slurp(out_csv);
        CHECK_MSG(first.rfind(kCsvHeader, 0) == 0, "experiment CSV header");
        nlohmann::json j = nlohmann::json::parse(slurp(dir + "/table.json"), nullptr, false);
        CHECK_MSG(!j.is_discarded() && j["results"].is_array(), "experiment JSON parses");

        RunResult again = run(cli, "experiment --spec " + spec_path + " --out " + out_csv);
        CHECK_MSG(again.exit_code == 0 && slurp(out_csv) == first,
                  "experiment output is byte-stable");

        RunResult seeded =
            run(cli, "experiment --spec " + spec_path + " --out " + out_csv + " --seed 100");
        CHECK_MSG(seeded.exit_code == 0 && slurp(out_csv) != first,
                  "--seed overrides the file's master seed");
    }

    // asymptotics: one row per n with the solver columns.
    {
        RunResult r = run(cli, "asymptotics --dist geometric:0.5 --n 100 1000");
        CHECK_MSG(r.exit_code == 0, "asymptotics exits 0");
        CHECK_MSG(r.out.rfind("n,f,w,r,mu,nu,asymptotic\n", 0) == 0, "asymptotics header");
        CHECK_MSG(r.out.find("\n100,7.08609036658") != std::string::npos,
                  "asymptotics f column at n=100");
        CHECK_MSG(r.out.find("\n1000,") != std::string::npos, "asymptotics second row");
    }

    // trajectory: structured JSON dump of one run.
    {
        RunResult r = run(cli, "trajectory --dist geometric:0.5 --t 20 --alpha 0.4 --seed 9");
        CHECK_MSG(r.exit_code == 0, "trajectory exits 0");
        nlohmann::json j = nlohmann::json::parse(r.out, nullptr, false);
        CHECK_MSG(!j.is_discarded(), "trajectory output is JSON");
        if (!j.is_discarded()) {
            CHECK_MSG(j["field"].is_array() && j["states"].is_array(), "trajectory arrays");
            CHECK_MSG(j["lis"].is_number_integer() && j["h_count"].is_number_integer(),
                      "trajectory counters");
            CHECK_MSG(j["seed"] == 9, "trajectory echoes its seed");
        }
        RunResult again =
            run(cli, "trajectory --dist geometric:0.5 --t 20 --alpha 0.4 --seed 9");
        CHECK_MSG(again.out == r.out, "trajectory is deterministic");
    }

    if (failures == 0) std::cout << "test_cli: all checks passed\n";
    return failures == 0 ? 0 : 1;
}
