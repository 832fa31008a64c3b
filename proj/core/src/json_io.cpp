#include "lislab/json_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"

namespace lislab {

using nlohmann::json;

std::string fmt_sci(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.11e", x);
    return buf;
}

std::uint64_t default_master_seed() {
    const char* env = std::getenv("LISLAB_SEED");
    if (!env || !*env) return kDefaultSeed;
    errno = 0;
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || end == env || *end != '\0')
        throw ParseError("LISLAB_SEED must be an unsigned integer");
    return v;
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    return out;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_num(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ParseError("cannot parse " + what + ": '" + s + "'");
    }
    if (pos != s.size()) throw ParseError("trailing junk in " + what + ": '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

double num_field(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw ParseError(std::string("descriptor needs numeric \"") + key + "\"");
    return j[key].get<double>();
}

AnyDistribution from_json_desc(const json& j) {
    if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
        throw ParseError("descriptor must be an object with a \"family\" string");
    std::string fam = j["family"].get<std::string>();
    try {
        if (fam == "geometric") return DiscretePmf::geometric(num_field(j, "p"));
        if (fam == "poisson") return DiscretePmf::poisson(num_field(j, "lambda"));
        if (fam == "power_log")
            return DiscretePmf::power_log(num_field(j, "beta"), num_field(j, "gamma"));
        if (fam == "borderline_power_log")
            return DiscretePmf::borderline_power_log(num_field(j, "gamma"));
        if (fam == "finite_uniform")
            return DiscretePmf::finite_uniform(std::llround(num_field(j, "m")));
        if (fam == "explicit") {
            if (!j.contains("atoms") || !j["atoms"].is_array())
                throw ParseError("explicit needs \"atoms\": [[atom, mass], ...]");
            std::vector<std::pair<long long, double>> atoms;
            for (const auto& e : j["atoms"]) {
                if (!e.is_array() || e.size() != 2)
                    throw ParseError("each explicit atom entry is [atom, mass]");
                atoms.emplace_back(e[0].get<long long>(), e[1].get<double>());
            }
            return DiscretePmf::explicit_atoms(std::move(atoms));
        }
        if (fam == "mixed") {
            double rho1 = num_field(j, "rho1");
            std::optional<DiscretePmf> disc;
            if (j.contains("discrete")) {
                AnyDistribution inner = from_json_desc(j["discrete"]);
                const auto* p = std::get_if<DiscretePmf>(&inner);
                if (!p) throw ParseError("mixed \"discrete\" part must be a discrete family");
                disc = *p;
            }
            double lo = 0, hi = 1;
            if (j.contains("uniform")) {
                const auto& u = j["uniform"];
                if (!u.is_array() || u.size() != 2) throw ParseError("\"uniform\" is [lo, hi]");
                lo = u[0].get<double>();
                hi = u[1].get<double>();
            }
            return MixedDistribution(rho1, std::move(disc), lo, hi);
        }
    } catch (const ParseError&) {
        throw;
    } catch (const json::exception& e) {
        throw ParseError("bad descriptor field: " + std::string(e.what()));
    } catch (const Error& e) {
        throw ParseError("invalid " + fam + " parameters: " + e.what());
    }
    throw ParseError("unknown family: '" + fam + "'");
}

AnyDistribution from_inline(const std::string& s) {
    std::size_t colon = s.find(':');
    std::string fam = trim(colon == std::string::npos ? s : s.substr(0, colon));
    std::string rest = colon == std::string::npos ? "" : trim(s.substr(colon + 1));
    auto nums = [&](std::size_t want) {
        auto parts = split(rest, ',');
        if (parts.size() != want)
            throw ParseError(fam + " takes " + std::to_string(want) + " parameter(s), got '" +
                             rest + "'");
        std::vector<double> out;
        for (const auto& p : parts) out.push_back(parse_num(trim(p), fam + " parameter"));
        return out;
    };
    try {
        if (fam == "geometric") return DiscretePmf::geometric(nums(1)[0]);
        if (fam == "poisson") return DiscretePmf::poisson(nums(1)[0]);
        if (fam == "power_log") {
            auto v = nums(2);
            return DiscretePmf::power_log(v[0], v[1]);
        }
        if (fam == "borderline_power_log") return DiscretePmf::borderline_power_log(nums(1)[0]);
        if (fam == "finite_uniform") return DiscretePmf::finite_uniform(std::llround(nums(1)[0]));
        if (fam == "explicit") {
            std::vector<std::pair<long long, double>> atoms;
            for (const auto& part : split(rest, ',')) {
                std::size_t eq = part.find('=');
                if (eq == std::string::npos)
                    throw ParseError("explicit atoms are atom=mass, got '" + part + "'");
                atoms.emplace_back(
                    std::llround(parse_num(trim(part.substr(0, eq)), "explicit atom")),
                    parse_num(trim(part.substr(eq + 1)), "explicit mass"));
            }
            return DiscretePmf::explicit_atoms(std::move(atoms));
        }
        if (fam == "mixed") {
            std::size_t comma = rest.find(',');
            std::string rho_part = trim(comma == std::string::npos ? rest : rest.substr(0, comma));
            double rho1 = parse_num(rho_part, "mixed rho1");
            std::optional<DiscretePmf> disc;
            if (comma != std::string::npos) {
                AnyDistribution inner = from_inline(trim(rest.substr(comma + 1)));
                const auto* p = std::get_if<DiscretePmf>(&inner);
                if (!p) throw ParseError("mixed discrete part must be a discrete family");
                disc = *p;
            }
            return MixedDistribution(rho1, std::move(disc));
        }
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError("invalid " + fam + " parameters: " + e.what());
    }
    throw ParseError("unknown family: '" + fam + "'");
}

json desc_of(const DiscretePmf& d) {
    json j;
    DiscretePmf::FamilyParams fp = d.params();
    switch (d.family()) {
        case Family::geometric:
            j = {{"family", "geometric"}, {"p", fp.p}};
            break;
        case Family::poisson:
            j = {{"family", "poisson"}, {"lambda", fp.lambda}};
            break;
        case Family::power_log:
            j = {{"family", "power_log"}, {"beta", fp.beta}, {"gamma", fp.gamma}};
            break;
        case Family::borderline_power_log:
            j = {{"family", "borderline_power_log"}, {"gamma", fp.gamma}};
            break;
        case Family::finite_uniform:
            j = {{"family", "finite_uniform"}, {"m", fp.m}};
            break;
        case Family::explicit_atoms: {
            auto prefix = d.sorted_prefix(d.support_count());
            std::vector<std::pair<long long, double>> atoms;
            for (const auto& [mass, atom] : prefix) atoms.emplace_back(atom, mass);
            std::sort(atoms.begin(), atoms.end());
            json arr = json::array();
            for (const auto& [atom, mass] : atoms) arr.push_back({atom, mass});
            j = {{"family", "explicit"}, {"atoms", arr}};
            break;
        }
    }
    return j;
}

}  // namespace

AnyDistribution parse_distribution(const std::string& text) {
    std::string s = trim(text);
    if (s.empty()) throw ParseError("empty distribution descriptor");
    if (s[0] == '{') {
        json j;
        try {
            j = json::parse(s);
        } catch (const json::exception& e) {
            throw ParseError("bad descriptor JSON: " + std::string(e.what()));
        }
        return from_json_desc(j);
    }
    return from_inline(s);
}

std::string distribution_to_json(const AnyDistribution& d) {
    if (const auto* p = std::get_if<DiscretePmf>(&d)) return desc_of(*p).dump();
    const auto& m = std::get<MixedDistribution>(d);
    json j;
    j["family"] = "mixed";
    j["rho1"] = m.rho1();
    if (m.discrete()) j["discrete"] = desc_of(*m.discrete());
    j["uniform"] = {m.uniform_lo(), m.uniform_hi()};
    return j.dump();
}

ExperimentSpec parse_experiment_spec(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError("bad spec JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ParseError("spec must be a JSON object");
    if (!j.contains("distribution")) throw ParseError("spec needs \"distribution\"");
    AnyDistribution dist = j["distribution"].is_string()
                               ? parse_distribution(j["distribution"].get<std::string>())
                               : from_json_desc(j["distribution"]);
    ExperimentSpec spec{.dist = std::move(dist)};
    try {
        if (!j.contains("n_grid") || !j["n_grid"].is_array() || j["n_grid"].empty())
            throw ParseError("spec needs a non-empty \"n_grid\" array");
        for (const auto& e : j["n_grid"]) {
            if (!e.is_number()) throw ParseError("n_grid entries must be numbers");
            spec.n_grid.push_back(e.get<double>());
        }
        for (std::size_t i = 1; i < spec.n_grid.size(); ++i)
            if (!(spec.n_grid[i] > spec.n_grid[i - 1]))
                throw ParseError("n_grid must be strictly ascending");
        if (j.contains("replicates")) spec.replicates = j["replicates"].get<long long>();
        if (spec.replicates < 1) throw ParseError("replicates must be >= 1");
        if (j.contains("master_seed")) spec.master_seed = j["master_seed"].get<std::uint64_t>();
        if (j.contains("jobs")) spec.jobs = j["jobs"].get<int>();
        if (j.contains("statistics")) {
            if (!j["statistics"].is_array()) throw ParseError("\"statistics\" must be an array");
            spec.stats = ExperimentStats{};
            spec.stats.mean = false;
            for (const auto& e : j["statistics"]) {
                std::string s = e.get<std::string>();
                auto paren = [&](const char* name, double& out) {
                    std::string pre = std::string(name) + "(";
                    if (s.rfind(pre, 0) != 0 || s.empty() || s.back() != ')') return false;
                    out = parse_num(s.substr(pre.size(), s.size() - pre.size() - 1),
                                    std::string(name) + " argument");
                    return true;
                };
                double arg = 0;
                if (s == "mean")
                    spec.stats.mean = true;
                else if (s == "variance")
                    spec.stats.variance = true;
                else if (s == "quantiles")
                    spec.stats.quantiles = true;
                else if (s == "ratios")
                    spec.stats.ratios = true;
                else if (s == "greedy")
                    spec.stats.greedy = true;
                else if (s == "distinct")
                    spec.stats.distinct = true;
                else if (paren("tail_check", arg))
                    spec.stats.tail_eps = arg;
                else if (paren("coupling_check", arg))
                    spec.stats.coupling_alpha = arg;
                else
                    throw ParseError("unknown statistic: '" + s + "'");
            }
        } else {
            spec.stats.mean = spec.stats.variance = spec.stats.ratios = true;
        }
    } catch (const ParseError&) {
        throw;
    } catch (const json::exception& e) {
        throw ParseError("bad spec field: " + std::string(e.what()));
    }
    return spec;
}

}  // namespace lislab
