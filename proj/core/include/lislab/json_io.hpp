#pragma once

#include <string>

#include "lislab/montecarlo.hpp"

namespace lislab {

std::string json_escape(const std::string& s);

// LISLAB_SEED env var when set (must be an unsigned integer), else kDefaultSeed.
std::uint64_t default_master_seed();

// Accepts either a JSON descriptor ({"family":"geometric","p":0.5}, ...) or
// the inline form family:param[,param]:
//   geometric:0.5   poisson:1   power_log:2.2,0   borderline_power_log:-3
//   finite_uniform:10   explicit:1=0.5,2=0.5   mixed:RHO1[,nested inline]
// Throws ParseError with a one-line reason.
AnyDistribution parse_distribution(const std::string& text);

// Canonical JSON descriptor for any distribution (round-trips through
// parse_distribution).
std::string distribution_to_json(const AnyDistribution& d);

// Experiment file: {"distribution": <descriptor or inline string>,
// "n_grid": [...], "replicates": N, "master_seed": S, "jobs": J,
// "statistics": ["mean","variance","quantiles","ratios","greedy","distinct",
//                "tail_check(0.5)","coupling_check(0.3)"]}
ExperimentSpec parse_experiment_spec(const std::string& text);

}  // namespace lislab
