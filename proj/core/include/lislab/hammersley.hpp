#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lislab/distributions.hpp"

namespace lislab {

enum class FieldMode {
    superposition,  // N ~ Poisson(t) points, each marked with an atom draw
    per_row,        // independent Poisson(t p_i) rows up to a tail cutoff
};

// Poisson field on [0,t] x support; row i carries intensity t * p_i.
struct PoissonField {
    double t = 0;
    // occupied rows, ascending; first = atom value, second = sorted abscissas.
    // Keys are doubles so that deep power-log draws survive unharmed.
    std::vector<std::pair<double, std::vector<double>>> rows;
    double max_row = -1;   // largest occupied row, -1 when empty
    double omitted_mass = 0;  // per_row mode: expected points above the cutoff

    std::size_t total_points() const;
    std::vector<std::pair<double, double>> planar_points() const;  // (x, row)
};

PoissonField sample_field(const DiscretePmf& d, double t, Rng& rng,
                          FieldMode mode = FieldMode::superposition);

// One bulk update.  Both inputs ascending.  Every particle jumps to the
// leftmost not-yet-consumed point at or below it (consuming every point it
// passes); one leftover point beyond the last particle creates a particle.
struct RowStep {
    std::vector<double> particles;
    bool created = false;
};
RowStep evolve_row(const std::vector<double>& particles, const std::vector<double>& points);

// Run the particle system over all rows with no sources or sinks; the final
// particle count equals the LIS of the field.
long long run_plain(const PoissonField& field);

// Source/sink-coupled run.  Sources: a PPP(alpha) initial configuration on
// [0,t].  Sinks: row i carries a point at abscissa 0 with probability
// p_i/(p_i+alpha); a particle landing on it leaves the system.  Rows are
// processed from the bottom of the support up to max(sink cutoff, top
// occupied row), giving the pathwise sandwich
//     min(h_count, sum_creations) <= lis <= h_count + sum_sinks .
struct CouplingOutcome {
    long long lis = 0;
    long long h_count = 0;
    long long sum_sinks = 0;      // rows whose sink indicator fired
    long long sum_creations = 0;  // rows that created a particle
    long long rows_processed = 0;
    long long sink_cutoff = 0;
    double sink_truncation = 0;  // tail(cutoff)/alpha
    std::uint64_t seed = 0;
    std::vector<unsigned char> sink_head, creation_head;  // indicators, first rows

    long long upper() const { return h_count + sum_sinks; }
    long long lower() const { return h_count < sum_creations ? h_count : sum_creations; }
};
CouplingOutcome run_coupled(const DiscretePmf& d, double t, double alpha, std::uint64_t seed,
                            int head_rows = 0);

// Single-row equilibrium step: particles ~ PPP(alpha), a sink with probability
// rho/(rho+alpha), row points ~ PPP(rho).  Returns the outgoing configuration,
// whose law matches the incoming one (the queueing reversibility this system
// inherits); unit tests verify that empirically.
struct BurkeStep {
    std::vector<double> next_particles;
    bool sink = false;
    bool creation = false;
};
BurkeStep burke_row(double rho, double alpha, double t, Rng& rng);

// Full per-row record of one run, for inspection / the CLI trajectory dump.
// alpha <= 0 runs the plain system (no sources, no sinks).
struct Trajectory {
    double t = 0, alpha = 0;
    PoissonField field;
    std::vector<double> sources;
    std::vector<long long> sink_rows, creation_rows, absorbed_rows;
    std::vector<std::pair<long long, std::vector<double>>> states;  // particles after each row
    long long lis = 0;
    long long h_count = 0;
};
Trajectory run_trajectory(const DiscretePmf& d, double t, double alpha, std::uint64_t seed);

}  // namespace lislab
