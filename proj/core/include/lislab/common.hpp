#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace lislab {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid construction parameters or out-of-domain arguments.
struct DomainError : Error {
    using Error::Error;
};

// Atom query outside the support of a distribution.
struct OutOfSupport : Error {
    using Error::Error;
};

// Continuous interpolation requested for a family that has none.
struct NoInterpolation : Error {
    using Error::Error;
};

// Guarded quadratic oracle invoked past its size limit.
struct TooLarge : Error {
    using Error::Error;
};

// Planar input with coinciding x-coordinates.
struct DuplicateAbscissa : Error {
    using Error::Error;
};

// Solver could not bracket/refine a root or minimum within its budget.
struct SolverFailure : Error {
    using Error::Error;
};

// Malformed descriptor / spec file.
struct ParseError : Error {
    using Error::Error;
};

// Default master seed for every entry point that does not receive one.
inline constexpr std::uint64_t kDefaultSeed = 12345;

// SplitMix64 finalizer; used as the stable seed-derivation hash.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Replicate r of an experiment cell with sample size n draws from the engine
// seeded with derive_seed(master, n, r).  The chain is fixed and documented so
// that any replicate can be replayed in isolation.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t n, std::uint64_t r) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ n);
    h = splitmix64(h ^ r);
    return h;
}

// Thin engine wrapper: all randomness in the library flows through this type,
// seeded explicitly.  uniform() maps the top 53 bits to [0,1).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Exponential(rate) via inversion.
    double exponential(double rate) {
        double u = uniform();
        return -std::log1p(-u) / rate;
    }

    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
};

// 12 significant digits, scientific: the only float format used in outputs.
std::string fmt_sci(double x);

}  // namespace lislab
