#pragma once

// Shared numeric types, error hierarchy and the deterministic random source
// used by every sampler in the library.

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace strat {

// Extended precision is needed for the exponential scenes: points such as
// (1, exp(-1000)) must stay representable with nonzero coordinates.
using Real = long double;
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by expression evaluation outside the natural domain (log of a
/// non-positive number, division by zero, sign of zero, ...).
class DomainError : public Error {
public:
    DomainError(std::string subexpr, std::string point, const std::string& what)
        : Error(what + " in '" + subexpr + "' at " + point),
          subexpression(std::move(subexpr)), at(std::move(point)) {}
    std::string subexpression;
    std::string at;
};

class ParseError : public Error {
public:
    ParseError(int line_, int column_, const std::string& msg)
        : Error("parse error at " + std::to_string(line_) + ":" + std::to_string(column_) + ": " + msg),
          line(line_), column(column_) {}
    int line;
    int column;
};

/// Jacobian rank differs from the declared stratum dimension.
class RankDrop : public Error {
public:
    using Error::Error;
};

class WingNotFound : public Error {
public:
    using Error::Error;
};

class TooFewSamples : public Error {
public:
    using Error::Error;
};

class UnsupportedSingularLocus : public Error {
public:
    using Error::Error;
};

class UnsupportedCriticalLocus : public Error {
public:
    using Error::Error;
};

class NotSquareFree : public Error {
public:
    using Error::Error;
};

/// SplitMix64 based generator. Produces the same stream on every platform,
/// unlike the std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    Real uniform() { return static_cast<Real>(next() >> 11) * 0x1.0p-53L; }
    Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform(); }
    Real normal();
    Vec unit_vector(int n);

private:
    std::uint64_t state_;
};

/// Mixes several integers into one seed; used to derive per-wing, per-base
/// point and per-entry seeds from a master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

std::string format_point(const Vec& x);
std::string format_real(Real v, int digits = 12);

}  // namespace strat
