#pragma once

// Approach curves ("wings") toward a base point and the classification of
// sampled asymptotics g(t), t -> 0+.

#include "strat/scene.hpp"

#include <string>
#include <vector>

namespace strat {

enum class LimitClass { ConvergesToZero, Bounded, Diverges, Inconclusive };

std::string to_string(LimitClass c);

struct LimitVerdict {
    LimitClass cls = LimitClass::Inconclusive;
    /// Least-squares exponent of log g against log t (+inf for vanishing g).
    Real slope = 0;
    /// Largest enveloped value over the fitted tail.
    Real bound = 0;
    /// RMS residual of the fit.
    Real residual = 0;
};

struct LimitOptions {
    Real slope_tol = 0.1L;
    Real max_residual = 0.5L;
    /// Tails below this are treated as exact zeros.
    Real zero_floor = 1e-13L;
};

/// Fits the last half of the samples after a sliding sup over 3 neighbours
/// (the final sample, whose window is truncated, only enters via the sup).
/// Needs at least 8 samples with t strictly decreasing (TooFewSamples, Error).
LimitVerdict classify_limit(const std::vector<Real>& t, const std::vector<Real>& g, const LimitOptions& opt = {});

/// (x - y) / |x - y|; Error when x == y.
Vec secant_direction(const Vec& x, const Vec& y);

struct WingPoint {
    Real t = 0;
    StratumPoint x;  // on the upper stratum
    StratumPoint y;  // nearest point of the lower stratum
};

struct WingSample {
    std::string label;
    StratumPoint base;
    std::vector<WingPoint> points;
    int failures = 0;
};

/// Random-direction wing from y0 into `upper` along the grid t values.
/// Throws WingNotFound when more than half of the grid fails.
WingSample sample_wing(const Stratum& lower, const Stratum& upper, const StratumPoint& y0, const std::vector<Real>& t,
                       std::uint64_t seed, const std::string& label = "");

/// Wing given by a closed-form map; its own t values override `t`.
WingSample explicit_wing(const Stratum& lower, const Stratum& upper, const StratumPoint& y0, const ExplicitWing& w,
                         const std::vector<Real>& t);

/// CSV with columns t, g, log t, log g.
std::string samples_csv(const std::vector<Real>& t, const std::vector<Real>& g);

}  // namespace strat
