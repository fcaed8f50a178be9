#pragma once

// Building and refining stratifications of V(p) for a square-free polynomial
// in two or three variables, and certifying them against a set of conditions.

#include "strat/conditions.hpp"

#include <string>
#include <vector>

namespace strat {

struct DecompositionOptions {
    /// Samples of the smooth part used to find its components.
    int component_samples = 0;  // 0: 600 in R^2, 2500 in R^3
    std::uint64_t seed = 1;
};

/// Strata of V(p): the smooth part cut into coordinate-sign components, the
/// singular locus as isolated points or coordinate axes (cut where they leave
/// the closure of the smooth part), with sampled frontier relations.
/// Throws NotSquareFree or UnsupportedSingularLocus.
Stratification initial_decomposition(const Polynomial& p, const Box& box, const DecompositionOptions& opt = {});

/// Scene wrapper of initial_decomposition carrying the polynomial.
Scene initial_scene(const Polynomial& p, const Box& box, const DecompositionOptions& opt = {});

struct StratifyParams {
    ConditionParams condition;
    int base_grid = 20;
    /// Fraction of the box diameter.
    Real cluster_radius = 0.05L;
    int max_rounds = 5;
    unsigned threads = 0;
};

enum class RefineStatus { Converged, NonConvergence };
std::string to_string(RefineStatus s);

struct PairScan {
    Condition condition = Condition::W;
    std::string lower;
    std::string upper;
    int base_points = 0;
    int failing = 0;
    /// Base points with no wing into the upper stratum.
    int absent = 0;
    int inconclusive = 0;
};

struct RefinementState {
    Scene scene;
    /// Scans of the last round.
    std::vector<PairScan> scans;
    /// Bad points per lower stratum found in the last round.
    std::map<std::string, std::vector<Vec>> pending;
    /// Dimension being processed when the loop stopped.
    int level = 0;
    int rounds = 0;
    RefineStatus status = RefineStatus::Converged;
    /// One line per split or per unresolved pair.
    std::vector<std::string> log;

    explicit RefinementState(Scene s) : scene(std::move(s)) {}
    Real failing_fraction(const std::string& lower) const;
};

/// Decreasing-dimension refinement: scan every pair, split isolated bad
/// points (condition failures and points outside the upper closure) off the
/// lower stratum, redeclare the frontier, repeat.
RefinementState refine(const Scene& scene, const std::vector<Condition>& conditions, const StratifyParams& params = {});

/// Splits off isolated critical points of f on each stratum.
/// Throws UnsupportedCriticalLocus for critical curves.
Stratification rank_partition(const Stratification& s, const FunctionOnSpace& f);

enum class CertificateStatus { Certified, Refuted, Inconclusive };
std::string to_string(CertificateStatus s);

struct Certificate {
    CertificateStatus status = CertificateStatus::Inconclusive;
    std::vector<ConditionReport> reports;

    /// condition,lower,upper,base,verdict,C,slope per row.
    std::string csv() const;
    std::string summary() const;
};

/// Every frontier pair (transitive) under every condition at base_grid
/// sampled points of the lower stratum.
Certificate certify(const Scene& scene, const std::vector<Condition>& conditions, int base_grid,
                    const ConditionParams& params = {}, unsigned threads = 0);

/// Splits a stratum at one of its points: a curve becomes two half-curves and
/// the point, a higher-dimensional stratum loses the point. Returns the new
/// stratification (frontier redeclared by sampled closure tests).
Stratification split_at(const Stratification& s, int stratum, const Vec& c, const std::string& point_name,
                        std::uint64_t seed = 1);

/// Sampled closure relation for all pairs of strata with decreasing dimension.
std::vector<FrontierPair> sampled_frontier(const Stratification& s, std::uint64_t seed = 1);

}  // namespace strat
