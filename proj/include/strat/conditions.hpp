#pragma once

// Regularity conditions for a pair of strata (lower, upper) at a base point of
// the lower one, decided from sampled wings:
//   w   delta(T_y lower, T_x upper) <= C |x - y|
//   a   delta(T_y0 lower, T_x upper) -> 0
//   b   (a) together with delta(secant, T_x upper) -> 0
//   af  (a) for the level tangents of f
//   wf  (w) for the level tangents of f

#include "strat/limits.hpp"

#include <optional>
#include <string>
#include <vector>

namespace strat {

enum class Condition { W, A, B, AF, WF };
enum class Verdict { Holds, Fails, Inconclusive };

std::string to_string(Condition c);
std::string to_string(Verdict v);
/// "w", "a", "b", "af", "wf".
Condition parse_condition(const std::string& s);

struct ConditionParams {
    /// Overrides the scene grid when set.
    std::optional<Grid> grid;
    int wings = 8;
    std::uint64_t seed = 1;
    Real slope_tol = 0.1L;
    Real b_gap = 0.05L;
    /// g below this everywhere counts as identically zero.
    Real zero_level = 1e-8L;
    /// Keep t0 at most this fraction of the distance to other lower strata.
    Real clearance = 0.25L;
};

struct WingTrace {
    std::string label;
    std::vector<Real> t;
    std::vector<Real> g;
    std::vector<Vec> x;
    std::vector<Vec> y;
    LimitVerdict limit;
    /// This wing alone forces Fails.
    bool witness = false;
};

struct ConditionReport {
    Condition condition = Condition::W;
    std::string lower;
    std::string upper;
    Vec base;
    Verdict verdict = Verdict::Inconclusive;
    /// Largest bound over the wings (w, wf) or largest limiting gap (a, b, af).
    Real c = 0;
    /// Most negative fitted slope over the wings.
    Real slope = 0;
    Grid grid;
    int wings_requested = 0;
    int wings_failed = 0;
    std::string diagnostic;
    std::vector<WingTrace> traces;

    /// Key: value lines in a fixed order.
    std::string str() const;
    /// Index of the first wing supporting a Fails verdict, or -1.
    int witness() const;
};

/// Sampled data a checker works on.
struct PairContext {
    const Stratification* strat = nullptr;
    int lower = -1;
    int upper = -1;
    const FunctionOnSpace* f = nullptr;
    const std::vector<ExplicitWing>* explicit_wings = nullptr;
    Grid grid;
};

PairContext pair_context(const Scene& scene, const std::string& lower, const std::string& upper);

ConditionReport check_condition(Condition c, const PairContext& ctx, const Vec& y0, const ConditionParams& params = {});

inline ConditionReport check_w(const PairContext& ctx, const Vec& y0, const ConditionParams& p = {})
{
    return check_condition(Condition::W, ctx, y0, p);
}
inline ConditionReport check_a(const PairContext& ctx, const Vec& y0, const ConditionParams& p = {})
{
    return check_condition(Condition::A, ctx, y0, p);
}
inline ConditionReport check_b(const PairContext& ctx, const Vec& y0, const ConditionParams& p = {})
{
    return check_condition(Condition::B, ctx, y0, p);
}
inline ConditionReport check_af(const PairContext& ctx, const Vec& y0, const ConditionParams& p = {})
{
    return check_condition(Condition::AF, ctx, y0, p);
}
inline ConditionReport check_wf(const PairContext& ctx, const Vec& y0, const ConditionParams& p = {})
{
    return check_condition(Condition::WF, ctx, y0, p);
}

struct ScanResult {
    std::vector<Vec> base_points;
    std::vector<ConditionReport> reports;
    /// Indices into base_points whose verdict is Fails.
    std::vector<int> failing;
    int inconclusive = 0;
    Real failing_fraction() const;
};

/// Runs the checker at `base_grid` sampled points of the lower stratum (or at
/// the given points). Work is spread over `threads` workers; the result does
/// not depend on the thread count.
ScanResult scan_bad_locus(Condition c, const PairContext& ctx, int base_grid, const ConditionParams& params = {},
                          unsigned threads = 0, const std::vector<Vec>* points = nullptr);

}  // namespace strat
