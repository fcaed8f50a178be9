#pragma once

// Scene files: a stratification together with an optional function, explicit
// approach curves, sampling grid and base points. Stored as JSON; numbers are
// written as exact text so that a save/load round trip is lossless.

#include "strat/stratification.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace strat {

/// Geometric grid t_i = t0 * q^i, i = 0..m-1.
struct Grid {
    Real t0 = 0.1L;
    Real q = 0.6L;
    int m = 24;

    std::vector<Real> values() const;
    bool operator==(const Grid&) const = default;
};

/// A user-supplied approach curve toward a lower stratum. Its map is written
/// in the base point coordinates and the wing parameter t (Symbols::wing):
/// either the point x(y, t) itself or, for a parametric upper stratum, its
/// parameter u(y, t).
struct ExplicitWing {
    enum class Kind { Point, Param };
    std::string lower;
    std::string upper;
    Kind kind = Kind::Point;
    std::vector<Expression> map;
    /// Explicit decreasing t values; empty means the scene grid.
    std::vector<Real> t_values;
    std::string label;
    /// When set, the wing is only used at this base point.
    std::optional<Vec> base;
};

struct Scene {
    std::string name;
    Stratification strat;
    std::optional<FunctionOnSpace> f;
    std::vector<ExplicitWing> wings;
    std::optional<Grid> grid;
    /// Base points per stratum name.
    std::map<std::string, std::vector<Vec>> base_points;
    /// Source polynomial for engine-built scenes.
    std::optional<Polynomial> polynomial;

    explicit Scene(Stratification s) : strat(std::move(s)) {}
    int ambient_dim() const { return strat.ambient_dim(); }
};

Scene scene_from_json(const std::string& text);
std::string scene_to_json(const Scene& scene);
Scene load_scene(const std::string& path);
void save_scene(const Scene& scene, const std::string& path);

/// A scene whose strata consist of one given point set each: returns the
/// same scene with stratification replaced (function, wings and base points
/// whose strata still exist are kept).
Scene with_stratification(const Scene& scene, Stratification s);

/// Image of the scene under x -> lambda * Q x + b, with Q orthogonal and all
/// entries exact rationals. Grids and wing parameters scale with lambda.
Scene transform_scene(const Scene& scene, const std::vector<std::vector<Rational>>& q, const std::vector<Rational>& b,
                      const Rational& lambda);

/// Exact rational rotation (I - A)(I + A)^{-1} for the skew matrix A built
/// from the given entries (1 entry in R^2, 3 in R^3).
std::vector<std::vector<Rational>> cayley_rotation(int n, const std::vector<Rational>& skew);

}  // namespace strat
