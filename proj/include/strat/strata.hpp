#pragma once

// Strata: implicit pieces {p_i = 0, g_j > 0} of a polynomial set, parametric
// images of open boxes, and the queries every condition checker relies on
// (tangent spaces, level tangents, membership, projection, sampling).

#include "strat/expr.hpp"
#include "strat/polynomial.hpp"
#include "strat/subspace.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace strat {

/// Axis-aligned box; the sampling window of a scene and the domain of a
/// parametric stratum.
struct Box {
    Vec lo;
    Vec hi;

    static Box cube(int n, Real half_width);
    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const Vec& x, Real margin = 0) const;
    Real diameter() const { return (hi - lo).norm(); }
    Vec random_point(Rng& rng) const;
};

class ImplicitStratum {
public:
    ImplicitStratum(int ambient_dim, std::vector<Polynomial> equations, std::vector<Expression> inequalities,
                    int expected_dim);

    int ambient_dim() const { return n_; }
    int dim() const { return k_; }
    const std::vector<Polynomial>& equations() const { return equations_; }
    const std::vector<Expression>& inequalities() const { return inequalities_; }

    Vec residuals(const Vec& x) const;
    /// One gradient row per equation.
    Mat jacobian(const Vec& x) const;
    /// Smallest inequality value (+inf when there are none). Throws DomainError.
    Real min_inequality(const Vec& x) const;
    /// Index of the smallest inequality and its gradient.
    Vec min_inequality_gradient(const Vec& x) const;

private:
    int n_;
    int k_;
    std::vector<Polynomial> equations_;
    std::vector<Expression> inequalities_;
    std::vector<RealPolynomial> real_eqs_;
    std::vector<std::vector<Expression>> ineq_grads_;
};

class ParametricStratum {
public:
    ParametricStratum(int ambient_dim, Box domain, std::vector<Expression> maps);

    int ambient_dim() const { return n_; }
    int dim() const { return domain_.dim(); }
    const Box& domain() const { return domain_; }
    const std::vector<Expression>& maps() const { return maps_; }

    Vec map(const Vec& u) const;
    /// n x k differential.
    Mat differential(const Vec& u) const;

private:
    int n_;
    Box domain_;
    std::vector<Expression> maps_;
    std::vector<std::vector<Expression>> partials_;  // [coord][param]
};

struct Stratum {
    std::string name;
    std::variant<ImplicitStratum, ParametricStratum> geometry;
    /// Connectedness is recorded as declared; it is not decided here.
    bool declared_connected = true;

    static Stratum point(std::string name, const Vec& c);

    int dim() const;
    int ambient_dim() const;
    bool is_implicit() const { return std::holds_alternative<ImplicitStratum>(geometry); }
    const ImplicitStratum& implicit() const { return std::get<ImplicitStratum>(geometry); }
    const ParametricStratum& parametric() const { return std::get<ParametricStratum>(geometry); }
    /// For point strata, the point.
    std::optional<Vec> as_point() const;
};

/// A point of a stratum, with its parameter preimage for parametric strata.
struct StratumPoint {
    Vec x;
    std::optional<Vec> u;
};

struct NewtonOptions {
    int max_iterations = 25;
    /// Step size (relative to `scale`) below which the iteration has converged.
    Real step_tolerance = 1e-12L;
    Real residual_tolerance = 1e-9L;
};

/// Minimum-norm Newton projection onto the equation set of an implicit
/// stratum. Inequalities are not enforced. std::nullopt when it fails.
std::optional<Vec> newton_project(const ImplicitStratum& s, Vec start, Real scale, const NewtonOptions& opt = {});

/// Preimage search for a parametric stratum: Gauss-Newton on |phi(u) - x|
/// from `hint` or, without a hint, from the best point of a seed grid.
std::optional<Vec> locate_preimage(const ParametricStratum& s, const Vec& x, const std::optional<Vec>& hint = {});

/// Orthonormal tangent space. Throws RankDrop when the differential rank is
/// not the stratum dimension.
Subspace tangent_at(const Stratum& s, const Vec& x, const std::optional<Vec>& preimage = {});
Subspace tangent_at(const Stratum& s, const StratumPoint& p);

bool membership(const Stratum& s, const Vec& x, Real tol = 1e-9L);

/// Nearest point of s to x, searched locally from `near` (a point of s).
std::optional<StratumPoint> nearest_point(const Stratum& s, const Vec& x, const StratumPoint& near);

/// Random points of s inside the box, deterministic in the generator state.
std::vector<StratumPoint> sample_stratum(const Stratum& s, const Box& box, int count, Rng& rng,
                                         int max_attempts_per_point = 60);

/// Parameter of the point of the closure of s nearest to y, searched on a
/// grid that includes points just inside the domain faces, then polished.
Vec closest_parameter(const ParametricStratum& s, const Vec& y);

/// A point x of s with |x - y| in [r/2, 2r]: random directions from y
/// projected onto the equations (implicit), or a bisection along a parameter
/// segment leaving the preimage of y (parametric).
std::optional<StratumPoint> approach_point(const Stratum& s, const Vec& y, Real r, Rng& rng, int tries = 32);

/// Sampled closure test: s has points near y at radii r and r/10.
bool near_closure(const Stratum& s, const Vec& y, Real r, Rng& rng);

/// A scalar function on the ambient space together with optional declared
/// ranks of its restriction to named strata.
class FunctionOnSpace {
public:
    FunctionOnSpace(Expression f, int ambient_dim, std::map<std::string, int> declared_rank = {});

    const Expression& expression() const { return f_; }
    int ambient_dim() const { return n_; }
    const std::map<std::string, int>& declared_ranks() const { return declared_; }
    std::optional<int> declared_rank(const std::string& stratum) const;
    void declare_rank(const std::string& stratum, int rank) { declared_[stratum] = rank; }

    Real value(const Vec& x) const { return eval(f_, x); }
    Vec gradient(const Vec& x) const;

private:
    Expression f_;
    int n_;
    std::vector<Expression> grad_;
    std::map<std::string, int> declared_;
};

/// T_{x,f} = ker d(f|_S)(x).
Subspace level_tangent_at(const Stratum& s, const FunctionOnSpace& f, const StratumPoint& p);
/// 0 or 1.
int rank_at(const Stratum& s, const FunctionOnSpace& f, const StratumPoint& p);

}  // namespace strat
