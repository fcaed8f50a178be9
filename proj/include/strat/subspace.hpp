#pragma once

// Linear subspaces of R^n carried by an orthonormal row basis, and the
// asymmetric distance delta(T, T') = sup_{v in T, |v| = 1} d(v, T').

#include "strat/core.hpp"

#include <vector>

namespace strat {

inline constexpr Real kRankTolerance = 1e-9L;

class Subspace {
public:
    /// The zero subspace of R^n.
    explicit Subspace(int ambient_dim = 0);
    /// Takes ownership of a k x n basis whose rows are already orthonormal.
    static Subspace from_orthonormal_rows(Mat basis);
    static Subspace whole(int n);

    int ambient_dim() const { return ambient_; }
    int dim() const { return static_cast<int>(basis_.rows()); }
    const Mat& basis() const { return basis_; }

    /// Orthogonal projection of v onto the subspace.
    Vec project(const Vec& v) const;
    /// Distance from v to the subspace.
    Real distance(const Vec& v) const;

private:
    int ambient_;
    Mat basis_;  // dim x ambient
};

/// Gram-Schmidt with re-orthogonalisation. A vector whose residual after
/// projection is below tol times the largest input norm is dropped.
Subspace orthonormalize(const std::vector<Vec>& vectors, int ambient_dim, Real tol = kRankTolerance);

/// Orthogonal complement of the row space of `rows` (an m x n matrix),
/// with the rank decided by singular values relative to the largest.
struct NullSpace {
    Subspace kernel;
    int rank;
};
NullSpace null_space(const Mat& rows, Real tol = kRankTolerance);

Real delta(const Subspace& t, const Subspace& tp);

/// {v in T : <g, v> = 0}; T itself when the restriction of g to T vanishes
/// relative to |g| (rank 0).
Subspace kernel_of_covector(const Vec& g, const Subspace& t, Real tol = kRankTolerance);

/// Norm of the component of g tangent to T divided by |g| (0 for g = 0).
Real relative_tangential_norm(const Vec& g, const Subspace& t);

}  // namespace strat
