#include "strat/subspace.hpp"

#include <algorithm>
#include <cmath>

namespace strat {

Subspace::Subspace(int ambient_dim) : ambient_(ambient_dim), basis_(0, ambient_dim) {}

Subspace Subspace::from_orthonormal_rows(Mat basis)
{
    Subspace s(static_cast<int>(basis.cols()));
    s.basis_ = std::move(basis);
    return s;
}

Subspace Subspace::whole(int n) { return from_orthonormal_rows(Mat::Identity(n, n)); }

Vec Subspace::project(const Vec& v) const
{
    if (dim() == 0) return Vec::Zero(ambient_);
    return basis_.transpose() * (basis_ * v);
}

Real Subspace::distance(const Vec& v) const { return (v - project(v)).norm(); }

Subspace orthonormalize(const std::vector<Vec>& vectors, int n, Real tol)
{
    Real scale = 0;
    for (const auto& v : vectors) {
        if (v.size() != n) throw Error("orthonormalize: vectors of mixed ambient dimension");
        scale = std::max(scale, v.norm());
    }
    std::vector<Vec> kept;
    for (const auto& v : vectors) {
        Vec r = v;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : kept) r -= q.dot(r) * q;
        Real nr = r.norm();
        if (scale == 0 || nr < tol * scale) continue;
        kept.push_back(r / nr);
        if (static_cast<int>(kept.size()) == n) break;
    }
    Mat b(static_cast<Eigen::Index>(kept.size()), n);
    for (std::size_t i = 0; i < kept.size(); ++i) b.row(static_cast<Eigen::Index>(i)) = kept[i].transpose();
    return Subspace::from_orthonormal_rows(std::move(b));
}

NullSpace null_space(const Mat& rows, Real tol)
{
    const auto n = rows.cols();
    if (rows.rows() == 0) return {Subspace::whole(static_cast<int>(n)), 0};
    Eigen::JacobiSVD<Mat> svd(rows, Eigen::ComputeFullV);
    const Vec& s = svd.singularValues();
    int rank = 0;
    Real smax = s.size() ? s(0) : 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (smax > 0 && s(i) > tol * smax) ++rank;
    const Mat& v = svd.matrixV();
    Mat b(n - rank, n);
    for (Eigen::Index i = rank; i < n; ++i) b.row(i - rank) = v.col(i).transpose();
    return {Subspace::from_orthonormal_rows(std::move(b)), rank};
}

Real delta(const Subspace& t, const Subspace& tp)
{
    if (t.ambient_dim() != tp.ambient_dim())
        throw Error("delta: subspaces live in different ambient spaces");
    if (t.dim() == 0) return 0;
    // Rows of T's basis with their T' components removed; the operator norm
    // of v -> (I - P')v restricted to T is the top singular value.
    Mat residual = t.basis();
    if (tp.dim() > 0) residual -= (t.basis() * tp.basis().transpose()) * tp.basis();
    Real top;
    if (residual.rows() == 1) {
        top = residual.row(0).norm();
    } else {
        Eigen::JacobiSVD<Mat> svd(residual);
        top = svd.singularValues()(0);
    }
    return std::clamp<Real>(top, 0, 1);
}

Real relative_tangential_norm(const Vec& g, const Subspace& t)
{
    Real ng = g.norm();
    if (ng == 0 || t.dim() == 0) return 0;
    return (t.basis() * g).norm() / ng;
}

Subspace kernel_of_covector(const Vec& g, const Subspace& t, Real tol)
{
    if (g.size() != t.ambient_dim()) throw Error("kernel_of_covector: dimension mismatch");
    const int k = t.dim();
    if (k == 0) return t;
    Vec coords = t.basis() * g;  // restriction of g to T in basis coordinates
    Real ng = g.norm();
    Real nc = coords.norm();
    if (ng == 0 || nc <= tol * ng) return t;
    Vec w = coords / nc;
    // Householder reflection sending w to +-e_j; its other columns span w-perp.
    Eigen::Index j = 0;
    w.cwiseAbs().maxCoeff(&j);
    Vec v = w;
    v(j) += w(j) >= 0 ? 1 : -1;
    Real vv = v.squaredNorm();
    Mat h = Mat::Identity(k, k) - (2 / vv) * v * v.transpose();
    Mat ker(k - 1, t.ambient_dim());
    Eigen::Index r = 0;
    for (Eigen::Index c = 0; c < k; ++c) {
        if (c == j) continue;
        ker.row(r++) = h.col(c).transpose() * t.basis();
    }
    return Subspace::from_orthonormal_rows(std::move(ker));
}

}  // namespace strat
