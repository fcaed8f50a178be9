#include "strat/strata.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace strat {

namespace {

constexpr Real kEps = std::numeric_limits<Real>::epsilon();

// Minimum-norm solution of J d = -r, ignoring directions whose singular
// value is negligible relative to the largest.
Vec min_norm_step(const Mat& j, const Vec& r)
{
    Eigen::JacobiSVD<Mat> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& s = svd.singularValues();
    Real smax = s.size() ? s(0) : 0;
    Vec d = Vec::Zero(j.cols());
    if (smax == 0) return d;
    Vec ur = svd.matrixU().transpose() * r;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > 1e-14L * smax) d -= (ur(i) / s(i)) * svd.matrixV().col(i);
    return d;
}

bool strictly_inside(const Box& b, const Vec& u)
{
    for (int i = 0; i < b.dim(); ++i)
        if (!(u(i) > b.lo(i) && u(i) < b.hi(i))) return false;
    return true;
}

bool inequalities_hold(const ImplicitStratum& s, const Vec& x)
{
    try {
        return s.min_inequality(x) > 0;
    } catch (const DomainError&) {
        return false;
    }
}

Real residual_norm(const ParametricStratum& s, const Vec& u, const Vec& x)
{
    try {
        Real r = (s.map(u) - x).norm();
        return std::isfinite(r) ? r : std::numeric_limits<Real>::infinity();
    } catch (const DomainError&) {
        return std::numeric_limits<Real>::infinity();
    }
}

// Gauss-Newton with step halving on |phi(u) - x|, kept inside the open domain.
Vec gauss_newton(const ParametricStratum& s, Vec u, const Vec& x, int iterations = 60)
{
    Real r = residual_norm(s, u, x);
    for (int it = 0; it < iterations && r > 0; ++it) {
        Vec step;
        try {
            step = min_norm_step(s.differential(u), s.map(u) - x);
        } catch (const DomainError&) {
            break;
        }
        bool moved = false;
        for (int h = 0; h < 40; ++h) {
            Vec cand = u + step;
            if (strictly_inside(s.domain(), cand)) {
                Real rc = residual_norm(s, cand, x);
                if (rc < r) {
                    u = cand;
                    r = rc;
                    moved = true;
                    break;
                }
            }
            step /= 2;
        }
        if (!moved || step.norm() <= 4 * kEps * (1 + u.norm())) break;
    }
    return u;
}

}  // namespace

// --- Box -----------------------------------------------------------------------

Box Box::cube(int n, Real half_width)
{
    return {Vec::Constant(n, -half_width), Vec::Constant(n, half_width)};
}

bool Box::contains(const Vec& x, Real margin) const
{
    if (x.size() != lo.size()) return false;
    for (int i = 0; i < dim(); ++i)
        if (!(x(i) >= lo(i) + margin && x(i) <= hi(i) - margin)) return false;
    return true;
}

Vec Box::random_point(Rng& rng) const
{
    Vec x(dim());
    for (int i = 0; i < dim(); ++i) x(i) = rng.uniform(lo(i), hi(i));
    return x;
}

// --- ImplicitStratum -------------------------------------------------------------

ImplicitStratum::ImplicitStratum(int ambient_dim, std::vector<Polynomial> equations,
                                 std::vector<Expression> inequalities, int expected_dim)
    : n_(ambient_dim), k_(expected_dim), equations_(std::move(equations)), inequalities_(std::move(inequalities))
{
    if (k_ < 0 || k_ > n_) throw Error("stratum dimension out of range");
    for (const auto& p : equations_) {
        if (p.nvars() != n_) throw Error("equation arity differs from the ambient dimension");
        real_eqs_.emplace_back(p);
    }
    for (const auto& g : inequalities_) {
        if (g.max_variable() >= n_) throw Error("inequality uses more variables than the ambient dimension");
        std::vector<Expression> grad;
        for (int i = 0; i < n_; ++i) grad.push_back(differentiate(g, i));
        ineq_grads_.push_back(std::move(grad));
    }
}

Vec ImplicitStratum::residuals(const Vec& x) const
{
    Vec r(static_cast<Eigen::Index>(real_eqs_.size()));
    for (std::size_t i = 0; i < real_eqs_.size(); ++i) r(static_cast<Eigen::Index>(i)) = real_eqs_[i].eval(x);
    return r;
}

Mat ImplicitStratum::jacobian(const Vec& x) const
{
    Mat j(static_cast<Eigen::Index>(real_eqs_.size()), n_);
    for (std::size_t i = 0; i < real_eqs_.size(); ++i)
        j.row(static_cast<Eigen::Index>(i)) = real_eqs_[i].gradient(x).transpose();
    return j;
}

Real ImplicitStratum::min_inequality(const Vec& x) const
{
    Real m = std::numeric_limits<Real>::infinity();
    for (const auto& g : inequalities_) m = std::min(m, eval(g, x));
    return m;
}

Vec ImplicitStratum::min_inequality_gradient(const Vec& x) const
{
    Vec grad = Vec::Zero(n_);
    Real m = std::numeric_limits<Real>::infinity();
    for (std::size_t i = 0; i < inequalities_.size(); ++i) {
        Real v = eval(inequalities_[i], x);
        if (v < m) {
            m = v;
            for (int j = 0; j < n_; ++j) grad(j) = eval(ineq_grads_[i][static_cast<std::size_t>(j)], x);
        }
    }
    return grad;
}

// --- ParametricStratum -------------------------------------------------------------

ParametricStratum::ParametricStratum(int ambient_dim, Box domain, std::vector<Expression> maps)
    : n_(ambient_dim), domain_(std::move(domain)), maps_(std::move(maps))
{
    if (static_cast<int>(maps_.size()) != n_) throw Error("parametric stratum needs one map per ambient coordinate");
    if (domain_.dim() < 1 || domain_.dim() > n_) throw Error("parametric domain dimension out of range");
    for (int j = 0; j < domain_.dim(); ++j)
        if (!(domain_.lo(j) < domain_.hi(j))) throw Error("empty parametric domain");
    for (const auto& m : maps_) {
        if (m.max_variable() >= domain_.dim()) throw Error("parametric map uses more parameters than the domain has");
        std::vector<Expression> row;
        for (int j = 0; j < domain_.dim(); ++j) row.push_back(differentiate(m, j));
        partials_.push_back(std::move(row));
    }
}

Vec ParametricStratum::map(const Vec& u) const
{
    Vec x(n_);
    for (int i = 0; i < n_; ++i) x(i) = eval(maps_[static_cast<std::size_t>(i)], u);
    return x;
}

Mat ParametricStratum::differential(const Vec& u) const
{
    Mat d(n_, dim());
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < dim(); ++j)
            d(i, j) = eval(partials_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], u);
    return d;
}

// --- Stratum -------------------------------------------------------------------

Stratum Stratum::point(std::string name, const Vec& c)
{
    const int n = static_cast<int>(c.size());
    std::vector<Polynomial> eqs;
    for (int i = 0; i < n; ++i)
        eqs.push_back(Polynomial::variable(n, i) - Polynomial::constant(n, exact_rational(c(i))));
    return {std::move(name), ImplicitStratum(n, std::move(eqs), {}, 0)};
}

int Stratum::dim() const
{
    return std::visit([](const auto& g) { return g.dim(); }, geometry);
}

int Stratum::ambient_dim() const
{
    return std::visit([](const auto& g) { return g.ambient_dim(); }, geometry);
}

std::optional<Vec> Stratum::as_point() const
{
    if (!is_implicit() || dim() != 0) return std::nullopt;
    const auto& s = implicit();
    for (const auto& p : s.equations())
        if (p.degree() > 1) return std::nullopt;
    // Affine equations: J x + r(0) = 0.
    Vec zero = Vec::Zero(s.ambient_dim());
    Mat j = s.jacobian(zero);
    Vec x = min_norm_step(j, s.residuals(zero));
    if (s.residuals(x).norm() > 1e-12L * (1 + x.norm())) return std::nullopt;
    return x;
}

// --- projections -------------------------------------------------------------------

std::optional<Vec> newton_project(const ImplicitStratum& s, Vec x, Real scale, const NewtonOptions& opt)
{
    if (s.equations().empty()) return x;
    for (int it = 0; it < opt.max_iterations; ++it) {
        Vec r = s.residuals(x);
        if (!r.allFinite()) return std::nullopt;
        Vec step = min_norm_step(s.jacobian(x), r);
        x += step;
        Real floor = 32 * kEps * (1 + x.norm());
        if (step.norm() <= std::max(opt.step_tolerance * scale, floor)) {
            Vec rf = s.residuals(x);
            if (rf.allFinite() && rf.cwiseAbs().maxCoeff() <= opt.residual_tolerance) return x;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::optional<Vec> locate_preimage(const ParametricStratum& s, const Vec& x, const std::optional<Vec>& hint)
{
    const int k = s.dim();
    std::vector<Vec> seeds;
    if (hint) {
        seeds.push_back(*hint);
    } else {
        int per = std::max(2, static_cast<int>(std::floor(std::pow(4096.0, 1.0 / k))));
        std::vector<std::pair<Real, Vec>> scored;
        std::vector<int> idx(static_cast<std::size_t>(k), 0);
        for (;;) {
            Vec u(k);
            for (int j = 0; j < k; ++j)
                u(j) = s.domain().lo(j) + (s.domain().hi(j) - s.domain().lo(j)) * (idx[static_cast<std::size_t>(j)] + 0.5L) / per;
            Real r = residual_norm(s, u, x);
            if (std::isfinite(r)) scored.emplace_back(r, u);
            int j = 0;
            while (j < k && ++idx[static_cast<std::size_t>(j)] == per) idx[static_cast<std::size_t>(j++)] = 0;
            if (j == k) break;
        }
        std::stable_sort(scored.begin(), scored.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 0; i < scored.size() && i < 4; ++i) seeds.push_back(scored[i].second);
    }
    std::optional<Vec> best;
    Real best_r = std::numeric_limits<Real>::infinity();
    for (const auto& seed : seeds) {
        if (!strictly_inside(s.domain(), seed)) continue;
        Vec u = gauss_newton(s, seed, x);
        Real r = residual_norm(s, u, x);
        if (r < best_r) {
            best_r = r;
            best = u;
        }
    }
    return best;
}

Subspace tangent_at(const Stratum& s, const Vec& x, const std::optional<Vec>& preimage)
{
    const int n = s.ambient_dim();
    if (s.is_implicit()) {
        const auto& g = s.implicit();
        if (g.dim() == 0) return Subspace(n);
        NullSpace ns = null_space(g.jacobian(x));
        if (ns.rank != n - g.dim())
            throw RankDrop("stratum '" + s.name + "': equation rank " + std::to_string(ns.rank) + " at " +
                           format_point(x) + ", expected " + std::to_string(n - g.dim()));
        return ns.kernel;
    }
    const auto& p = s.parametric();
    std::optional<Vec> u = preimage ? preimage : locate_preimage(p, x);
    if (!u) throw Error("stratum '" + s.name + "': no preimage for " + format_point(x));
    Mat d = p.differential(*u);
    std::vector<Vec> cols;
    for (int j = 0; j < p.dim(); ++j) cols.push_back(d.col(j));
    Subspace t = orthonormalize(cols, n);
    if (t.dim() != p.dim())
        throw RankDrop("stratum '" + s.name + "': differential rank " + std::to_string(t.dim()) + " at " +
                       format_point(x) + ", expected " + std::to_string(p.dim()));
    return t;
}

Subspace tangent_at(const Stratum& s, const StratumPoint& p) { return tangent_at(s, p.x, p.u); }

bool membership(const Stratum& s, const Vec& x, Real tol)
{
    if (x.size() != s.ambient_dim() || !x.allFinite()) return false;
    try {
        if (s.is_implicit()) {
            const auto& g = s.implicit();
            auto p = newton_project(g, x, 1 + x.norm());
            if (!p || (*p - x).norm() > tol) return false;
            if (s.implicit().residuals(*p).size() && g.residuals(*p).cwiseAbs().maxCoeff() > 1e-9L) return false;
            if (!inequalities_hold(g, x)) return false;
            tangent_at(s, x);
            return true;
        }
        const auto& g = s.parametric();
        auto u = locate_preimage(g, x);
        return u && residual_norm(g, *u, x) <= tol;
    } catch (const Error&) {
        return false;
    }
}

std::optional<StratumPoint> nearest_point(const Stratum& s, const Vec& x, const StratumPoint& near)
{
    try {
        if (auto c = s.as_point()) return StratumPoint{*c, std::nullopt};
        if (s.is_implicit()) {
            const auto& g = s.implicit();
            Real scale = (x - near.x).norm() + kEps * (1 + x.norm());
            auto y = newton_project(g, x, scale);
            if (!y) return std::nullopt;
            // Slide along the tangent until x - y is normal to the stratum.
            for (int it = 0; it < 8; ++it) {
                Vec d = tangent_at(s, *y).project(x - *y);
                if (d.norm() <= 1e-14L * ((x - *y).norm() + kEps)) break;
                auto next = newton_project(g, *y + d, scale);
                if (!next) break;
                y = next;
            }
            if (!inequalities_hold(g, *y)) return std::nullopt;
            return StratumPoint{*y, std::nullopt};
        }
        const auto& g = s.parametric();
        std::optional<Vec> start = near.u ? near.u : locate_preimage(g, near.x);
        if (!start) return std::nullopt;
        Vec u = gauss_newton(g, *start, x);
        return StratumPoint{g.map(u), u};
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::vector<StratumPoint> sample_stratum(const Stratum& s, const Box& box, int count, Rng& rng,
                                         int max_attempts_per_point)
{
    std::vector<StratumPoint> out;
    if (auto c = s.as_point()) {
        if (box.contains(*c)) out.push_back({*c, std::nullopt});
        return out;
    }
    const long attempts = static_cast<long>(count) * max_attempts_per_point;
    for (long a = 0; a < attempts && static_cast<int>(out.size()) < count; ++a) {
        try {
            if (s.is_implicit()) {
                const auto& g = s.implicit();
                auto p = newton_project(g, box.random_point(rng), box.diameter());
                // The margin keeps samples off neighbouring branches of the
                // equation set, where an inequality can be positive by rounding.
                if (!p || !box.contains(*p) || !(g.min_inequality(*p) > 1e-9L)) continue;
                tangent_at(s, *p);
                out.push_back({*p, std::nullopt});
            } else {
                const auto& g = s.parametric();
                Vec u = g.domain().random_point(rng);
                if (!strictly_inside(g.domain(), u)) continue;
                Vec x = g.map(u);
                if (!x.allFinite() || !box.contains(x)) continue;
                tangent_at(s, x, u);
                out.push_back({x, u});
            }
        } catch (const Error&) {
            continue;
        }
    }
    return out;
}

Vec closest_parameter(const ParametricStratum& s, const Vec& y)
{
    const int k = s.dim();
    const int per = k == 1 ? 2048 : (k == 2 ? 48 : 12);
    // Coordinates per axis: just inside both faces, then cell centres.
    std::vector<std::vector<Real>> axis(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        Real lo = s.domain().lo(j), hi = s.domain().hi(j), w = hi - lo;
        auto& a = axis[static_cast<std::size_t>(j)];
        a.push_back(lo + 1e-12L * w);
        a.push_back(hi - 1e-12L * w);
        for (int i = 0; i < per; ++i) a.push_back(lo + w * (i + 0.5L) / per);
    }
    Vec best = s.domain().lo + (s.domain().hi - s.domain().lo) / 2;
    Real best_r = std::numeric_limits<Real>::infinity();
    std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
    const std::size_t count = axis.front().size();
    for (;;) {
        Vec u(k);
        for (int j = 0; j < k; ++j) u(j) = axis[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
        Real r = residual_norm(s, u, y);
        if (r < best_r) {
            best_r = r;
            best = u;
        }
        int j = 0;
        while (j < k && ++idx[static_cast<std::size_t>(j)] == count) idx[static_cast<std::size_t>(j++)] = 0;
        if (j == k) break;
    }
    return gauss_newton(s, best, y);
}

std::optional<StratumPoint> approach_point(const Stratum& s, const Vec& y, Real r, Rng& rng, int tries)
{
    const int n = s.ambient_dim();
    if (s.is_implicit()) {
        const auto& g = s.implicit();
        for (int attempt = 0; attempt < tries; ++attempt) {
            Vec z = y + r * rng.unit_vector(n);
            try {
                auto p = newton_project(g, z, r);
                if (!p) continue;
                Real d = (*p - y).norm();
                if (d < r / 2 || d > 2 * r || !inequalities_hold(g, *p)) continue;
                tangent_at(s, *p);
                return StratumPoint{*p, std::nullopt};
            } catch (const Error&) {
                continue;
            }
        }
        return std::nullopt;
    }
    const auto& g = s.parametric();
    Vec u0 = closest_parameter(g, y);
    auto gap = [&](const Vec& u) { return residual_norm(g, u, y) - r; };
    if (!(gap(u0) < 0)) return std::nullopt;
    for (int attempt = 0; attempt < tries; ++attempt) {
        Vec us = g.domain().random_point(rng);
        if (!strictly_inside(g.domain(), us) || !(gap(us) > 0)) continue;
        Real lo = 0, hi = 1;
        for (int it = 0; it < 200 && hi - lo > 0; ++it) {
            Real mid = (lo + hi) / 2;
            if (mid == lo || mid == hi) break;
            (gap(u0 + mid * (us - u0)) < 0 ? lo : hi) = mid;
        }
        Vec u = u0 + hi * (us - u0);
        try {
            Vec x = g.map(u);
            Real d = (x - y).norm();
            if (d < r / 2 || d > 2 * r) continue;
            tangent_at(s, x, u);
            return StratumPoint{x, u};
        } catch (const Error&) {
            continue;
        }
    }
    return std::nullopt;
}

bool near_closure(const Stratum& s, const Vec& y, Real r, Rng& rng)
{
    return approach_point(s, y, r, rng).has_value() && approach_point(s, y, r / 10, rng).has_value();
}

// --- functions -------------------------------------------------------------------

FunctionOnSpace::FunctionOnSpace(Expression f, int ambient_dim, std::map<std::string, int> declared_rank)
    : f_(std::move(f)), n_(ambient_dim), declared_(std::move(declared_rank))
{
    if (f_.max_variable() >= n_) throw Error("function uses more variables than the ambient dimension");
    for (int i = 0; i < n_; ++i) grad_.push_back(differentiate(f_, i));
    for (const auto& [name, r] : declared_)
        if (r != 0 && r != 1) throw Error("declared rank must be 0 or 1");
}

std::optional<int> FunctionOnSpace::declared_rank(const std::string& stratum) const
{
    auto it = declared_.find(stratum);
    if (it == declared_.end()) return std::nullopt;
    return it->second;
}

Vec FunctionOnSpace::gradient(const Vec& x) const
{
    Vec g(n_);
    for (int i = 0; i < n_; ++i) g(i) = eval(grad_[static_cast<std::size_t>(i)], x);
    return g;
}

Subspace level_tangent_at(const Stratum& s, const FunctionOnSpace& f, const StratumPoint& p)
{
    Subspace t = tangent_at(s, p);
    if (t.dim() == 0 || f.declared_rank(s.name) == 0) return t;
    return kernel_of_covector(f.gradient(p.x), t);
}

int rank_at(const Stratum& s, const FunctionOnSpace& f, const StratumPoint& p)
{
    Subspace t = tangent_at(s, p);
    if (t.dim() == 0) return 0;
    Vec g = f.gradient(p.x);
    if (g.norm() == 0) return 0;
    return relative_tangential_norm(g, t) < kRankTolerance ? 0 : 1;
}

}  // namespace strat
