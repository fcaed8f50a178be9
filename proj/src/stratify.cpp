#include "strat/stratify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace strat {

namespace {

const char* axis_letter(int n, int i)
{
    static const char* xyz[] = {"x", "y", "z"};
    return n <= 3 ? xyz[i] : "x";
}

/// Shortest decimal rational for v, so that scene files stay readable.
Rational short_rational(Real v)
{
    return parse_rational(shortest_text(v));
}

Vec snap(Vec c, Real tol)
{
    for (Eigen::Index i = 0; i < c.size(); ++i)
        if (std::abs(c(i)) < tol) c(i) = 0;
    return c;
}

Polynomial linear_form(int n, const Vec& v, const Vec& c)
{
    Polynomial p(n);
    for (int i = 0; i < n; ++i) {
        if (v(i) == 0) continue;
        Rational a = short_rational(v(i));
        p = p + Polynomial::constant(n, a) * (Polynomial::variable(n, i) - Polynomial::constant(n, short_rational(c(i))));
    }
    return p;
}

Polynomial squared_distance(int n, const Vec& c)
{
    Polynomial p(n);
    for (int i = 0; i < n; ++i) {
        Polynomial d = Polynomial::variable(n, i) - Polynomial::constant(n, short_rational(c(i)));
        p = p + d * d;
    }
    return p;
}

std::string fresh_point_name(const Stratification& s, const Vec& c)
{
    if (c.isZero(0) && s.index_of("origin") < 0) return "origin";
    for (int k = 1;; ++k) {
        std::string name = "p" + std::to_string(k);
        if (s.index_of(name) < 0) return name;
    }
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); }
    void join(int a, int b) { parent[find(a)] = find(b); }
};

/// Gauss-Newton on the overdetermined system [p, grad p] = 0.
std::optional<Vec> singular_point(const RealPolynomial& p, const std::vector<RealPolynomial>& grad, Vec x, Real scale)
{
    const int n = static_cast<int>(x.size());
    for (int it = 0; it < 300; ++it) {
        Vec F(n + 1);
        Mat J(n + 1, n);
        F(0) = p.eval(x);
        J.row(0) = p.gradient(x).transpose();
        for (int i = 0; i < n; ++i) {
            F(i + 1) = grad[i].eval(x);
            J.row(i + 1) = grad[i].gradient(x).transpose();
        }
        if (!F.allFinite()) return std::nullopt;
        if (F.norm() < 1e-30L) return x;
        Vec step = J.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(F);
        x -= step;
        if (!x.allFinite() || x.norm() > 1e3L * scale) return std::nullopt;
        if (step.norm() < 1e-24L * scale) break;
    }
    Vec F(n + 1);
    F(0) = p.eval(x);
    for (int i = 0; i < n; ++i) F(i + 1) = grad[i].eval(x);
    if (F.norm() < 1e-14L) return x;
    return std::nullopt;
}

/// Real roots of a univariate rational polynomial in [lo, hi].
std::vector<Real> real_roots(UPoly q, Real lo, Real hi)
{
    while (!q.empty() && q.back() == 0) q.pop_back();
    std::vector<Real> roots;
    const int d = static_cast<int>(q.size()) - 1;
    if (d <= 0) return roots;
    int zeros = 0;
    while (q[static_cast<std::size_t>(zeros)] == 0) ++zeros;
    if (zeros > 0 && lo <= 0 && 0 <= hi) roots.push_back(0);
    UPoly r(q.begin() + zeros, q.end());
    const int m = static_cast<int>(r.size()) - 1;
    if (m >= 1) {
        Mat comp = Mat::Zero(m, m);
        for (int i = 1; i < m; ++i) comp(i, i - 1) = 1;
        const Real lead = to_real(r.back());
        for (int i = 0; i < m; ++i) comp(i, m - 1) = -to_real(r[static_cast<std::size_t>(i)]) / lead;
        Eigen::EigenSolver<Mat> es(comp);
        auto eval = [&](Real x, Real& dv) {
            Real v = 0;
            dv = 0;
            for (int i = m; i >= 0; --i) {
                dv = dv * x + v;
                v = v * x + to_real(r[static_cast<std::size_t>(i)]);
            }
            return v;
        };
        for (int i = 0; i < m; ++i) {
            auto z = es.eigenvalues()(i);
            if (std::abs(z.imag()) > 1e-6L * (1 + std::abs(z.real()))) continue;
            Real x = z.real();
            for (int k = 0; k < 20; ++k) {
                Real dv;
                Real v = eval(x, dv);
                if (dv == 0) break;
                x -= v / dv;
            }
            if (x >= lo && x <= hi) roots.push_back(x);
        }
    }
    std::sort(roots.begin(), roots.end());
    std::vector<Real> out;
    for (Real x : roots)
        if (out.empty() || x - out.back() > 1e-9L * (1 + std::abs(x))) out.push_back(x);
    return out;
}

/// Coordinate axes i on which p and its gradient vanish identically (n = 3).
std::vector<int> singular_axes(const Polynomial& p)
{
    const int n = p.nvars();
    std::vector<int> axes;
    if (n != 3) return axes;
    auto grad = gradient_poly(p);
    for (int i = 0; i < n; ++i) {
        std::vector<Polynomial> rep;
        for (int j = 0; j < n; ++j) rep.push_back(j == i ? Polynomial::variable(n, i) : Polynomial(n));
        bool all = p.compose(rep).is_zero();
        for (const auto& g : grad) all = all && g.compose(rep).is_zero();
        if (all) axes.push_back(i);
    }
    return axes;
}

/// Transversal Hessian determinant of p along axis i, as a polynomial in x_i.
UPoly transversal_hessian(const Polynomial& p, int i)
{
    const int n = p.nvars();
    std::vector<int> others;
    for (int j = 0; j < n; ++j)
        if (j != i) others.push_back(j);
    std::vector<Polynomial> rep;
    for (int j = 0; j < n; ++j) rep.push_back(j == i ? Polynomial::variable(n, i) : Polynomial(n));
    auto h = [&](int a, int b) { return p.derivative(a).derivative(b).compose(rep); };
    Polynomial det = h(others[0], others[0]) * h(others[1], others[1]) - h(others[0], others[1]) * h(others[1], others[0]);
    UPoly out(static_cast<std::size_t>(std::max(det.degree(), 0) + 1), Rational(0));
    for (const auto& [mono, coef] : det.terms()) out[static_cast<std::size_t>(mono[static_cast<std::size_t>(i)])] += coef;
    return out;
}

bool on_axis(const Vec& x, int axis, Real tol)
{
    for (Eigen::Index j = 0; j < x.size(); ++j)
        if (j != axis && std::abs(x(j)) > tol) return false;
    return true;
}

struct Literal {
    int var;
    int sign;
    bool operator<(const Literal& o) const { return std::tie(var, sign) < std::tie(o.var, o.sign); }
    bool operator==(const Literal& o) const = default;
};

bool satisfies(const Vec& x, const std::vector<Literal>& lits, Real tol = 0)
{
    for (const auto& l : lits)
        if (!(l.sign * x(l.var) > tol)) return false;
    return true;
}

/// Coordinate sign literals constant on all samples of a component, reduced
/// greedily while they still exclude every sample of the other components.
std::vector<Literal> separating_literals(const std::vector<Vec>& own, const std::vector<Vec>& others, Real tol)
{
    const int n = static_cast<int>(own.front().size());
    std::vector<Literal> lits;
    for (int i = 0; i < n; ++i) {
        bool pos = true, neg = true;
        for (const auto& x : own) {
            pos = pos && x(i) > tol;
            neg = neg && x(i) < -tol;
        }
        if (pos) lits.push_back({i, 1});
        if (neg) lits.push_back({i, -1});
    }
    auto separates = [&](const std::vector<Literal>& l) {
        return std::none_of(others.begin(), others.end(), [&](const Vec& y) { return satisfies(y, l, tol); });
    };
    for (std::size_t k = 0; k < lits.size();) {
        auto fewer = lits;
        fewer.erase(fewer.begin() + static_cast<long>(k));
        if (separates(fewer)) lits = fewer;
        else ++k;
    }
    return lits;
}

}  // namespace

std::vector<FrontierPair> sampled_frontier(const Stratification& s, std::uint64_t seed)
{
    std::vector<FrontierPair> out;
    const Real r = 2e-3L * s.box().diameter();
    for (int lo = 0; lo < static_cast<int>(s.size()); ++lo) {
        Rng srng(derive_seed(seed, 0xf2, static_cast<std::uint64_t>(lo)));
        std::vector<StratumPoint> ys = sample_stratum(s.at(lo), s.box(), 6, srng);
        for (int up = 0; up < static_cast<int>(s.size()); ++up) {
            if (s.at(lo).dim() >= s.at(up).dim() || ys.empty()) continue;
            Rng rng(derive_seed(seed, 0xf3, static_cast<std::uint64_t>(lo), static_cast<std::uint64_t>(up)));
            int near = 0;
            for (const auto& y : ys)
                if (near_closure(s.at(up), y.x, r, rng)) ++near;
            if (2 * near >= static_cast<int>(ys.size())) out.push_back({lo, up});
        }
    }
    return out;
}

Stratification initial_decomposition(const Polynomial& p, const Box& box, const DecompositionOptions& opt)
{
    const int n = p.nvars();
    if (n < 2 || n > 3) throw Error("initial decomposition supports 2 or 3 variables");
    if (box.dim() != n) throw Error("box dimension does not match the polynomial");
    if (p.degree() < 1) throw Error("polynomial is constant");
    const std::string text = p.str(Symbols::standard(n).display);
    if (!is_square_free(p)) throw NotSquareFree("polynomial '" + text + "' has a repeated factor");

    const Real scale = box.diameter();
    const Real snap_tol = 1e-7L * scale;
    RealPolynomial rp(p);
    std::vector<RealPolynomial> rgrad;
    for (const auto& g : gradient_poly(p)) rgrad.emplace_back(g);

    // Singular locus: recognised axes and isolated points.
    const std::vector<int> axes = singular_axes(p);
    std::vector<Vec> points;
    {
        const int per = n == 2 ? 9 : 7;
        const int total = static_cast<int>(std::pow(per, n));
        for (int k = 0; k < total; ++k) {
            Vec x(n);
            int rem = k;
            for (int i = 0; i < n; ++i) {
                const Real f = (static_cast<Real>(rem % per) + 0.5L) / per;
                rem /= per;
                x(i) = box.lo(i) + f * (box.hi(i) - box.lo(i)) + 1e-3L * scale * (i + 1);
            }
            auto c = singular_point(rp, rgrad, x, scale);
            if (!c) continue;
            Vec s = snap(*c, snap_tol);
            if (!box.contains(s)) continue;
            if (std::any_of(axes.begin(), axes.end(), [&](int a) { return on_axis(s, a, snap_tol); })) continue;
            bool dup = std::any_of(points.begin(), points.end(), [&](const Vec& q) { return (q - s).norm() < 1e-5L * scale; });
            if (!dup) points.push_back(s);
        }
        if (points.size() > 16)
            throw UnsupportedSingularLocus("singular locus of '" + text +
                                           "' is neither finite nor a coordinate axis");
    }

    Stratification out(n, box);

    // Smooth part: sample away from the singular locus, cluster, name by signs.
    auto dist_to_sigma = [&](const Vec& x) {
        Real d = std::numeric_limits<Real>::infinity();
        for (const auto& q : points) d = std::min(d, (x - q).norm());
        for (int a : axes) {
            Vec y = x;
            y(a) = 0;
            d = std::min(d, y.norm());
        }
        return d;
    };
    const Real delta = 0.08L * scale;
    const int want = opt.component_samples > 0 ? opt.component_samples : (n == 2 ? 600 : 2500);
    ImplicitStratum hyper(n, {p}, {}, n - 1);
    Rng rng(derive_seed(opt.seed, 0xdec0));
    std::vector<Vec> smooth;
    for (int a = 0; a < 20 * want && static_cast<int>(smooth.size()) < want; ++a) {
        auto x = newton_project(hyper, box.random_point(rng), scale);
        if (!x || !box.contains(*x)) continue;
        if (dist_to_sigma(*x) < delta) continue;
        if (rp.gradient(*x).norm() < 1e-9L) continue;
        smooth.push_back(*x);
    }
    std::vector<std::vector<Vec>> comps;
    if (!smooth.empty()) {
        // Link distance from the sample spacing, so that tangent branches
        // leaving the excluded ball stay apart.
        std::vector<Real> nn(smooth.size(), std::numeric_limits<Real>::infinity());
        for (std::size_t i = 0; i < smooth.size(); ++i)
            for (std::size_t j = 0; j < smooth.size(); ++j)
                if (i != j) nn[i] = std::min(nn[i], (smooth[i] - smooth[j]).norm());
        std::sort(nn.begin(), nn.end());
        const Real eps = std::min(delta, 4 * nn[nn.size() * 9 / 10]);
        UnionFind uf(smooth.size());
        for (std::size_t i = 0; i < smooth.size(); ++i)
            for (std::size_t j = i + 1; j < smooth.size(); ++j)
                if ((smooth[i] - smooth[j]).norm() < eps) uf.join(static_cast<int>(i), static_cast<int>(j));
        std::map<int, std::vector<Vec>> groups;
        for (std::size_t i = 0; i < smooth.size(); ++i) groups[uf.find(static_cast<int>(i))].push_back(smooth[i]);
        for (auto& [root, g] : groups) comps.push_back(std::move(g));
    }

    // Components inside one sign cell cannot be told apart; merge them.
    std::vector<std::vector<Literal>> lits;
    for (bool merged = true; merged;) {
        merged = false;
        lits.clear();
        for (std::size_t i = 0; i < comps.size() && !merged; ++i) {
            std::vector<Vec> others;
            for (std::size_t j = 0; j < comps.size(); ++j)
                if (j != i) others.insert(others.end(), comps[j].begin(), comps[j].end());
            auto l = separating_literals(comps[i], others, snap_tol);
            for (std::size_t j = 0; j < comps.size() && !merged; ++j) {
                if (j == i) continue;
                if (std::any_of(comps[j].begin(), comps[j].end(), [&](const Vec& y) { return satisfies(y, l, snap_tol); })) {
                    comps[i].insert(comps[i].end(), comps[j].begin(), comps[j].end());
                    comps.erase(comps.begin() + static_cast<long>(j));
                    merged = true;
                }
            }
            if (!merged) lits.push_back(l);
        }
    }
    std::vector<std::pair<std::string, Stratum>> smooth_strata;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const auto& l = lits[i];
        for (const auto& q : points)
            if (satisfies(q, l))
                throw UnsupportedSingularLocus("smooth part of '" + text +
                                               "' is not separated from its singular points by coordinate signs");
        for (int a : axes) {
            bool excluded = std::any_of(l.begin(), l.end(), [&](const Literal& lit) { return lit.var != a; });
            if (!excluded)
                throw UnsupportedSingularLocus("smooth part of '" + text +
                                               "' is not separated from a singular axis by coordinate signs");
        }
        std::string name = "smooth";
        std::vector<Expression> ineqs;
        for (const auto& lit : l) {
            name += (lit.sign > 0 ? "+" : "-") + std::string(axis_letter(n, lit.var));
            Expression v = Expression::variable(lit.var);
            ineqs.push_back(lit.sign > 0 ? v : -v);
        }
        smooth_strata.push_back({name, Stratum{name, ImplicitStratum(n, {p}, ineqs, n - 1)}});
    }
    std::sort(smooth_strata.begin(), smooth_strata.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    // Axis pieces: cut at isolated singular points on the axis and where the
    // transversal type changes.
    std::sort(points.begin(), points.end(), [](const Vec& a, const Vec& b) {
        return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
    });
    std::vector<Stratum> axis_strata;
    std::vector<Vec> cut_points;
    for (int a : axes) {
        std::vector<Real> cuts = real_roots(transversal_hessian(p, a), box.lo(a), box.hi(a));
        for (auto& c : cuts)
            if (std::abs(c) < snap_tol) c = 0;
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        std::vector<Polynomial> eqs;
        for (int j = 0; j < n; ++j)
            if (j != a) eqs.push_back(Polynomial::variable(n, j));
        const std::string base = std::string(axis_letter(n, a)) + "-axis";
        for (std::size_t k = 0; k <= cuts.size(); ++k) {
            std::vector<Expression> ineqs;
            if (k > 0) ineqs.push_back(Expression::variable(a) - Expression::constant(short_rational(cuts[k - 1])));
            if (k < cuts.size()) ineqs.push_back(Expression::constant(short_rational(cuts[k])) - Expression::variable(a));
            std::string name = base;
            if (cuts.size() == 1) name += k == 0 ? "-" : "+";
            else if (cuts.size() > 1) name += std::to_string(k + 1);
            axis_strata.push_back({name, ImplicitStratum(n, eqs, ineqs, 1)});
        }
        for (Real c : cuts) {
            Vec q = Vec::Zero(n);
            q(a) = c;
            cut_points.push_back(q);
        }
    }
    for (const auto& q : cut_points)
        if (std::none_of(points.begin(), points.end(), [&](const Vec& o) { return (o - q).norm() < 1e-5L * scale; }))
            points.push_back(q);

    for (const auto& q : points) out.add(Stratum::point(fresh_point_name(out, q), q));
    for (auto& s : axis_strata) out.add(std::move(s));
    for (auto& [name, s] : smooth_strata) out.add(std::move(s));
    out.set_frontier(sampled_frontier(out, opt.seed));
    return out;
}

Scene initial_scene(const Polynomial& p, const Box& box, const DecompositionOptions& opt)
{
    Scene s(initial_decomposition(p, box, opt));
    s.name = "V(" + p.str(Symbols::standard(p.nvars()).display) + ")";
    s.polynomial = p;
    return s;
}

}  // namespace strat

namespace strat {

std::string to_string(RefineStatus s)
{
    return s == RefineStatus::Converged ? "Converged" : "NonConvergence";
}

std::string to_string(CertificateStatus s)
{
    switch (s) {
    case CertificateStatus::Certified: return "Certified";
    case CertificateStatus::Refuted: return "Refuted";
    case CertificateStatus::Inconclusive: return "Inconclusive";
    }
    return "?";
}

Real RefinementState::failing_fraction(const std::string& lower) const
{
    int total = 0, failing = 0;
    for (const auto& s : scans) {
        if (s.lower != lower) continue;
        total += s.base_points;
        failing += s.failing;
    }
    return total ? static_cast<Real>(failing) / total : 0;
}

Stratification split_at(const Stratification& s, int stratum, const Vec& c, const std::string& point_name,
                        std::uint64_t seed)
{
    const Stratum& old = s.at(stratum);
    if (!old.is_implicit())
        throw UnsupportedCriticalLocus("cannot split parametric stratum '" + old.name + "'");
    if (old.dim() == 0) throw Error("cannot split point stratum '" + old.name + "'");
    const int n = s.ambient_dim();
    const auto& g = old.implicit();
    Vec at(n);
    for (int i = 0; i < n; ++i) at(i) = to_real(short_rational(c(i)));

    std::vector<Stratum> pieces;
    if (old.dim() == 1) {
        Vec v = tangent_at(old, at).basis().row(0).transpose();
        Eigen::Index big;
        v.cwiseAbs().maxCoeff(&big);
        if (v(big) < 0) v = -v;
        v = snap(v, 1e-9L);
        Polynomial lin = linear_form(n, v, at);
        for (int sign : {1, -1}) {
            auto ineqs = g.inequalities();
            ineqs.push_back((sign > 0 ? lin : -lin).to_expression());
            pieces.push_back({old.name + (sign > 0 ? "+" : "-"), ImplicitStratum(n, g.equations(), ineqs, 1)});
        }
    } else {
        auto ineqs = g.inequalities();
        ineqs.push_back(squared_distance(n, at).to_expression());
        pieces.push_back({old.name, ImplicitStratum(n, g.equations(), ineqs, old.dim())});
    }

    Stratification out(n, s.box());
    std::vector<int> map(s.size(), -1);
    for (int i = 0; i < static_cast<int>(s.size()); ++i)
        if (i != stratum) map[static_cast<std::size_t>(i)] = out.add(s.at(i));
    std::vector<int> fresh;
    for (auto& p : pieces) fresh.push_back(out.add(std::move(p)));
    fresh.push_back(out.add(Stratum::point(point_name, at)));

    // Pairs between untouched strata are kept; pairs with new strata sampled.
    std::vector<FrontierPair> pairs;
    for (const auto& fp : s.frontier()) {
        int lo = map[static_cast<std::size_t>(fp.lower)], up = map[static_cast<std::size_t>(fp.upper)];
        if (lo >= 0 && up >= 0) pairs.push_back({lo, up});
    }
    for (const auto& fp : sampled_frontier(out, seed)) {
        bool touches = std::find(fresh.begin(), fresh.end(), fp.lower) != fresh.end() ||
                       std::find(fresh.begin(), fresh.end(), fp.upper) != fresh.end();
        if (touches) pairs.push_back(fp);
    }
    out.set_frontier(std::move(pairs));
    return out;
}

namespace {

bool is_absent(const ConditionReport& r)
{
    return r.wings_requested > 0 && r.wings_failed == r.wings_requested;
}

/// Point of a curve stratum where the closure of `upper` starts: bisection
/// between a base point outside it and one inside.
std::optional<Vec> closure_transition(const Stratum& curve, const Stratum& upper, Vec out, Vec in, Real scale,
                                      std::uint64_t seed)
{
    const auto& g = curve.implicit();
    for (int it = 0; it < 120 && (out - in).norm() > 1e-10L * scale; ++it) {
        auto m = newton_project(g, (out + in) / 2, scale);
        if (!m) return std::nullopt;
        Rng rng(derive_seed(seed, 0x7a, static_cast<std::uint64_t>(it)));
        const Real r = std::max<Real>(0.1L * (out - in).norm(), 1e-12L * scale);
        if (near_closure(upper, *m, r, rng)) in = *m;
        else out = *m;
    }
    Vec c = snap((out + in) / 2, 1e-7L * scale);
    if (!membership(curve, c, 1e-9L * scale)) return std::nullopt;
    return c;
}

std::vector<Vec> cluster_centers(const std::vector<Vec>& pts, const std::vector<bool>& exact, Real radius)
{
    UnionFind uf(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if ((pts[i] - pts[j]).norm() < radius) uf.join(static_cast<int>(i), static_cast<int>(j));
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < pts.size(); ++i) groups[uf.find(static_cast<int>(i))].push_back(i);
    std::vector<Vec> out;
    for (const auto& [root, idx] : groups) {
        auto e = std::find_if(idx.begin(), idx.end(), [&](std::size_t i) { return exact[i]; });
        if (e != idx.end()) {
            out.push_back(pts[*e]);
            continue;
        }
        Vec mean = Vec::Zero(pts[idx.front()].size());
        for (auto i : idx) mean += pts[i];
        out.push_back(mean / static_cast<Real>(idx.size()));
    }
    return out;
}

}  // namespace

RefinementState refine(const Scene& scene, const std::vector<Condition>& conditions, const StratifyParams& params)
{
    for (Condition c : conditions)
        if ((c == Condition::AF || c == Condition::WF) && !scene.f)
            throw Error("condition " + to_string(c) + " needs a function on the scene");
    if (!scene.strat.is_partial_order()) throw Error("frontier relation is not a partial order");
    RefinementState st(scene);
    const Real scale = scene.strat.box().diameter();
    const Real radius = params.cluster_radius * scale;
    const std::uint64_t seed = params.condition.seed;

    for (int round = 1; round <= params.max_rounds; ++round) {
        st.rounds = round;
        st.scans.clear();
        st.pending.clear();
        bool failures = false;
        std::vector<std::pair<std::string, Vec>> splits;
        const Stratification& S = st.scene.strat;
        for (int d = S.top_dim() - 1; d >= 0 && splits.empty(); --d) {
            st.level = d;
            for (int lo = 0; lo < static_cast<int>(S.size()); ++lo) {
                const Stratum& low = S.at(lo);
                if (low.dim() != d) continue;
                std::vector<Vec> bad;
                std::vector<bool> exact;
                int total = 0, failing = 0;
                for (int up = 0; up < static_cast<int>(S.size()); ++up) {
                    if (up == lo) continue;
                    auto below = S.below(up);
                    if (std::find(below.begin(), below.end(), lo) == below.end()) continue;
                    PairContext ctx = pair_context(st.scene, low.name, S.at(up).name);
                    for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
                        ConditionParams cp = params.condition;
                        cp.seed = derive_seed(seed, static_cast<std::uint64_t>(round), (static_cast<std::uint64_t>(lo) << 16) | static_cast<std::uint64_t>(up), ci);
                        std::vector<Vec> one;
                        if (auto c = low.as_point()) one.push_back(*c);
                        ScanResult sr = scan_bad_locus(conditions[ci], ctx, params.base_grid, cp, params.threads,
                                                       low.dim() == 0 ? &one : nullptr);
                        PairScan ps{conditions[ci], low.name, S.at(up).name, static_cast<int>(sr.base_points.size()),
                                    static_cast<int>(sr.failing.size()), 0, sr.inconclusive};
                        std::vector<bool> absent;
                        for (const auto& r : sr.reports) {
                            absent.push_back(is_absent(r));
                            if (absent.back()) ++ps.absent;
                        }
                        st.scans.push_back(ps);
                        total += ps.base_points;
                        failing += ps.failing;
                        for (int i : sr.failing) {
                            bad.push_back(sr.base_points[static_cast<std::size_t>(i)]);
                            exact.push_back(false);
                        }
                        if (low.dim() != 1 || !low.is_implicit() || ps.absent == 0 || ps.absent == ps.base_points) continue;
                        // Order the base points along the curve and bisect each change.
                        const auto& pts = sr.base_points;
                        Vec mean = Vec::Zero(S.ambient_dim());
                        for (const auto& p : pts) mean += p;
                        mean /= static_cast<Real>(pts.size());
                        Mat centered(static_cast<Eigen::Index>(pts.size()), S.ambient_dim());
                        for (std::size_t i = 0; i < pts.size(); ++i) centered.row(static_cast<Eigen::Index>(i)) = (pts[i] - mean).transpose();
                        Eigen::JacobiSVD<Mat> svd(centered, Eigen::ComputeThinV);
                        Vec axis = svd.matrixV().col(0);
                        std::vector<std::size_t> order(pts.size());
                        std::iota(order.begin(), order.end(), 0);
                        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pts[a].dot(axis) < pts[b].dot(axis); });
                        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                            std::size_t a = order[k], b = order[k + 1];
                            if (absent[a] == absent[b]) continue;
                            auto c = absent[a] ? closure_transition(low, S.at(up), pts[a], pts[b], scale, cp.seed)
                                               : closure_transition(low, S.at(up), pts[b], pts[a], scale, cp.seed);
                            if (c) {
                                bad.push_back(*c);
                                exact.push_back(true);
                            }
                        }
                    }
                }
                if (bad.empty()) continue;
                failures = true;
                st.pending[low.name] = bad;
                const Real fraction = total ? static_cast<Real>(failing) / total : 0;
                if (low.dim() == 0 || !low.is_implicit() || fraction >= 0.5L) {
                    st.log.push_back("'" + low.name + "': " + std::to_string(failing) + " of " + std::to_string(total) +
                                     " base points fail, no isolated bad points to split off");
                    continue;
                }
                for (Vec c : cluster_centers(bad, exact, radius)) {
                    if (auto p = newton_project(low.implicit(), c, scale)) c = snap(*p, 1e-7L * scale);
                    bool near_lower = false;
                    for (int j : S.below(lo))
                        if (auto q = S.at(j).as_point(); j != lo && q && (*q - c).norm() < radius) near_lower = true;
                    if (near_lower || !membership(low, c, 1e-9L * scale)) {
                        st.log.push_back("'" + low.name + "': bad points near " + format_point(c) + " not split");
                        continue;
                    }
                    splits.push_back({low.name, c});
                }
            }
        }
        if (!failures) {
            st.status = RefineStatus::Converged;
            return st;
        }
        if (splits.empty()) {
            st.status = RefineStatus::NonConvergence;
            return st;
        }
        Stratification next = st.scene.strat;
        for (const auto& [name, c] : splits) {
            int idx = -1;
            for (int i = 0; i < static_cast<int>(next.size()) && idx < 0; ++i) {
                const Stratum& cand = next.at(i);
                if (cand.dim() > 0 && cand.name.rfind(name, 0) == 0 && membership(cand, c, 1e-9L * scale)) idx = i;
            }
            if (idx < 0) continue;
            std::string pname = fresh_point_name(next, c);
            next = split_at(next, idx, c, pname, derive_seed(seed, 0x5917, static_cast<std::uint64_t>(round)));
            st.log.push_back("round " + std::to_string(round) + ": split '" + name + "' at " + format_point(c) +
                             " as '" + pname + "'");
        }
        if (!next.is_partial_order()) throw Error("refinement produced a frontier cycle");
        st.scene = with_stratification(st.scene, std::move(next));
    }
    st.status = RefineStatus::NonConvergence;
    st.log.push_back("stopped after " + std::to_string(params.max_rounds) + " rounds");
    return st;
}

namespace {

Vec projected_gradient(const Stratum& s, const FunctionOnSpace& f, const Vec& x)
{
    const auto& g = s.implicit();
    Subspace t = tangent_at(s, x);
    Vec r = g.residuals(x);
    Vec pg = t.project(f.gradient(x));
    Vec out(r.size() + pg.size());
    out << r, pg;
    return out;
}

std::optional<Vec> critical_point(const Stratum& s, const FunctionOnSpace& f, Vec x, Real scale)
{
    const int n = static_cast<int>(x.size());
    try {
        for (int it = 0; it < 60; ++it) {
            Vec F = projected_gradient(s, f, x);
            if (F.norm() < 1e-14L) break;
            Mat J(F.size(), n);
            const Real h = 1e-7L * scale;
            for (int i = 0; i < n; ++i) {
                Vec e = Vec::Zero(n);
                e(i) = h;
                J.col(i) = (projected_gradient(s, f, x + e) - projected_gradient(s, f, x - e)) / (2 * h);
            }
            Vec step = J.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(F);
            x -= step;
            if (!x.allFinite() || step.norm() > 10 * scale) return std::nullopt;
            if (step.norm() < 1e-18L * scale) break;
        }
        if (projected_gradient(s, f, x).norm() > 1e-10L) return std::nullopt;
        if (!(s.implicit().min_inequality(x) > 0)) return std::nullopt;
        return x;
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

Stratification rank_partition(const Stratification& s, const FunctionOnSpace& f)
{
    const Real scale = s.box().diameter();
    Stratification out = s;
    for (int i = 0; i < static_cast<int>(s.size()); ++i) {
        const Stratum& st = s.at(i);
        if (st.dim() == 0) continue;
        Rng rng(derive_seed(0x4a4c, static_cast<std::uint64_t>(i)));
        auto samples = sample_stratum(st, s.box(), 30, rng);
        if (samples.empty()) continue;
        bool all_zero = std::all_of(samples.begin(), samples.end(), [&](const StratumPoint& p) { return rank_at(st, f, p) == 0; });
        if (all_zero) continue;
        if (!st.is_implicit()) {
            bool any_zero = std::any_of(samples.begin(), samples.end(), [&](const StratumPoint& p) { return rank_at(st, f, p) == 0; });
            if (any_zero) throw UnsupportedCriticalLocus("critical points of f on parametric stratum '" + st.name + "'");
            continue;
        }
        std::vector<Vec> crit;
        for (const auto& p : samples) {
            auto c = critical_point(st, f, p.x, scale);
            if (!c || !s.box().contains(*c)) continue;
            Vec sc = snap(*c, 1e-7L * scale);
            if (std::none_of(crit.begin(), crit.end(), [&](const Vec& q) { return (q - sc).norm() < 1e-6L * scale; }))
                crit.push_back(sc);
        }
        if (crit.size() > 8)
            throw UnsupportedCriticalLocus("critical set of f on '" + st.name + "' is not a finite set of points");
        std::sort(crit.begin(), crit.end(), [](const Vec& a, const Vec& b) {
            return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
        });
        for (const auto& c : crit) {
            int idx = -1;
            for (int j = 0; j < static_cast<int>(out.size()) && idx < 0; ++j) {
                const Stratum& cand = out.at(j);
                if (cand.dim() == st.dim() && cand.name.rfind(st.name, 0) == 0 && membership(cand, c, 1e-9L * scale)) idx = j;
            }
            if (idx < 0) continue;
            out = split_at(out, idx, c, fresh_point_name(out, c));
        }
    }
    return out;
}

std::string Certificate::csv() const
{
    std::ostringstream os;
    os << "condition,lower,upper,base,verdict,C,slope\n";
    for (const auto& r : reports) {
        std::string base;
        for (Eigen::Index i = 0; i < r.base.size(); ++i) base += (i ? " " : "") + format_real(r.base(i));
        os << to_string(r.condition) << "," << r.lower << "," << r.upper << "," << base << "," << to_string(r.verdict)
           << "," << format_real(r.c) << "," << format_real(r.slope) << "\n";
    }
    return os.str();
}

std::string Certificate::summary() const
{
    struct Count {
        int holds = 0, fails = 0, inconclusive = 0;
    };
    std::vector<std::string> keys;
    std::map<std::string, Count> counts;
    for (const auto& r : reports) {
        std::string key = to_string(r.condition) + " " + r.lower + " < " + r.upper;
        if (!counts.count(key)) keys.push_back(key);
        auto& c = counts[key];
        (r.verdict == Verdict::Holds ? c.holds : r.verdict == Verdict::Fails ? c.fails : c.inconclusive)++;
    }
    std::ostringstream os;
    os << "status: " << to_string(status) << "\n";
    for (const auto& k : keys) {
        const auto& c = counts[k];
        os << k << ": " << c.holds << " Holds, " << c.fails << " Fails, " << c.inconclusive << " Inconclusive\n";
    }
    return os.str();
}

Certificate certify(const Scene& scene, const std::vector<Condition>& conditions, int base_grid,
                    const ConditionParams& params, unsigned threads)
{
    const Stratification& S = scene.strat;
    Certificate cert;
    bool any_fail = false, all_hold = true;
    for (int up = 0; up < static_cast<int>(S.size()); ++up) {
        auto below = S.below(up);
        std::sort(below.begin(), below.end());
        for (int lo : below) {
            if (lo == up) continue;
            PairContext ctx = pair_context(scene, S.at(lo).name, S.at(up).name);
            for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
                ConditionParams cp = params;
                cp.seed = derive_seed(params.seed, 0xce47, (static_cast<std::uint64_t>(lo) << 16) | static_cast<std::uint64_t>(up), ci);
                std::vector<Vec> one;
                if (auto c = S.at(lo).as_point()) one.push_back(*c);
                ScanResult sr = scan_bad_locus(conditions[ci], ctx, base_grid, cp, threads, one.empty() ? nullptr : &one);
                for (auto& r : sr.reports) {
                    any_fail = any_fail || r.verdict == Verdict::Fails;
                    all_hold = all_hold && r.verdict == Verdict::Holds;
                    cert.reports.push_back(std::move(r));
                }
            }
        }
    }
    cert.status = any_fail ? CertificateStatus::Refuted : all_hold ? CertificateStatus::Certified : CertificateStatus::Inconclusive;
    return cert;
}

}  // namespace strat
