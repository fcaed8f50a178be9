#include "doctest.h"

#include "strat/strata.hpp"

#include <cmath>

using namespace strat;

namespace {

Vec vec(std::initializer_list<Real> xs)
{
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (Real x : xs) v(i++) = x;
    return v;
}

Stratum implicit(const char* name, int n, std::vector<const char*> eqs, std::vector<const char*> ineqs, int dim)
{
    std::vector<Polynomial> ps;
    for (auto e : eqs) ps.push_back(Polynomial::parse(e, n));
    std::vector<Expression> gs;
    for (auto g : ineqs) gs.push_back(parse_expression(g, Symbols::standard(n)));
    return {name, ImplicitStratum(n, ps, gs, dim)};
}

Stratum parametric(const char* name, int n, Box domain, std::vector<const char*> maps)
{
    std::vector<Expression> es;
    for (auto m : maps) es.push_back(parse_expression(m, Symbols::standard(domain.dim())));
    return {name, ParametricStratum(n, std::move(domain), es)};
}

Box interval(Real a, Real b) { return {vec({a}), vec({b})}; }

}  // namespace

TEST_CASE("tangent_at examples")
{
    auto parabola = implicit("parabola", 2, {"y - x^2"}, {}, 1);
    auto t = tangent_at(parabola, vec({1, 1}));
    REQUIRE(t.dim() == 1);
    Vec expected = vec({1, 2}) / std::sqrt(5.0L);
    CHECK(std::fabs(std::fabs(t.basis().row(0).dot(expected.transpose())) - 1) < 1e-15L);

    auto line = parametric("line", 2, interval(-10, 10), {"x", "0"});
    auto tl = tangent_at(line, vec({3, 0}));
    REQUIRE(tl.dim() == 1);
    CHECK(std::fabs(std::fabs(tl.basis()(0, 0)) - 1) < 1e-15L);

    auto umbrella = implicit("sheet", 3, {"x^2 - z*y^2"}, {"y"}, 2);
    auto tu = tangent_at(umbrella, vec({1, 1, 1}));
    REQUIRE(tu.dim() == 2);
    Vec grad = vec({2, -2, -1});
    for (int i = 0; i < 2; ++i) CHECK(std::fabs(tu.basis().row(i).dot(grad.transpose())) < 1e-10L);
}

TEST_CASE("RankDrop at singular points")
{
    auto cross = implicit("cross", 2, {"x*y"}, {}, 1);
    CHECK_THROWS_AS(tangent_at(cross, vec({0, 0})), RankDrop);
    auto curve = parametric("cusp", 2, interval(-1, 1), {"x^2", "x^3"});
    CHECK_THROWS_AS(tangent_at(curve, vec({0, 0}), vec({0})), RankDrop);
    CHECK(tangent_at(Stratum::point("o", vec({0, 0})), vec({0, 0})).dim() == 0);
}

TEST_CASE("tangent is orthogonal to equation gradients on random samples")
{
    auto s = implicit("sphere", 3, {"x^2 + y^2 + z^2 - 1", "z - x*y"}, {}, 1);
    Rng rng(2);
    auto pts = sample_stratum(s, Box::cube(3, 2), 40, rng);
    REQUIRE(pts.size() == 40);
    const auto& g = s.implicit();
    for (const auto& p : pts) {
        CHECK(g.residuals(p.x).cwiseAbs().maxCoeff() <= 1e-12L);
        auto t = tangent_at(s, p);
        CHECK(t.dim() == 1);
        CHECK((g.jacobian(p.x) * t.basis().transpose()).cwiseAbs().maxCoeff() <= 1e-10L);
    }
}

TEST_CASE("secant of a curve inside a stratum converges to the tangent")
{
    auto s = parametric("helix", 3, interval(0, 6), {"cos(x)", "sin(x)", "x^2/3"});
    for (Real u : {0.5L, 2.0L, 4.5L}) {
        Real h = 1e-6L;
        Vec a = s.parametric().map(vec({u})), b = s.parametric().map(vec({u + h}));
        Vec sec = (b - a).normalized();
        auto t = tangent_at(s, a, vec({u}));
        CHECK(t.distance(sec) <= 1e-4L);
    }
    auto circle = implicit("circle", 2, {"x^2 + y^2 - 4"}, {}, 1);
    Real a = 0.7L, h = 1e-6L;
    Vec p = 2 * vec({std::cos(a), std::sin(a)}), q = 2 * vec({std::cos(a + h), std::sin(a + h)});
    CHECK(tangent_at(circle, p).distance((q - p).normalized()) <= 1e-4L);
}

TEST_CASE("membership examples")
{
    auto cross = implicit("cross", 2, {"x*y"}, {}, 1);
    CHECK(membership(cross, vec({1, 0}), 1e-9L));
    CHECK_FALSE(membership(cross, vec({1, 1}), 1e-9L));
    auto ray = implicit("ray", 2, {"x*y"}, {"x"}, 1);
    CHECK(membership(ray, vec({0.5L, 0})));
    CHECK_FALSE(membership(ray, vec({1e-7L, 1e-7L}), 1e-9L));
    CHECK_FALSE(membership(ray, vec({-1, 0})));
    auto osc = parametric("osc", 2, interval(0, 2), {"x", "x*sin(1/x)"});
    CHECK(membership(osc, vec({0.5L, 0.5L * std::sin(2.0L)})));
    CHECK_FALSE(membership(osc, vec({0.5L, 0.6L})));
    CHECK_FALSE(membership(osc, vec({-0.5L, 0})));
    auto origin = Stratum::point("o", vec({0, 0}));
    CHECK(membership(origin, vec({0, 0})));
    CHECK_FALSE(membership(origin, vec({1e-6L, 0})));
    REQUIRE(origin.as_point());
    CHECK(origin.as_point()->norm() == 0);
}

TEST_CASE("newton projection onto the cusp")
{
    auto cusp = implicit("cusp", 2, {"y^2 - x^3"}, {"y"}, 1);
    const auto& g = cusp.implicit();
    for (Real t : {1e-1L, 1e-3L, 1e-5L}) {
        Real x = std::pow(t, 2.0L / 3.0L);
        auto p = newton_project(g, vec({x * 1.1L, x * std::sqrt(x) * 0.9L}), t);
        REQUIRE(p);
        CHECK(std::fabs(g.residuals(*p)(0)) <= 1e-12L);
    }
}

TEST_CASE("nearest point on a curved stratum is a normal foot")
{
    auto circle = implicit("circle", 2, {"x^2 + y^2 - 1"}, {"y"}, 1);
    Vec x = vec({0.3L, 1.2L});
    auto y = nearest_point(circle, x, {vec({0, 1}), std::nullopt});
    REQUIRE(y);
    CHECK((y->x - x.normalized()).norm() < 1e-14L);
    auto curve = parametric("graph", 2, interval(-1, 1), {"x", "x^2"});
    Vec q = vec({0.5L, 0.3L});
    auto z = nearest_point(curve, q, {vec({0.4L, 0.16L}), vec({0.4L})});
    REQUIRE(z);
    Vec normal = vec({-2 * z->x(0), 1});
    CHECK(std::fabs((q - z->x).normalized().dot(normal.normalized())) > 1 - 1e-12L);
}

TEST_CASE("level tangents and rank")
{
    Vec o = vec({0, 1});
    Stratum half = implicit("upper", 2, {}, {"y"}, 2);
    FunctionOnSpace fx(parse_expression("x", Symbols::standard(2)), 2);
    auto lt = level_tangent_at(half, fx, {o, std::nullopt});
    REQUIRE(lt.dim() == 1);
    CHECK(std::fabs(std::fabs(lt.basis()(0, 1)) - 1) < 1e-15L);

    FunctionOnSpace zero(Expression(), 2);
    CHECK(level_tangent_at(half, zero, {o, std::nullopt}).dim() == 2);

    // Kurdyka's function at (1, e^-10): the kernel is spanned by (x, -y ln y).
    FunctionOnSpace kf(parse_expression("y^x", Symbols::standard(2)), 2);
    Real y = std::exp(-10.0L);
    auto kt = level_tangent_at(half, kf, {vec({1, y}), std::nullopt});
    REQUIRE(kt.dim() == 1);
    Vec dir = vec({1, 10 * y}).normalized();
    CHECK(std::fabs(std::fabs(kt.basis().row(0).dot(dir.transpose())) - 1) < 1e-15L);
    CHECK(std::fabs(kf.gradient(vec({1, y})).dot(kt.basis().row(0).transpose())) < 1e-18L);

    Stratum punctured = implicit("punctured", 2, {}, {"x^2 + y^2"}, 2);
    FunctionOnSpace r2(parse_expression("x^2 + y^2", Symbols::standard(2)), 2);
    CHECK(rank_at(punctured, r2, {vec({1, 0}), std::nullopt}) == 1);
    CHECK(rank_at(Stratum::point("o", vec({0, 0})), r2, {vec({0, 0}), std::nullopt}) == 0);
    FunctionOnSpace c(parse_expression("3", Symbols::standard(2)), 2);
    CHECK(rank_at(punctured, c, {vec({1, 2}), std::nullopt}) == 0);

    // Level tangent sits inside the tangent, codim 1 exactly at rank 1.
    Stratum sphere = implicit("sphere", 3, {"x^2 + y^2 + z^2 - 1"}, {}, 2);
    FunctionOnSpace h(parse_expression("z", Symbols::standard(3)), 3);
    Rng rng(4);
    auto pts = sample_stratum(sphere, Box::cube(3, 1.5L), 30, rng);
    for (const auto& p : pts) {
        auto t = tangent_at(sphere, p);
        auto l = level_tangent_at(sphere, h, p);
        CHECK(delta(l, t) < 1e-12L);
        CHECK(l.dim() == t.dim() - rank_at(sphere, h, p));
    }
    CHECK(rank_at(sphere, h, {vec({0, 0, 1}), std::nullopt}) == 0);
}

TEST_CASE("declared rank 0 skips the gradient")
{
    Stratum axis = implicit("axis", 2, {"y"}, {"x - 1/4", "3 - x"}, 1);
    FunctionOnSpace kf(parse_expression("y^x", Symbols::standard(2)), 2, {{"axis", 0}});
    auto t = level_tangent_at(axis, kf, {vec({0.5L, 0}), std::nullopt});
    CHECK(t.dim() == 1);
    FunctionOnSpace undeclared(parse_expression("y^x", Symbols::standard(2)), 2);
    CHECK_THROWS_AS(level_tangent_at(axis, undeclared, {vec({0.5L, 0}), std::nullopt}), DomainError);
}

TEST_CASE("sampling is deterministic and respects the box")
{
    auto s = implicit("sheet", 3, {"x^2 - z*y^2"}, {"y"}, 2);
    Box box = Box::cube(3, 2);
    Rng a(9), b(9);
    auto p = sample_stratum(s, box, 25, a);
    auto q = sample_stratum(s, box, 25, b);
    REQUIRE(p.size() == 25);
    REQUIRE(q.size() == 25);
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p[i].x == q[i].x);
        CHECK(box.contains(p[i].x));
        CHECK(p[i].x(1) > 0);
    }
}

#include "strat/stratification.hpp"

namespace {

Stratification cross_scene(bool with_origin)
{
    Stratification s(2, Box::cube(2, 1));
    const char* names[] = {"x+", "x-", "y+", "y-"};
    const char* ineq[] = {"x", "-x", "y", "-y"};
    for (int i = 0; i < 4; ++i) s.add(implicit(names[i], 2, {"x*y"}, {ineq[i]}, 1));
    if (with_origin) {
        int o = s.add(Stratum::point("origin", vec({0, 0})));
        for (int i = 0; i < 4; ++i) s.add_frontier(o, i);
    }
    return s;
}

}  // namespace

TEST_CASE("validate the cross")
{
    auto good = validate(cross_scene(true), 200);
    CHECK_MESSAGE(good.pass(), good.str());
    CHECK(good.get("frontier").samples > 0);

    auto bad = validate(cross_scene(false), 200);
    CHECK_FALSE(bad.pass());
    const auto& f = bad.get("frontier");
    CHECK_FALSE(f.pass);
    CHECK(f.witness.find("boundary") != std::string::npos);
    CHECK(bad.get("regularity").pass);
}

TEST_CASE("validate a single open stratum and catch overlaps and order violations")
{
    Stratification whole(3, Box::cube(3, 1));
    whole.add(implicit("R3", 3, {}, {}, 3));
    CHECK(validate(whole, 50).pass());

    Stratification overlap(2, Box::cube(2, 1));
    overlap.add(implicit("a", 2, {"y"}, {}, 1));
    overlap.add(implicit("b", 2, {"y"}, {"x"}, 1));
    CHECK_FALSE(validate(overlap, 50).get("disjoint").pass);

    Stratification order(2, Box::cube(2, 1));
    order.add(implicit("a", 2, {"y"}, {}, 1));
    order.add(implicit("b", 2, {"x - 2"}, {}, 1));
    order.add_frontier(0, 1);
    CHECK_FALSE(validate(order, 10).get("order").pass);
}

TEST_CASE("parametric frontier")
{
    Stratification s(2, Box::cube(2, 1));
    int o = s.add(Stratum::point("origin", vec({0, 0})));
    int c = s.add(parametric("osc", 2, interval(0, 2), {"x", "x*sin(1/x)"}));
    s.add_frontier(o, c);
    auto r = validate(s, 200);
    CHECK_MESSAGE(r.pass(), r.str());
    Rng rng(1);
    CHECK(near_closure(s.at(c), vec({0, 0}), 1e-3L, rng));
    CHECK_FALSE(near_closure(s.at(c), vec({0.5L, 0.9L}), 1e-3L, rng));
}
