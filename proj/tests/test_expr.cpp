#include "doctest.h"

#include "strat/expr.hpp"
#include "strat/polynomial.hpp"

#include <cmath>
#include <numbers>

using namespace strat;

namespace {

Expression parse2(const char* text) { return parse_expression(text, Symbols::standard(2)); }

Real at(const Expression& e, std::initializer_list<Real> x)
{
    std::vector<Real> v(x);
    return eval(e, std::span<const Real>(v));
}

}  // namespace

TEST_CASE("eval examples")
{
    Real pi = std::numbers::pi_v<Real>;
    CHECK(std::fabs(at(parse2("x*sin(1/x)"), {1 / pi})) < 1e-17L);
    CHECK(at(parse2("y^x"), {2, 3}) == 9);
    // 30-digit reference value of exp(-10).
    auto w = parse_expression("exp(-1/(t*x))", Symbols::wing(1));
    Real v = at(w, {1, 0.1L});
    CHECK(std::fabs(v - 4.53999297624848515355915e-5L) < 1e-20L);
}

TEST_CASE("eval domain errors carry the subexpression")
{
    CHECK_THROWS_AS(at(parse2("log(x)"), {0, 0}), DomainError);
    CHECK_THROWS_AS(at(parse2("1/x"), {0, 0}), DomainError);
    CHECK_THROWS_AS(at(parse2("x^(1/2)"), {-1, 0}), DomainError);
    CHECK_THROWS_AS(at(parse2("y^x"), {0.5L, 0}), DomainError);
    CHECK(at(parse2("x^3"), {-2, 0}) == -8);
    CHECK(at(parse2("x^(-2)"), {-2, 0}) == 0.25L);
    try {
        at(parse2("y + log(x - 1)"), {1, 5});
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(e.subexpression.find("log") != std::string::npos);
        CHECK(e.at.find('1') != std::string::npos);
    }
}

TEST_CASE("evaluation is bitwise deterministic")
{
    auto e = parse2("exp(sin(x*y) - cos(y)/3) + x^y");
    Real a = at(e, {0.7L, 1.3L});
    Real b = at(e, {0.7L, 1.3L});
    CHECK(std::memcmp(&a, &b, sizeof(Real)) == 0);
}

TEST_CASE("differentiate examples")
{
    auto d = differentiate(parse2("x*sin(1/x)"), 0);
    for (Real x : {0.3L, 0.9L, 1.7L}) {
        Real expected = std::sin(1 / x) - std::cos(1 / x) / x;
        CHECK(std::fabs(at(d, {x, 0}) - expected) < 1e-15L);
    }
    CHECK(differentiate(parse2("7/3"), 0).is_constant(0));
    auto dy = differentiate(parse2("y^x"), 1);
    CHECK(std::fabs(at(dy, {2, 3}) - 6) < 1e-8L);
    auto dx = differentiate(parse2("y^x"), 0);
    CHECK(std::fabs(at(dx, {2, 3}) - 9 * std::log(3.0L)) < 1e-15L);
}

TEST_CASE("derivative of abs is undefined at zero")
{
    auto d = differentiate(parse2("abs(x)"), 0);
    CHECK(at(d, {2, 0}) == 1);
    CHECK(at(d, {-2, 0}) == -1);
    CHECK_THROWS_AS(at(d, {0, 0}), DomainError);
}

namespace {

Expression random_expression(Rng& rng, int depth)
{
    if (depth == 0 || rng.uniform() < 0.2L) {
        if (rng.uniform() < 0.7L) return Expression::variable(static_cast<int>(rng.next() % 3));
        return Expression::constant(Rational(static_cast<long>(rng.next() % 9) - 4, 1 + static_cast<long>(rng.next() % 3)));
    }
    auto a = random_expression(rng, depth - 1);
    switch (rng.next() % 11) {
    case 0: return a + random_expression(rng, depth - 1);
    case 1: return a - random_expression(rng, depth - 1);
    case 2: return a * random_expression(rng, depth - 1);
    case 3: return a / random_expression(rng, depth - 1);
    case 4: return pow(a, Expression::constant(Rational(static_cast<long>(rng.next() % 5) - 1)));
    case 5: return pow(exp(a), Expression::variable(static_cast<int>(rng.next() % 3)));
    case 6: return exp(a);
    case 7: return log(exp(a) + Expression::constant(Rational(1)));
    case 8: return sin(a);
    case 9: return cos(a);
    default: return -a;
    }
}

}  // namespace

TEST_CASE("symbolic derivative matches central differences on 200 random pairs")
{
    Rng rng(20261016);
    int checked = 0;
    const Real h = 1e-5L;
    for (int attempt = 0; attempt < 20000 && checked < 200; ++attempt) {
        Expression e = random_expression(rng, 4);
        Vec x(3);
        for (int i = 0; i < 3; ++i) x(i) = rng.uniform(-2, 2);
        int var = static_cast<int>(rng.next() % 3);
        Real value, plus, minus, deriv;
        try {
            value = eval(e, x);
            Vec xp = x, xm = x;
            xp(var) += h;
            xm(var) -= h;
            plus = eval(e, xp);
            minus = eval(e, xm);
            deriv = eval(differentiate(e, var), x);
        } catch (const DomainError&) {
            continue;
        }
        // Stay away from poles and blow-ups where the difference quotient
        // itself is meaningless.
        if (!std::isfinite(value) || std::fabs(value) > 1e3L || std::fabs(deriv) > 1e3L) continue;
        Real second = (plus - 2 * value + minus) / (h * h);
        if (std::fabs(second) > 1e4L) continue;
        Real fd = (plus - minus) / (2 * h);
        CHECK_MESSAGE(std::fabs(deriv - fd) <= 1e-6L * (1 + std::fabs(value)), e.str());
        ++checked;
    }
    CHECK(checked == 200);
}

TEST_CASE("parser")
{
    CHECK(parse2("x + y*2").str() == "x1 + x2*2");
    CHECK_THROWS_AS(parse2("x + "), ParseError);
    try {
        parse_expression("x +\n  (y * q)", Symbols::standard(2));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.column == 8);
    }
    CHECK_THROWS_AS(parse2("sin x"), ParseError);
    CHECK(parse2("2^3^2").str() == "2^3^2");
    CHECK(at(parse2("2^3^2"), {0, 0}) == 512);
    CHECK(at(parse2("-2^2"), {0, 0}) == -4);
    CHECK(at(parse2("1.5e1 + 0.25"), {0, 0}) == 15.25L);
    CHECK(*parse2("1/3").exact() == Rational(1, 3));
}

TEST_CASE("printing round-trips through the parser")
{
    Symbols sym = Symbols::standard(3);
    const char* samples[] = {
        "x*-3/7", "-(x - y) - (z - 1)", "x/(y*z)", "(x^2)^3", "x^-2", "-x^2", "exp(-1/(x*y))",
        "x - (y - z)", "x/(y/z)", "(-2)^x", "abs(x)*sign(y - 1/2)", "0.125*x - 1e-3",
    };
    Rng rng(5);
    for (const char* s : samples) {
        Expression e = parse_expression(s, sym);
        Expression back = parse_expression(e.str(sym.display), sym);
        CHECK_MESSAGE(back == e, s);
        Vec x(3);
        x << 0.8L, 1.9L, 0.3L;
        Real a = 0, b = 0;
        bool ok = true;
        try {
            a = eval(e, x);
            b = eval(back, x);
        } catch (const DomainError&) {
            ok = false;
        }
        if (ok) CHECK(a == b);
    }
    Real c = 0.1L;
    Expression real_const = Expression::constant(c) * Expression::variable(0);
    Expression back = parse_expression(real_const.str(sym.display), sym);
    Vec x(3);
    x << 1, 0, 0;
    CHECK(eval(back, x) == c);
}

TEST_CASE("gradient_poly examples")
{
    Symbols sym = Symbols::standard(3);
    auto g = gradient_poly(Polynomial::parse("x^2 - z*y^2", 3));
    CHECK(g[0] == Polynomial::parse("2*x", 3));
    CHECK(g[1] == Polynomial::parse("-2*z*y", 3));
    CHECK(g[2] == Polynomial::parse("-y^2", 3));
    auto c = gradient_poly(Polynomial::parse("x*y", 2));
    CHECK(c[0] == Polynomial::parse("y", 2));
    CHECK(c[1] == Polynomial::parse("x", 2));
    auto k = gradient_poly(Polynomial::parse("y^2 - x^3", 2));
    CHECK(k[0] == Polynomial::parse("-3*x^2", 2));
    CHECK(k[1] == Polynomial::parse("2*y", 2));
}

TEST_CASE("polynomial basics")
{
    auto p = Polynomial::parse("x*y - x*y + 0*z", 3);
    CHECK(p.is_zero());
    CHECK(p.terms().empty());
    CHECK(Polynomial::parse("x^3*y + y", 2).degree() == 4);
    CHECK_THROWS(Polynomial::parse("sin(x)", 2));
    CHECK_THROWS(Polynomial::parse("x^(1/2)", 2));
    auto q = Polynomial::parse("3/4*x^2 - y/5 + 2", 2);
    CHECK(Polynomial::from_expression(q.to_expression(), 2) == q);
}

namespace {

Polynomial random_poly(Rng& rng, int n)
{
    Polynomial p(n);
    int terms = 1 + static_cast<int>(rng.next() % 5);
    for (int i = 0; i < terms; ++i) {
        Monomial m(static_cast<std::size_t>(n));
        for (auto& e : m) e = static_cast<int>(rng.next() % 3);
        p.add_term(m, Rational(static_cast<long>(rng.next() % 19) - 9, 1 + static_cast<long>(rng.next() % 4)));
    }
    return p;
}

}  // namespace

TEST_CASE("polynomial ring axioms and exact evaluation of products")
{
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        auto a = random_poly(rng, 3), b = random_poly(rng, 3), c = random_poly(rng, 3);
        CHECK(a + b == b + a);
        CHECK(a * b == b * a);
        CHECK((a + b) + c == a + (b + c));
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK((a - a).is_zero());
        auto ab = a * b;
        for (const auto& [m, coeff] : ab.terms()) CHECK(coeff != 0);
        std::vector<Rational> x = {Rational(static_cast<long>(rng.next() % 7) - 3, 2),
                                   Rational(static_cast<long>(rng.next() % 7) - 3, 5), Rational(2, 3)};
        CHECK((a * b).eval_exact(x) == a.eval_exact(x) * b.eval_exact(x));
    }
}

TEST_CASE("square-free test")
{
    CHECK(is_square_free(Polynomial::parse("x*y", 2)));
    CHECK(is_square_free(Polynomial::parse("y^2 - x^3", 2)));
    CHECK(is_square_free(Polynomial::parse("x^2 - z*y^2", 3)));
    CHECK_FALSE(is_square_free(Polynomial::parse("(x - y)^2", 2)));
    CHECK_FALSE(is_square_free(Polynomial::parse("x^2*y", 2)));
    CHECK_FALSE(is_square_free(Polynomial::parse("(x^2 + y^2 - 1)^2*(x + z)", 3)));
}

TEST_CASE("exact rational conversions")
{
    CHECK(to_real(Rational(1, 3)) == 1.0L / 3.0L);
    CHECK(exact_rational(0.375L) == Rational(3, 8));
    CHECK(to_real(exact_rational(0.1L)) == 0.1L);
    CHECK(parse_rational("0.125") == Rational(1, 8));
    CHECK(parse_rational("-3/4") == Rational(-3, 4));
    CHECK(parse_rational("1e-3") == Rational(1, 1000));
}
