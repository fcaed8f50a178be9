#pragma once

// Sparse multivariate polynomials with exact rational coefficients. These
// describe the implicit strata; singular loci are computed from them.

#include "strat/expr.hpp"
#include "strat/rational.hpp"

#include <map>
#include <string>
#include <vector>

namespace strat {

using Monomial = std::vector<int>;

class Polynomial {
public:
    explicit Polynomial(int nvars = 0) : nvars_(nvars) {}

    static Polynomial constant(int nvars, const Rational& c);
    static Polynomial variable(int nvars, int index);
    /// Converts an expression built from +, -, *, non-negative integer powers,
    /// variables and rational constants. Throws Error otherwise.
    static Polynomial from_expression(const Expression& e, int nvars);
    static Polynomial parse(std::string_view text, int nvars);

    int nvars() const { return nvars_; }
    /// Total degree; 0 for constants including the zero polynomial.
    int degree() const;
    int degree_in(int var) const;
    bool is_zero() const { return terms_.empty(); }
    const std::map<Monomial, Rational>& terms() const { return terms_; }

    void add_term(const Monomial& m, const Rational& c);

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator-() const;
    Polynomial pow(int k) const;
    bool operator==(const Polynomial& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }

    Polynomial derivative(int var) const;
    Rational eval_exact(const std::vector<Rational>& x) const;
    /// Replaces each variable by a polynomial (all in the same number of variables).
    Polynomial compose(const std::vector<Polynomial>& replacements) const;

    Expression to_expression() const;
    std::string str(const std::vector<std::string>& names = {}) const;

private:
    int nvars_;
    std::map<Monomial, Rational> terms_;
};

std::vector<Polynomial> gradient_poly(const Polynomial& p);

/// Floating point evaluator of a polynomial and its gradient; the
/// coefficients are rounded once at construction.
class RealPolynomial {
public:
    RealPolynomial() = default;
    explicit RealPolynomial(const Polynomial& p);

    int nvars() const { return nvars_; }
    Real eval(const Vec& x) const;
    Vec gradient(const Vec& x) const;

private:
    struct Term {
        std::vector<int> exps;
        Real coeff;
    };
    int nvars_ = 0;
    std::vector<Term> terms_;
};

/// Univariate polynomial over Q, coefficients by increasing degree.
using UPoly = std::vector<Rational>;
UPoly upoly_gcd(UPoly a, UPoly b);
int upoly_degree(const UPoly& p);

/// Restricts p to the line obtained by fixing every variable except `var`.
UPoly specialize(const Polynomial& p, int var, const std::vector<Rational>& values);

/// True when p has no repeated factor, tested by univariate gcd(p, dp/dx_i)
/// over several rational specialisations of the remaining variables.
bool is_square_free(const Polynomial& p);

}  // namespace strat
