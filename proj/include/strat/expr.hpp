#pragma once

// Closed-form scalar expressions: the concrete carrier for definable
// functions. Trees are immutable and shared; evaluation is pure.

#include "strat/core.hpp"
#include "strat/rational.hpp"

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace strat {

enum class Op { Var, Const, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sin, Cos, Abs, Sign };

class Expression {
public:
    /// The constant 0.
    Expression();

    static Expression variable(int index);
    static Expression constant(Real value);
    static Expression constant(const Rational& value);
    static Expression binary(Op op, Expression lhs, Expression rhs);
    static Expression unary(Op op, Expression arg);

    Op op() const;
    int var_index() const;
    Real value() const;
    /// Exact value for constants that came from literals or rational folding.
    const std::optional<Rational>& exact() const;
    const Expression& lhs() const;
    const Expression& rhs() const;
    const Expression& arg() const { return lhs(); }

    bool is_constant() const { return op() == Op::Const; }
    bool is_constant(long v) const;

    /// Largest variable index referenced, -1 for closed expressions.
    int max_variable() const;

    /// Infix text using `names[i]` for variable i (x1, x2, ... when empty).
    std::string str(const std::vector<std::string>& names = {}) const;

    friend bool operator==(const Expression& a, const Expression& b);

private:
    struct Node;
    static std::shared_ptr<const Node> zero_node();
    explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

// Smart constructors. They fold trivial identities (0 + a, 1 * a, constant
// arithmetic on exact rationals) but do no further simplification.
Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression pow(const Expression& a, const Expression& b);
Expression exp(const Expression& a);
Expression log(const Expression& a);
Expression sin(const Expression& a);
Expression cos(const Expression& a);
Expression abs(const Expression& a);
Expression sign(const Expression& a);

Real eval(const Expression& e, std::span<const Real> x);
inline Real eval(const Expression& e, const Vec& x) { return eval(e, std::span<const Real>(x.data(), static_cast<std::size_t>(x.size()))); }

Expression differentiate(const Expression& e, int var_index);

/// Replaces variable i by replacements[i].
Expression substitute(const Expression& e, const std::vector<Expression>& replacements);

/// Name table for the text syntax.
struct Symbols {
    std::map<std::string, int> names;
    std::vector<std::string> display;  // canonical printing names
    int count = 0;

    /// x1..xn, with x,y,z,t aliases when n <= 4.
    static Symbols standard(int n);
    /// Base point coordinates x1..xn (x,y,z aliases) plus the wing parameter t.
    static Symbols wing(int n);
    /// Parameters of a parametric stratum: u1..uk with u,v,w aliases.
    static Symbols parameters(int k);
};

Expression parse_expression(std::string_view text, const Symbols& symbols);

}  // namespace strat
