#include "strat/expr.hpp"

#include <cmath>

namespace strat {

struct Expression::Node {
    Op op = Op::Const;
    int var = -1;
    Real value = 0;
    std::optional<Rational> exact;
    // Optional so that the shared zero node can be built without recursion.
    std::optional<Expression> lhs_;
    std::optional<Expression> rhs_;
    int max_var = -1;
};

std::shared_ptr<const Expression::Node> Expression::zero_node()
{
    static const auto zero = [] {
        auto n = std::make_shared<Expression::Node>();
        n->exact = Rational(0);
        return std::shared_ptr<const Expression::Node>(n);
    }();
    return zero;
}

Expression::Expression() : node_(zero_node()) {}

Expression Expression::variable(int index)
{
    if (index < 0) throw Error("negative variable index");
    auto n = std::make_shared<Node>();
    n->op = Op::Var;
    n->var = index;
    n->max_var = index;
    return Expression(std::move(n));
}

Expression Expression::constant(Real value)
{
    auto n = std::make_shared<Node>();
    n->value = value;
    return Expression(std::move(n));
}

Expression Expression::constant(const Rational& value)
{
    auto n = std::make_shared<Node>();
    n->value = to_real(value);
    n->exact = value;
    return Expression(std::move(n));
}

Expression Expression::binary(Op op, Expression lhs, Expression rhs)
{
    auto n = std::make_shared<Node>();
    n->op = op;
    n->max_var = std::max(lhs.max_variable(), rhs.max_variable());
    n->lhs_ = std::move(lhs);
    n->rhs_ = std::move(rhs);
    return Expression(std::move(n));
}

Expression Expression::unary(Op op, Expression arg)
{
    auto n = std::make_shared<Node>();
    n->op = op;
    n->max_var = arg.max_variable();
    n->lhs_ = std::move(arg);
    return Expression(std::move(n));
}

Op Expression::op() const { return node_->op; }
int Expression::var_index() const { return node_->var; }
Real Expression::value() const { return node_->value; }
const std::optional<Rational>& Expression::exact() const { return node_->exact; }
const Expression& Expression::lhs() const
{
    if (!node_->lhs_) throw Error("expression node has no operand");
    return *node_->lhs_;
}

const Expression& Expression::rhs() const
{
    if (!node_->rhs_) throw Error("expression node has no second operand");
    return *node_->rhs_;
}
int Expression::max_variable() const { return node_->max_var; }

bool Expression::is_constant(long v) const
{
    if (op() != Op::Const) return false;
    if (exact()) return *exact() == v;
    return value() == static_cast<Real>(v);
}

bool operator==(const Expression& a, const Expression& b)
{
    if (a.node_ == b.node_) return true;
    if (a.op() != b.op()) return false;
    switch (a.op()) {
    case Op::Var: return a.var_index() == b.var_index();
    case Op::Const:
        if (a.exact() && b.exact()) return *a.exact() == *b.exact();
        return !a.exact() && !b.exact() && a.value() == b.value();
    case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow:
        return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    default:
        return a.lhs() == b.lhs();
    }
}

// --- smart constructors ---------------------------------------------------

namespace {

bool both_exact(const Expression& a, const Expression& b)
{
    return a.is_constant() && b.is_constant() && a.exact() && b.exact();
}

}  // namespace

Expression operator+(const Expression& a, const Expression& b)
{
    if (a.is_constant(0)) return b;
    if (b.is_constant(0)) return a;
    if (both_exact(a, b)) return Expression::constant(Rational(*a.exact() + *b.exact()));
    return Expression::binary(Op::Add, a, b);
}

Expression operator-(const Expression& a, const Expression& b)
{
    if (b.is_constant(0)) return a;
    if (a.is_constant(0)) return -b;
    if (both_exact(a, b)) return Expression::constant(Rational(*a.exact() - *b.exact()));
    return Expression::binary(Op::Sub, a, b);
}

Expression operator*(const Expression& a, const Expression& b)
{
    if (a.is_constant(0) || b.is_constant(0)) return Expression();
    if (a.is_constant(1)) return b;
    if (b.is_constant(1)) return a;
    if (both_exact(a, b)) return Expression::constant(Rational(*a.exact() * *b.exact()));
    return Expression::binary(Op::Mul, a, b);
}

Expression operator/(const Expression& a, const Expression& b)
{
    if (b.is_constant(1)) return a;
    if (a.is_constant(0) && !b.is_constant(0)) return Expression();
    if (both_exact(a, b) && *b.exact() != 0) return Expression::constant(Rational(*a.exact() / *b.exact()));
    return Expression::binary(Op::Div, a, b);
}

Expression operator-(const Expression& a)
{
    if (a.is_constant()) {
        if (a.exact()) return Expression::constant(Rational(-*a.exact()));
        return Expression::constant(-a.value());
    }
    if (a.op() == Op::Neg) return a.arg();
    return Expression::unary(Op::Neg, a);
}

Expression pow(const Expression& a, const Expression& b)
{
    if (b.is_constant(0)) return Expression::constant(Rational(1));
    if (b.is_constant(1)) return a;
    return Expression::binary(Op::Pow, a, b);
}

Expression exp(const Expression& a) { return Expression::unary(Op::Exp, a); }
Expression log(const Expression& a) { return Expression::unary(Op::Log, a); }
Expression sin(const Expression& a) { return Expression::unary(Op::Sin, a); }
Expression cos(const Expression& a) { return Expression::unary(Op::Cos, a); }
Expression abs(const Expression& a) { return Expression::unary(Op::Abs, a); }
Expression sign(const Expression& a) { return Expression::unary(Op::Sign, a); }

// --- printing ---------------------------------------------------------------

namespace {

int precedence(const Expression& e)
{
    switch (e.op()) {
    case Op::Add: case Op::Sub: return 1;
    case Op::Mul: case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const:
        if (e.exact()) {
            bool frac = boost::multiprecision::denominator(*e.exact()) != 1;
            if (*e.exact() < 0) return frac ? 1 : 3;
            if (frac) return 2;
            return 5;
        }
        return e.value() < 0 ? 3 : 5;
    default: return 5;
    }
}

// 21 significant digits round-trip an x87 long double exactly.
std::string real_literal(Real v) { return format_real(v, 21); }

void print(const Expression& e, const std::vector<std::string>& names, std::string& out);

void print_child(const Expression& c, int min_prec, const std::vector<std::string>& names, std::string& out)
{
    if (precedence(c) < min_prec) {
        out += '(';
        print(c, names, out);
        out += ')';
    } else {
        print(c, names, out);
    }
}

const char* func_name(Op op)
{
    switch (op) {
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Abs: return "abs";
    case Op::Sign: return "sign";
    default: return "?";
    }
}

void print(const Expression& e, const std::vector<std::string>& names, std::string& out)
{
    switch (e.op()) {
    case Op::Var:
        if (e.var_index() < static_cast<int>(names.size())) out += names[e.var_index()];
        else out += "x" + std::to_string(e.var_index() + 1);
        return;
    case Op::Const:
        out += e.exact() ? rational_str(*e.exact()) : real_literal(e.value());
        return;
    case Op::Add:
        print_child(e.lhs(), 1, names, out);
        out += " + ";
        print_child(e.rhs(), 2, names, out);
        return;
    case Op::Sub:
        print_child(e.lhs(), 1, names, out);
        out += " - ";
        print_child(e.rhs(), 2, names, out);
        return;
    case Op::Mul:
        print_child(e.lhs(), 2, names, out);
        out += "*";
        print_child(e.rhs(), 3, names, out);
        return;
    case Op::Div:
        print_child(e.lhs(), 2, names, out);
        out += "/";
        print_child(e.rhs(), 4, names, out);
        return;
    case Op::Pow:
        print_child(e.lhs(), 5, names, out);
        out += "^";
        print_child(e.rhs(), 3, names, out);
        return;
    case Op::Neg:
        out += "-";
        print_child(e.arg(), 3, names, out);
        return;
    default:
        out += func_name(e.op());
        out += '(';
        print(e.arg(), names, out);
        out += ')';
        return;
    }
}

}  // namespace

std::string Expression::str(const std::vector<std::string>& names) const
{
    std::string out;
    print(*this, names, out);
    return out;
}

// --- evaluation -------------------------------------------------------------

namespace {

[[noreturn]] void domain_error(const Expression& e, std::span<const Real> x, const std::string& what)
{
    std::string pt = "(";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) pt += ", ";
        pt += format_real(x[i]);
    }
    throw DomainError(e.str(), pt + ")", what);
}

Real integer_power(Real base, long long n)
{
    bool invert = n < 0;
    unsigned long long k = invert ? static_cast<unsigned long long>(-n) : static_cast<unsigned long long>(n);
    Real result = 1;
    Real b = base;
    while (k) {
        if (k & 1) result *= b;
        b *= b;
        k >>= 1;
    }
    return invert ? 1 / result : result;
}

Real eval_node(const Expression& e, std::span<const Real> x)
{
    switch (e.op()) {
    case Op::Var:
        if (static_cast<std::size_t>(e.var_index()) >= x.size())
            throw Error("point has dimension " + std::to_string(x.size()) + " but expression uses variable " +
                        std::to_string(e.var_index() + 1));
        return x[e.var_index()];
    case Op::Const: return e.value();
    case Op::Add: return eval_node(e.lhs(), x) + eval_node(e.rhs(), x);
    case Op::Sub: return eval_node(e.lhs(), x) - eval_node(e.rhs(), x);
    case Op::Mul: return eval_node(e.lhs(), x) * eval_node(e.rhs(), x);
    case Op::Div: {
        Real den = eval_node(e.rhs(), x);
        if (den == 0) domain_error(e, x, "division by zero");
        return eval_node(e.lhs(), x) / den;
    }
    case Op::Pow: {
        Real base = eval_node(e.lhs(), x);
        const Expression& ex = e.rhs();
        if (ex.is_constant() && ex.exact() && boost::multiprecision::denominator(*ex.exact()) == 1 &&
            boost::multiprecision::abs(*ex.exact()) < Rational(1LL << 62)) {
            long long n = boost::multiprecision::numerator(*ex.exact()).convert_to<long long>();
            if (base == 0 && n < 0) domain_error(e, x, "zero to a negative power");
            return integer_power(base, n);
        }
        Real p = eval_node(ex, x);
        if (std::isfinite(p) && std::floor(p) == p && std::fabs(p) < 0x1p62L) {
            if (base == 0 && p < 0) domain_error(e, x, "zero to a negative power");
            return integer_power(base, static_cast<long long>(p));
        }
        if (!(base > 0)) domain_error(e, x, "non-integer power of a non-positive base");
        return std::pow(base, p);
    }
    case Op::Neg: return -eval_node(e.arg(), x);
    case Op::Exp: return std::exp(eval_node(e.arg(), x));
    case Op::Log: {
        Real a = eval_node(e.arg(), x);
        if (!(a > 0)) domain_error(e, x, "logarithm of a non-positive number");
        return std::log(a);
    }
    case Op::Sin: return std::sin(eval_node(e.arg(), x));
    case Op::Cos: return std::cos(eval_node(e.arg(), x));
    case Op::Abs: return std::fabs(eval_node(e.arg(), x));
    case Op::Sign: {
        Real a = eval_node(e.arg(), x);
        if (a == 0) domain_error(e, x, "derivative of abs at zero");
        return a > 0 ? 1 : -1;
    }
    }
    return 0;
}

}  // namespace

Real eval(const Expression& e, std::span<const Real> x)
{
    Real v = eval_node(e, x);
    if (std::isnan(v)) domain_error(e, x, "undefined value");
    return v;
}

// --- differentiation --------------------------------------------------------

Expression differentiate(const Expression& e, int var)
{
    if (e.max_variable() < var) return Expression();
    switch (e.op()) {
    case Op::Var: return e.var_index() == var ? Expression::constant(Rational(1)) : Expression();
    case Op::Const: return Expression();
    case Op::Add: return differentiate(e.lhs(), var) + differentiate(e.rhs(), var);
    case Op::Sub: return differentiate(e.lhs(), var) - differentiate(e.rhs(), var);
    case Op::Mul:
        return differentiate(e.lhs(), var) * e.rhs() + e.lhs() * differentiate(e.rhs(), var);
    case Op::Div: {
        Expression da = differentiate(e.lhs(), var);
        Expression db = differentiate(e.rhs(), var);
        return (da * e.rhs() - e.lhs() * db) / (e.rhs() * e.rhs());
    }
    case Op::Pow: {
        const Expression& u = e.lhs();
        const Expression& v = e.rhs();
        Expression du = differentiate(u, var);
        if (v.is_constant()) {
            Expression vm1 = v.exact() ? Expression::constant(Rational(*v.exact() - 1))
                                       : Expression::constant(v.value() - 1);
            return v * pow(u, vm1) * du;
        }
        Expression dv = differentiate(v, var);
        return e * (dv * log(u) + v * du / u);
    }
    case Op::Neg: return -differentiate(e.arg(), var);
    case Op::Exp: return e * differentiate(e.arg(), var);
    case Op::Log: return differentiate(e.arg(), var) / e.arg();
    case Op::Sin: return cos(e.arg()) * differentiate(e.arg(), var);
    case Op::Cos: return -(sin(e.arg()) * differentiate(e.arg(), var));
    case Op::Abs: return sign(e.arg()) * differentiate(e.arg(), var);
    case Op::Sign:
        // Zero away from the origin of the argument, undefined at it.
        return Expression::binary(Op::Mul, Expression(), e);
    }
    return Expression();
}

Expression substitute(const Expression& e, const std::vector<Expression>& r)
{
    switch (e.op()) {
    case Op::Var:
        if (static_cast<std::size_t>(e.var_index()) >= r.size()) throw Error("substitution is missing a variable");
        return r[e.var_index()];
    case Op::Const: return e;
    case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow:
        return Expression::binary(e.op(), substitute(e.lhs(), r), substitute(e.rhs(), r));
    default:
        return Expression::unary(e.op(), substitute(e.arg(), r));
    }
}

Symbols Symbols::standard(int n)
{
    Symbols s;
    s.count = n;
    static const char* alias[] = {"x", "y", "z", "t"};
    for (int i = 0; i < n; ++i) {
        s.names["x" + std::to_string(i + 1)] = i;
        if (n <= 4) {
            s.names[alias[i]] = i;
            s.display.push_back(alias[i]);
        } else {
            s.display.push_back("x" + std::to_string(i + 1));
        }
    }
    return s;
}

Symbols Symbols::wing(int n)
{
    if (n > 3) throw Error("wing maps support ambient dimension up to 3");
    Symbols s;
    s.count = n + 1;
    static const char* alias[] = {"x", "y", "z"};
    for (int i = 0; i < n; ++i) {
        s.names["x" + std::to_string(i + 1)] = i;
        s.names[alias[i]] = i;
        s.display.push_back(alias[i]);
    }
    s.names["t"] = n;
    s.display.push_back("t");
    return s;
}

Symbols Symbols::parameters(int k)
{
    if (k > 3) throw Error("parametric strata support up to 3 parameters");
    Symbols s;
    s.count = k;
    static const char* alias[] = {"u", "v", "w"};
    for (int i = 0; i < k; ++i) {
        s.names["u" + std::to_string(i + 1)] = i;
        s.names[alias[i]] = i;
        s.display.push_back(alias[i]);
    }
    return s;
}

}  // namespace strat
