#include "strat/polynomial.hpp"

#include <algorithm>
#include <numeric>

namespace strat {

Polynomial Polynomial::constant(int nvars, const Rational& c)
{
    Polynomial p(nvars);
    p.add_term(Monomial(nvars, 0), c);
    return p;
}

Polynomial Polynomial::variable(int nvars, int index)
{
    if (index < 0 || index >= nvars) throw Error("variable index out of range");
    Polynomial p(nvars);
    Monomial m(nvars, 0);
    m[index] = 1;
    p.add_term(m, Rational(1));
    return p;
}

void Polynomial::add_term(const Monomial& m, const Rational& c)
{
    if (static_cast<int>(m.size()) != nvars_) throw Error("monomial arity mismatch");
    if (c == 0) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        terms_.emplace(m, c);
        return;
    }
    it->second += c;
    if (it->second == 0) terms_.erase(it);
}

int Polynomial::degree() const
{
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, std::accumulate(m.begin(), m.end(), 0));
    return d;
}

int Polynomial::degree_in(int var) const
{
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m[var]);
    return d;
}

Polynomial Polynomial::operator+(const Polynomial& o) const
{
    if (o.nvars_ != nvars_) throw Error("polynomial arity mismatch");
    Polynomial r = *this;
    for (const auto& [m, c] : o.terms_) r.add_term(m, c);
    return r;
}

Polynomial Polynomial::operator-() const
{
    Polynomial r(nvars_);
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
    return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator*(const Polynomial& o) const
{
    if (o.nvars_ != nvars_) throw Error("polynomial arity mismatch");
    Polynomial r(nvars_);
    for (const auto& [ma, ca] : terms_) {
        for (const auto& [mb, cb] : o.terms_) {
            Monomial m(nvars_);
            for (int i = 0; i < nvars_; ++i) m[i] = ma[i] + mb[i];
            r.add_term(m, ca * cb);
        }
    }
    return r;
}

Polynomial Polynomial::pow(int k) const
{
    if (k < 0) throw Error("negative polynomial power");
    Polynomial r = constant(nvars_, Rational(1));
    Polynomial b = *this;
    while (k) {
        if (k & 1) r = r * b;
        k >>= 1;
        if (k) b = b * b;
    }
    return r;
}

Polynomial Polynomial::derivative(int var) const
{
    Polynomial r(nvars_);
    for (const auto& [m, c] : terms_) {
        if (m[var] == 0) continue;
        Monomial d = m;
        --d[var];
        r.add_term(d, c * m[var]);
    }
    return r;
}

Rational Polynomial::eval_exact(const std::vector<Rational>& x) const
{
    if (static_cast<int>(x.size()) < nvars_) throw Error("point dimension too small");
    Rational sum = 0;
    for (const auto& [m, c] : terms_) {
        Rational t = c;
        for (int i = 0; i < nvars_; ++i)
            for (int k = 0; k < m[i]; ++k) t *= x[i];
        sum += t;
    }
    return sum;
}

Polynomial Polynomial::compose(const std::vector<Polynomial>& r) const
{
    if (static_cast<int>(r.size()) != nvars_) throw Error("composition needs one polynomial per variable");
    int out_vars = r.empty() ? 0 : r.front().nvars();
    Polynomial result(out_vars);
    for (const auto& [m, c] : terms_) {
        Polynomial t = constant(out_vars, c);
        for (int i = 0; i < nvars_; ++i)
            if (m[i]) t = t * r[i].pow(m[i]);
        result = result + t;
    }
    return result;
}

namespace {

Polynomial convert(const Expression& e, int n)
{
    switch (e.op()) {
    case Op::Var:
        return Polynomial::variable(n, e.var_index());
    case Op::Const:
        if (!e.exact()) throw Error("polynomial coefficients must be exact rationals");
        return Polynomial::constant(n, *e.exact());
    case Op::Add: return convert(e.lhs(), n) + convert(e.rhs(), n);
    case Op::Sub: return convert(e.lhs(), n) - convert(e.rhs(), n);
    case Op::Mul: return convert(e.lhs(), n) * convert(e.rhs(), n);
    case Op::Neg: return -convert(e.arg(), n);
    case Op::Div: {
        const Expression& d = e.rhs();
        if (!d.is_constant() || !d.exact() || *d.exact() == 0)
            throw Error("polynomial division only by nonzero rational constants");
        return convert(e.lhs(), n) * Polynomial::constant(n, Rational(1 / *d.exact()));
    }
    case Op::Pow: {
        const Expression& k = e.rhs();
        if (!k.is_constant() || !k.exact() || boost::multiprecision::denominator(*k.exact()) != 1 ||
            *k.exact() < 0 || *k.exact() > 64)
            throw Error("polynomial powers must be small non-negative integers");
        return convert(e.lhs(), n).pow(boost::multiprecision::numerator(*k.exact()).convert_to<int>());
    }
    default:
        throw Error("'" + e.str() + "' is not a polynomial");
    }
}

}  // namespace

Polynomial Polynomial::from_expression(const Expression& e, int nvars)
{
    if (e.max_variable() >= nvars) throw Error("polynomial uses more variables than the ambient dimension");
    return convert(e, nvars);
}

Polynomial Polynomial::parse(std::string_view text, int nvars)
{
    return from_expression(parse_expression(text, Symbols::standard(nvars)), nvars);
}

Expression Polynomial::to_expression() const
{
    Expression sum;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [m, c] = *it;
        Expression mono;
        bool has_var = false;
        for (int i = 0; i < nvars_; ++i) {
            if (!m[i]) continue;
            Expression v = Expression::variable(i);
            if (m[i] > 1) v = Expression::binary(Op::Pow, v, Expression::constant(Rational(m[i])));
            mono = has_var ? Expression::binary(Op::Mul, mono, v) : v;
            has_var = true;
        }
        Rational mag = c < 0 ? Rational(-c) : c;
        Expression term;
        if (!has_var) term = Expression::constant(mag);
        else if (mag == 1) term = mono;
        else term = Expression::binary(Op::Mul, Expression::constant(mag), mono);
        if (first) {
            sum = c < 0 ? (term.is_constant() ? Expression::constant(Rational(c)) : Expression::unary(Op::Neg, term))
                        : term;
            first = false;
        } else {
            sum = Expression::binary(c < 0 ? Op::Sub : Op::Add, sum, term);
        }
    }
    return sum;
}

std::string Polynomial::str(const std::vector<std::string>& names) const
{
    return to_expression().str(names);
}

std::vector<Polynomial> gradient_poly(const Polynomial& p)
{
    std::vector<Polynomial> g;
    g.reserve(p.nvars());
    for (int i = 0; i < p.nvars(); ++i) g.push_back(p.derivative(i));
    return g;
}

RealPolynomial::RealPolynomial(const Polynomial& p) : nvars_(p.nvars())
{
    for (const auto& [m, c] : p.terms()) terms_.push_back({m, to_real(c)});
}

namespace {

Real ipow(Real b, int k)
{
    Real r = 1;
    while (k) {
        if (k & 1) r *= b;
        b *= b;
        k >>= 1;
    }
    return r;
}

}  // namespace

Real RealPolynomial::eval(const Vec& x) const
{
    Real s = 0;
    for (const auto& t : terms_) {
        Real v = t.coeff;
        for (int i = 0; i < nvars_; ++i)
            if (t.exps[i]) v *= ipow(x(i), t.exps[i]);
        s += v;
    }
    return s;
}

Vec RealPolynomial::gradient(const Vec& x) const
{
    Vec g = Vec::Zero(nvars_);
    for (const auto& t : terms_) {
        for (int j = 0; j < nvars_; ++j) {
            if (!t.exps[j]) continue;
            Real v = t.coeff * t.exps[j];
            for (int i = 0; i < nvars_; ++i) {
                int k = i == j ? t.exps[i] - 1 : t.exps[i];
                if (k) v *= ipow(x(i), k);
            }
            g(j) += v;
        }
    }
    return g;
}

// --- univariate helpers -------------------------------------------------------

int upoly_degree(const UPoly& p)
{
    for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i)
        if (p[i] != 0) return i;
    return -1;
}

namespace {

void trim(UPoly& p)
{
    while (!p.empty() && p.back() == 0) p.pop_back();
}

UPoly upoly_rem(UPoly a, const UPoly& b)
{
    int db = upoly_degree(b);
    if (db < 0) throw Error("division by the zero polynomial");
    trim(a);
    while (upoly_degree(a) >= db) {
        int da = upoly_degree(a);
        Rational q = a[da] / b[db];
        for (int i = 0; i <= db; ++i) a[da - db + i] -= q * b[i];
        trim(a);
    }
    return a;
}

}  // namespace

UPoly upoly_gcd(UPoly a, UPoly b)
{
    trim(a);
    trim(b);
    while (upoly_degree(b) >= 0) {
        UPoly r = upoly_rem(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        Rational lead = a.back();
        for (auto& c : a) c /= lead;
    }
    return a;
}

UPoly specialize(const Polynomial& p, int var, const std::vector<Rational>& values)
{
    UPoly u(p.degree_in(var) + 1, Rational(0));
    for (const auto& [m, c] : p.terms()) {
        Rational t = c;
        for (int i = 0; i < p.nvars(); ++i) {
            if (i == var) continue;
            for (int k = 0; k < m[i]; ++k) t *= values[i];
        }
        u[m[var]] += t;
    }
    trim(u);
    return u;
}

bool is_square_free(const Polynomial& p)
{
    if (p.is_zero()) return false;
    // Fixed, unremarkable rationals: a repeated factor survives every
    // specialisation, a square-free p loses its gcd for all but finitely many.
    static const Rational probes[3][3] = {
        {Rational(3, 7), Rational(-5, 11), Rational(13, 17)},
        {Rational(-19, 23), Rational(29, 31), Rational(-2, 37)},
        {Rational(41, 43), Rational(47, 53), Rational(-59, 61)},
    };
    for (int var = 0; var < p.nvars(); ++var) {
        if (p.degree_in(var) == 0) continue;
        Polynomial dp = p.derivative(var);
        bool repeated = true;
        for (const auto& probe : probes) {
            std::vector<Rational> values(p.nvars());
            for (int i = 0; i < p.nvars(); ++i) values[i] = probe[i % 3];
            UPoly g = upoly_gcd(specialize(p, var, values), specialize(dp, var, values));
            if (upoly_degree(g) <= 0) {
                repeated = false;
                break;
            }
        }
        if (repeated) return false;
    }
    return true;
}

}  // namespace strat
