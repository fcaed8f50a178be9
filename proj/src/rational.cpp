#include "strat/rational.hpp"

#include <cmath>
#include <cstdio>

namespace strat {

Real to_real(const Rational& q)
{
    using boost::multiprecision::msb;
    Integer num = boost::multiprecision::numerator(q);
    Integer den = boost::multiprecision::denominator(q);
    if (num == 0) return 0;
    bool neg = num < 0;
    if (neg) num = -num;
    // Scale so the quotient carries 68 significant bits, then fold the
    // remainder into a sticky bit so the final conversion rounds correctly.
    long shift = 68 - (static_cast<long>(msb(num)) - static_cast<long>(msb(den)));
    Integer scaled_num = shift > 0 ? Integer(num << shift) : num;
    Integer scaled_den = shift < 0 ? Integer(den << -shift) : den;
    Integer quot, rem;
    boost::multiprecision::divide_qr(scaled_num, scaled_den, quot, rem);
    if (rem != 0) quot |= 1;
    // quot has at most 70 bits: split to avoid relying on 128-bit conversions.
    Integer hi = quot >> 32;
    Integer lo = quot & Integer(0xFFFFFFFFu);
    Real r = std::ldexp(static_cast<Real>(hi.convert_to<unsigned long long>()), 32) +
             static_cast<Real>(lo.convert_to<unsigned long long>());
    r = std::ldexp(r, static_cast<int>(-shift));
    return neg ? -r : r;
}

Rational exact_rational(Real v)
{
    if (!std::isfinite(v)) throw Error("cannot convert non-finite value to a rational");
    if (v == 0) return Rational(0);
    int e = 0;
    Real m = std::frexp(v, &e);  // v = m * 2^e, 0.5 <= |m| < 1
    // 64-bit mantissa for x87 long double.
    Real scaled = std::ldexp(m, 64);
    bool neg = scaled < 0;
    if (neg) scaled = -scaled;
    unsigned long long mant = static_cast<unsigned long long>(scaled);
    Rational r{Integer(mant)};
    int p = e - 64;
    if (p > 0) r *= Rational(Integer(1) << p);
    else if (p < 0) r /= Rational(Integer(1) << -p);
    return neg ? Rational(-r) : r;
}

Rational parse_rational(const std::string& text)
{
    std::string s = text;
    bool neg = false;
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
        neg = s[i] == '-';
        ++i;
    }
    auto slash = s.find('/', i);
    if (slash != std::string::npos) {
        Rational a = parse_rational(s.substr(i, slash - i));
        Rational b = parse_rational(s.substr(slash + 1));
        if (b == 0) throw Error("zero denominator in '" + text + "'");
        Rational r = a / b;
        return neg ? Rational(-r) : r;
    }
    Integer digits = 0;
    long frac_digits = 0;
    bool any = false, dot = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c >= '0' && c <= '9') {
            digits = digits * 10 + (c - '0');
            if (dot) ++frac_digits;
            any = true;
        } else if (c == '.' && !dot) {
            dot = true;
        } else {
            break;
        }
    }
    if (!any) throw Error("invalid number '" + text + "'");
    long exponent = 0;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        exponent = std::stol(s.substr(i + 1));
        i = s.size();
    }
    if (i != s.size()) throw Error("invalid number '" + text + "'");
    long p = exponent - frac_digits;
    Rational r(digits);
    Integer ten = 1;
    for (long k = 0; k < std::labs(p); ++k) ten *= 10;
    if (p > 0) r *= Rational(ten);
    else if (p < 0) r /= Rational(ten);
    return neg ? Rational(-r) : r;
}

std::string rational_str(const Rational& q)
{
    Integer den = boost::multiprecision::denominator(q);
    if (den == 1) return boost::multiprecision::numerator(q).str();
    return boost::multiprecision::numerator(q).str() + "/" + den.str();
}

std::string shortest_text(Real v)
{
    if (!std::isfinite(v)) throw Error("non-finite value has no decimal text");
    char buf[64];
    for (int digits = 1; digits <= 21; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*Lg", digits, v);
        if (to_real(parse_rational(buf)) == v) break;
    }
    return buf;
}

}  // namespace strat
