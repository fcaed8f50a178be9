#include "strat/core.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace strat {

Real Rng::normal()
{
    // Box-Muller; the second variate is discarded to keep the stream simple.
    Real u1 = uniform();
    while (u1 <= 0) u1 = uniform();
    Real u2 = uniform();
    return std::sqrt(-2 * std::log(u1)) * std::cos(2 * std::numbers::pi_v<Real> * u2);
}

Vec Rng::unit_vector(int n)
{
    Vec v(n);
    Real norm = 0;
    while (norm < 1e-6L) {
        for (int i = 0; i < n; ++i) v(i) = normal();
        norm = v.norm();
    }
    return v / norm;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c)
{
    Rng r(seed ^ 0x5851F42D4C957F2Dull);
    std::uint64_t h = r.next();
    for (std::uint64_t part : {a, b, c}) {
        Rng m(h ^ (part * 0x9E3779B97F4A7C15ull + 0x632BE59BD9B4E019ull));
        h = m.next();
    }
    return h;
}

std::string format_real(Real v, int digits)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*Lg", digits, v);
    return buf;
}

std::string format_point(const Vec& x)
{
    std::string s = "(";
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i) s += ", ";
        s += format_real(x(i));
    }
    return s + ")";
}

}  // namespace strat
