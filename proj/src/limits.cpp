#include "strat/limits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace strat {

std::string to_string(LimitClass c)
{
    switch (c) {
    case LimitClass::ConvergesToZero: return "ConvergesToZero";
    case LimitClass::Bounded: return "Bounded";
    case LimitClass::Diverges: return "Diverges";
    case LimitClass::Inconclusive: return "Inconclusive";
    }
    return "?";
}

LimitVerdict classify_limit(const std::vector<Real>& t, const std::vector<Real>& g, const LimitOptions& opt)
{
    if (t.size() != g.size()) throw Error("classify_limit: t and g differ in length");
    const std::size_t n = t.size();
    if (n < 8) throw TooFewSamples("classify_limit needs at least 8 samples, got " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!(t[i] > 0)) throw Error("classify_limit: t must be positive");
        if (i && !(t[i] < t[i - 1])) throw Error("classify_limit: t must be strictly decreasing");
    }
    LimitVerdict v;
    for (Real x : g) {
        if (std::isnan(x) || x < 0) return v;
    }
    // Supremum envelope over a window of 3 guards against sampling the zeros
    // of an oscillating g.
    std::vector<Real> e(n);
    for (std::size_t i = 0; i < n; ++i) {
        Real m = g[i];
        if (i > 0) m = std::max(m, g[i - 1]);
        if (i + 1 < n) m = std::max(m, g[i + 1]);
        e[i] = m;
    }
    const std::size_t start = n / 2;
    Real tail_max = 0;
    for (std::size_t i = start; i < n; ++i) tail_max = std::max(tail_max, e[i]);
    v.bound = tail_max;
    if (!std::isfinite(tail_max)) {
        v.cls = LimitClass::Diverges;
        v.slope = -std::numeric_limits<Real>::infinity();
        return v;
    }
    if (tail_max < opt.zero_floor || e[n - 1] < opt.zero_floor) {
        v.cls = LimitClass::ConvergesToZero;
        v.slope = std::numeric_limits<Real>::infinity();
        return v;
    }
    // The last sample has a truncated window; it still enters through e[n-2].
    const std::size_t m = n - 1 - start;
    Real sx = 0, sy = 0;
    std::vector<Real> lx(m), ly(m);
    for (std::size_t i = 0; i < m; ++i) {
        lx[i] = std::log(t[start + i]);
        ly[i] = std::log(std::max(e[start + i], opt.zero_floor));
        sx += lx[i];
        sy += ly[i];
    }
    Real mx = sx / m, my = sy / m, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    v.slope = sxy / sxx;
    Real ss = 0;
    for (std::size_t i = 0; i < m; ++i) {
        Real r = ly[i] - (my + v.slope * (lx[i] - mx));
        ss += r * r;
    }
    v.residual = std::sqrt(ss / m);
    if (v.residual > opt.max_residual) v.cls = LimitClass::Inconclusive;
    else if (v.slope >= opt.slope_tol) v.cls = LimitClass::ConvergesToZero;
    else if (v.slope <= -opt.slope_tol) v.cls = LimitClass::Diverges;
    else v.cls = LimitClass::Bounded;
    return v;
}

Vec secant_direction(const Vec& x, const Vec& y)
{
    Vec d = x - y;
    Real n = d.norm();
    if (!(n > 0)) throw Error("secant direction of coincident points");
    return d / n;
}

namespace {

StratumPoint foot(const Stratum& lower, const Vec& x, const StratumPoint& y0)
{
    if (lower.dim() == 0) return y0;
    auto y = nearest_point(lower, x, y0);
    return y ? *y : y0;
}

bool valid_step(const Stratum& upper, const StratumPoint& p, const Vec& y0, Real t, Real prev_dist)
{
    Real d = (p.x - y0).norm();
    if (d < t / 2 || d > 2 * t || !(d < prev_dist)) return false;
    try {
        tangent_at(upper, p);
    } catch (const Error&) {
        return false;
    }
    return true;
}

}  // namespace

WingSample sample_wing(const Stratum& lower, const Stratum& upper, const StratumPoint& y0, const std::vector<Real>& t,
                       std::uint64_t seed, const std::string& label)
{
    WingSample w;
    w.label = label;
    w.base = y0;
    Rng rng(seed);
    const Vec& c = y0.x;
    Real prev = std::numeric_limits<Real>::infinity();

    if (upper.is_implicit()) {
        const auto& g = upper.implicit();
        std::optional<Vec> last;
        Real last_t = 0;
        for (Real ti : t) {
            std::optional<StratumPoint> p;
            if (last) {
                // Shrink the previous point toward y0 and re-project.
                auto q = newton_project(g, c + (ti / last_t) * (*last - c), ti);
                if (q) {
                    bool ok = false;
                    try {
                        ok = g.min_inequality(*q) > 0;
                    } catch (const DomainError&) {
                    }
                    StratumPoint sp{*q, std::nullopt};
                    if (ok && valid_step(upper, sp, c, ti, prev)) p = sp;
                }
            }
            if (!p) {
                for (int attempt = 0; attempt < 4 && !p; ++attempt) {
                    auto q = approach_point(upper, c, ti, rng, 8);
                    if (q && valid_step(upper, *q, c, ti, prev)) p = q;
                }
            }
            if (!p) {
                ++w.failures;
                continue;
            }
            prev = (p->x - c).norm();
            last = p->x;
            last_t = ti;
            w.points.push_back({ti, *p, foot(lower, p->x, y0)});
        }
    } else {
        const auto& g = upper.parametric();
        Vec u0 = closest_parameter(g, c);
        auto gap = [&](const Vec& u, Real r) {
            try {
                Real d = (g.map(u) - c).norm();
                return std::isfinite(d) ? d - r : std::numeric_limits<Real>::infinity();
            } catch (const DomainError&) {
                return std::numeric_limits<Real>::infinity();
            }
        };
        std::optional<Vec> us;
        for (int attempt = 0; attempt < 64 && !us; ++attempt) {
            Vec cand = g.domain().random_point(rng);
            if (gap(cand, t.front()) > 0) us = cand;
        }
        Real hi_s = 1;
        for (Real ti : t) {
            if (!us || !(gap(u0, ti) < 0)) {
                ++w.failures;
                continue;
            }
            Real lo = 0, hi = hi_s;
            if (!(gap(u0 + hi * (*us - u0), ti) > 0)) {
                ++w.failures;
                continue;
            }
            for (int it = 0; it < 200; ++it) {
                Real mid = (lo + hi) / 2;
                if (mid == lo || mid == hi) break;
                (gap(u0 + mid * (*us - u0), ti) < 0 ? lo : hi) = mid;
            }
            Vec u = u0 + hi * (*us - u0);
            StratumPoint p{g.map(u), u};
            if (!valid_step(upper, p, c, ti, prev)) {
                ++w.failures;
                continue;
            }
            hi_s = hi;
            prev = (p.x - c).norm();
            w.points.push_back({ti, p, foot(lower, p.x, y0)});
        }
    }
    if (2 * w.failures > static_cast<int>(t.size()))
        throw WingNotFound("no wing from " + format_point(c) + " into '" + upper.name + "' (" +
                           std::to_string(w.failures) + " of " + std::to_string(t.size()) + " grid points failed)");
    return w;
}

WingSample explicit_wing(const Stratum& lower, const Stratum& upper, const StratumPoint& y0, const ExplicitWing& ew,
                         const std::vector<Real>& grid)
{
    const std::vector<Real>& t = ew.t_values.empty() ? grid : ew.t_values;
    WingSample w;
    w.label = ew.label.empty() ? "explicit" : ew.label;
    w.base = y0;
    const int n = upper.ambient_dim();
    Real prev = std::numeric_limits<Real>::infinity();
    for (Real ti : t) {
        Vec args(n + 1);
        args.head(n) = y0.x;
        args(n) = ti;
        try {
            StratumPoint p;
            if (ew.kind == ExplicitWing::Kind::Point) {
                p.x = Vec(n);
                for (int i = 0; i < n; ++i) p.x(i) = eval(ew.map[static_cast<std::size_t>(i)], args);
                if (!membership(upper, p.x)) throw Error("off the stratum");
                if (!upper.is_implicit()) p.u = locate_preimage(upper.parametric(), p.x);
            } else {
                const auto& g = upper.parametric();
                Vec u(g.dim());
                for (int j = 0; j < g.dim(); ++j) u(j) = eval(ew.map[static_cast<std::size_t>(j)], args);
                for (int j = 0; j < g.dim(); ++j)
                    if (!(u(j) > g.domain().lo(j) && u(j) < g.domain().hi(j))) throw Error("outside the domain");
                p = {g.map(u), u};
            }
            Real d = (p.x - y0.x).norm();
            if (!(d > 0) || !(d < prev)) throw Error("not approaching the base point");
            tangent_at(upper, p);
            prev = d;
            w.points.push_back({ti, p, foot(lower, p.x, y0)});
        } catch (const Error&) {
            ++w.failures;
        }
    }
    if (2 * w.failures > static_cast<int>(t.size()))
        throw WingNotFound("explicit wing '" + w.label + "' failed at " + std::to_string(w.failures) + " of " +
                           std::to_string(t.size()) + " t values");
    return w;
}

std::string samples_csv(const std::vector<Real>& t, const std::vector<Real>& g)
{
    std::ostringstream os;
    os << "t,g,log_t,log_g\n";
    for (std::size_t i = 0; i < t.size() && i < g.size(); ++i) {
        os << format_real(t[i], 17) << "," << format_real(g[i], 17) << "," << format_real(std::log(t[i]), 17) << ","
           << (g[i] > 0 ? format_real(std::log(g[i]), 17) : std::string("-inf")) << "\n";
    }
    return os.str();
}

}  // namespace strat
