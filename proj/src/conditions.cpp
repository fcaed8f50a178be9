#include "strat/conditions.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace strat {

std::string to_string(Condition c)
{
    switch (c) {
    case Condition::W: return "w";
    case Condition::A: return "a";
    case Condition::B: return "b";
    case Condition::AF: return "af";
    case Condition::WF: return "wf";
    }
    return "?";
}

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::Holds: return "Holds";
    case Verdict::Fails: return "Fails";
    case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

Condition parse_condition(const std::string& s)
{
    for (Condition c : {Condition::W, Condition::A, Condition::B, Condition::AF, Condition::WF})
        if (to_string(c) == s) return c;
    throw Error("unknown condition '" + s + "' (expected w, a, b, af or wf)");
}

std::string ConditionReport::str() const
{
    std::ostringstream os;
    os << "condition: " << to_string(condition) << "\n";
    os << "pair: " << lower << " < " << upper << "\n";
    os << "base: " << format_point(base) << "\n";
    os << "verdict: " << to_string(verdict) << "\n";
    os << "C: " << format_real(c) << "\n";
    os << "slope: " << format_real(slope) << "\n";
    os << "grid: " << format_real(grid.t0) << " " << format_real(grid.q) << " " << grid.m << "\n";
    os << "wings: " << traces.size() << " of " << wings_requested << " (failed " << wings_failed << ")\n";
    if (!diagnostic.empty()) os << "diagnostic: " << diagnostic << "\n";
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& w = traces[i];
        os << "wing " << i << ": " << w.label << " " << to_string(w.limit.cls) << " slope " << format_real(w.limit.slope)
           << " bound " << format_real(w.limit.bound) << " residual " << format_real(w.limit.residual) << " points "
           << w.t.size() << (w.witness ? " witness" : "") << "\n";
    }
    return os.str();
}

int ConditionReport::witness() const
{
    for (std::size_t i = 0; i < traces.size(); ++i)
        if (traces[i].witness) return static_cast<int>(i);
    return -1;
}

PairContext pair_context(const Scene& scene, const std::string& lower, const std::string& upper)
{
    PairContext ctx;
    ctx.strat = &scene.strat;
    ctx.lower = scene.strat.index_of(lower);
    ctx.upper = scene.strat.index_of(upper);
    if (ctx.lower < 0) throw Error("no stratum named '" + lower + "'");
    if (ctx.upper < 0) throw Error("no stratum named '" + upper + "'");
    ctx.f = scene.f ? &*scene.f : nullptr;
    ctx.explicit_wings = &scene.wings;
    ctx.grid = scene.grid.value_or(Grid{});
    return ctx;
}

namespace {

StratumPoint base_point(const Stratum& s, const Vec& y0)
{
    if (auto c = s.as_point()) {
        if ((*c - y0).norm() > 1e-9L) throw Error("base point " + format_point(y0) + " is not '" + s.name + "'");
        return {*c, std::nullopt};
    }
    auto p = nearest_point(s, y0, StratumPoint{y0, std::nullopt});
    if (!p || (p->x - y0).norm() > 1e-6L * (1 + y0.norm()))
        throw Error("base point " + format_point(y0) + " is not on '" + s.name + "'");
    return *p;
}

/// Largest t0 that keeps wings away from other strata in the closure.
Real clearance(const Stratification& st, int lower, int upper, const StratumPoint& y0)
{
    Real best = std::numeric_limits<Real>::infinity();
    const int dl = st.at(lower).dim();
    for (int j : st.below(upper)) {
        if (j == lower || st.at(j).dim() > dl) continue;
        const Stratum& s = st.at(j);
        Real d;
        if (auto c = s.as_point()) {
            d = (*c - y0.x).norm();
        } else {
            auto p = nearest_point(s, y0.x, StratumPoint{y0.x, std::nullopt});
            if (!p) continue;
            d = (p->x - y0.x).norm();
        }
        if (d > 0) best = std::min(best, d);
    }
    return best;
}

bool vanishing(const WingTrace& w, Real zero_level)
{
    return std::all_of(w.g.begin(), w.g.end(), [&](Real v) { return v < zero_level; });
}

}  // namespace

ConditionReport check_condition(Condition cond, const PairContext& ctx, const Vec& y0, const ConditionParams& params)
{
    if (!ctx.strat) throw Error("empty pair context");
    const Stratification& st = *ctx.strat;
    const Stratum& lower = st.at(ctx.lower);
    const Stratum& upper = st.at(ctx.upper);
    const bool uses_f = cond == Condition::AF || cond == Condition::WF;
    if (uses_f && !ctx.f) throw Error("condition " + to_string(cond) + " needs a function on the scene");
    auto below = st.below(ctx.upper);
    if (std::find(below.begin(), below.end(), ctx.lower) == below.end())
        throw Error("'" + lower.name + "' is not declared in the frontier of '" + upper.name + "'");

    ConditionReport r;
    r.condition = cond;
    r.lower = lower.name;
    r.upper = upper.name;
    r.base = y0;
    r.grid = params.grid.value_or(ctx.grid);

    StratumPoint base = base_point(lower, y0);
    r.base = base.x;
    Real room = params.clearance * clearance(st, ctx.lower, ctx.upper, base);
    if (r.grid.t0 > room) {
        r.grid.t0 = room;
        r.diagnostic = "t0 reduced to " + format_real(room) + " near another stratum";
    }
    const auto t = r.grid.values();

    std::vector<WingSample> wings;
    std::vector<std::string> notes;
    if (ctx.explicit_wings) {
        for (const auto& ew : *ctx.explicit_wings) {
            if (ew.lower != lower.name || ew.upper != upper.name) continue;
            if (ew.base && (*ew.base - base.x).norm() > 1e-9L * (1 + base.x.norm())) continue;
            ++r.wings_requested;
            try {
                wings.push_back(explicit_wing(lower, upper, base, ew, t));
            } catch (const Error& e) {
                ++r.wings_failed;
                notes.push_back(e.what());
            }
        }
    }
    for (int k = 0; k < params.wings; ++k) {
        ++r.wings_requested;
        try {
            wings.push_back(sample_wing(lower, upper, base, t, derive_seed(params.seed, 0x77, static_cast<std::uint64_t>(k)),
                                        "random " + std::to_string(k)));
        } catch (const Error& e) {
            ++r.wings_failed;
            if (notes.empty()) notes.push_back(e.what());
        }
    }

    auto lower_tangent = [&](const StratumPoint& y) {
        return uses_f ? level_tangent_at(lower, *ctx.f, y) : tangent_at(lower, y);
    };
    auto upper_tangent = [&](const StratumPoint& x) {
        return uses_f ? level_tangent_at(upper, *ctx.f, x) : tangent_at(upper, x);
    };
    std::optional<Subspace> base_tangent;
    if (cond == Condition::A || cond == Condition::AF || cond == Condition::B) {
        base_tangent = cond == Condition::B ? tangent_at(lower, base) : lower_tangent(base);
    }

    LimitOptions lo;
    lo.slope_tol = params.slope_tol;
    bool any_bad = false, all_good = !wings.empty();
    r.slope = std::numeric_limits<Real>::infinity();
    for (auto& ws : wings) {
        WingTrace tr;
        tr.label = ws.label;
        for (const auto& p : ws.points) {
            Real dist = (p.x.x - p.y.x).norm();
            try {
                Real g = 0;
                switch (cond) {
                case Condition::W:
                case Condition::WF:
                    if (!(dist > 0)) continue;
                    g = delta(lower_tangent(p.y), upper_tangent(p.x)) / dist;
                    break;
                case Condition::A:
                case Condition::AF:
                    g = delta(*base_tangent, upper_tangent(p.x));
                    break;
                case Condition::B: {
                    if (!(dist > 0)) continue;
                    Subspace tx = tangent_at(upper, p.x);
                    Subspace secant = orthonormalize({secant_direction(p.x.x, p.y.x)}, st.ambient_dim());
                    g = std::max(delta(secant, tx), delta(tangent_at(lower, p.y), tx));
                    break;
                }
                }
                if (!std::isfinite(g)) continue;
                tr.t.push_back(p.t);
                tr.g.push_back(g);
                tr.x.push_back(p.x.x);
                tr.y.push_back(p.y.x);
            } catch (const Error&) {
            }
        }
        try {
            tr.limit = classify_limit(tr.t, tr.g, lo);
        } catch (const Error& e) {
            all_good = false;
            if (notes.empty()) notes.push_back(std::string("wing ") + tr.label + ": " + e.what());
            r.traces.push_back(std::move(tr));
            continue;
        }
        bool good, bad;
        if (cond == Condition::W || cond == Condition::WF) {
            good = tr.limit.cls == LimitClass::Bounded || tr.limit.cls == LimitClass::ConvergesToZero;
            bad = tr.limit.cls == LimitClass::Diverges;
        } else {
            good = tr.limit.cls == LimitClass::ConvergesToZero || vanishing(tr, params.zero_level);
            bad = !good && (tr.limit.cls == LimitClass::Diverges ||
                            (tr.limit.cls == LimitClass::Bounded && tr.limit.bound >= params.b_gap));
        }
        tr.witness = bad;
        any_bad = any_bad || bad;
        all_good = all_good && good;
        r.c = std::max(r.c, tr.limit.bound);
        r.slope = std::min(r.slope, tr.limit.slope);
        r.traces.push_back(std::move(tr));
    }
    if (r.traces.empty()) r.slope = 0;
    r.verdict = any_bad ? Verdict::Fails : all_good ? Verdict::Holds : Verdict::Inconclusive;
    if (r.verdict != Verdict::Holds && !notes.empty()) {
        if (!r.diagnostic.empty()) r.diagnostic += "; ";
        r.diagnostic += notes.front();
    }
    return r;
}

Real ScanResult::failing_fraction() const
{
    return base_points.empty() ? 0 : static_cast<Real>(failing.size()) / static_cast<Real>(base_points.size());
}

ScanResult scan_bad_locus(Condition c, const PairContext& ctx, int base_grid, const ConditionParams& params,
                          unsigned threads, const std::vector<Vec>* points)
{
    ScanResult out;
    if (points) {
        out.base_points = *points;
    } else {
        const Stratum& lower = ctx.strat->at(ctx.lower);
        Rng rng(derive_seed(params.seed, 0x5ca4));
        for (const auto& p : sample_stratum(lower, ctx.strat->box(), base_grid, rng)) out.base_points.push_back(p.x);
    }
    const std::size_t n = out.base_points.size();
    out.reports.resize(n);
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < n;) {
            ConditionParams p = params;
            p.seed = derive_seed(params.seed, 0xba5e, i);
            try {
                out.reports[i] = check_condition(c, ctx, out.base_points[i], p);
            } catch (const Error& e) {
                out.reports[i].condition = c;
                out.reports[i].base = out.base_points[i];
                out.reports[i].diagnostic = e.what();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    for (std::size_t i = 0; i < n; ++i) {
        if (out.reports[i].verdict == Verdict::Fails) out.failing.push_back(static_cast<int>(i));
        if (out.reports[i].verdict == Verdict::Inconclusive) ++out.inconclusive;
    }
    return out;
}

}  // namespace strat
