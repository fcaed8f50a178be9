#include "strat/stratification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace strat {

int Stratification::add(Stratum s)
{
    if (s.ambient_dim() != n_) throw Error("stratum '" + s.name + "' lives in the wrong ambient space");
    if (index_of(s.name) >= 0) throw Error("duplicate stratum name '" + s.name + "'");
    strata_.push_back(std::move(s));
    return static_cast<int>(strata_.size()) - 1;
}

void Stratification::add_frontier(int lower, int upper)
{
    const int n = static_cast<int>(strata_.size());
    if (lower < 0 || upper < 0 || lower >= n || upper >= n) throw Error("frontier pair refers to a missing stratum");
    FrontierPair p{lower, upper};
    if (std::find(frontier_.begin(), frontier_.end(), p) == frontier_.end()) frontier_.push_back(p);
}

int Stratification::index_of(const std::string& name) const
{
    for (std::size_t i = 0; i < strata_.size(); ++i)
        if (strata_[i].name == name) return static_cast<int>(i);
    return -1;
}

const Stratum& Stratification::by_name(const std::string& name) const
{
    int i = index_of(name);
    if (i < 0) throw Error("no stratum named '" + name + "'");
    return at(i);
}

int Stratification::top_dim() const
{
    int d = 0;
    for (const auto& s : strata_) d = std::max(d, s.dim());
    return d;
}

std::vector<int> Stratification::below(int upper) const
{
    std::vector<char> seen(strata_.size(), 0);
    std::vector<int> stack{upper}, out;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (const auto& p : frontier_) {
            if (p.upper != u || seen[static_cast<std::size_t>(p.lower)]) continue;
            seen[static_cast<std::size_t>(p.lower)] = 1;
            out.push_back(p.lower);
            stack.push_back(p.lower);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool Stratification::is_partial_order() const
{
    for (const auto& p : frontier_)
        if (at(p.lower).dim() >= at(p.upper).dim()) return false;
    // Strictly decreasing dimension already rules out cycles.
    return true;
}

// --- validation ------------------------------------------------------------------

bool ValidationReport::pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.pass; });
}

const AxiomCheck& ValidationReport::get(const std::string& axiom) const
{
    for (const auto& c : checks)
        if (c.axiom == axiom) return c;
    throw Error("no axiom check named '" + axiom + "'");
}

std::string ValidationReport::str() const
{
    std::ostringstream os;
    for (const auto& c : checks) {
        os << c.axiom << ": " << (c.pass ? "pass" : "fail") << " (samples " << c.samples << ")";
        if (!c.witness.empty()) os << " witness " << c.witness;
        os << "\n";
    }
    return os.str();
}

std::vector<Vec> boundary_limits(const Stratum& s, const StratumPoint& from)
{
    if (!s.is_implicit()) {
        const auto& g = s.parametric();
        if (!from.u) return {};
        std::vector<Vec> out;
        for (int j = 0; j < g.dim(); ++j) {
            Real w = g.domain().hi(j) - g.domain().lo(j);
            for (Real face : {g.domain().lo(j) + 1e-13L * w, g.domain().hi(j) - 1e-13L * w}) {
                Vec u = *from.u;
                u(j) = face;
                try {
                    Vec x = g.map(u);
                    if (x.allFinite()) out.push_back(x);
                } catch (const DomainError&) {
                }
            }
        }
        return out;
    }
    const auto& g = s.implicit();
    if (g.inequalities().empty()) return {};
    Vec x = from.x;
    try {
        for (int it = 0; it < 400; ++it) {
            Real v = g.min_inequality(x);
            if (!(v > 0)) return {};
            Subspace t;
            try {
                t = tangent_at(s, x);
            } catch (const RankDrop&) {
                return {x};  // reached a singular point of the equations
            }
            Vec pg = t.project(g.min_inequality_gradient(x));
            Real pn = pg.squaredNorm();
            if (pn == 0) return {};
            Vec step = -(v / pn) * pg;
            Real factor = 0.9L;
            std::optional<Vec> next;
            for (int h = 0; h < 40 && !next; ++h, factor /= 2) {
                auto cand = newton_project(g, x + factor * step, step.norm() + 1e-300L);
                if (!cand) continue;
                Real cv;
                try {
                    cv = g.min_inequality(*cand);
                } catch (const DomainError&) {
                    continue;
                }
                if (cv > 0) next = cand;
            }
            if (!next) return {x};
            Real moved = (*next - x).norm();
            x = *next;
            if (moved <= 1e-11L * (1 + x.norm())) return {x};
        }
    } catch (const Error&) {
        return {};
    }
    return {x};
}

bool within(const Stratum& s, const Vec& b, Real tol, const std::vector<StratumPoint>* hints)
{
    try {
        if (auto c = s.as_point()) return (*c - b).norm() <= tol;
        if (s.is_implicit()) {
            const auto& g = s.implicit();
            auto p = newton_project(g, b, tol);
            if (!p || (*p - b).norm() > tol) return false;
            // Within tol of the inequality boundary is a limit point, not a member.
            if (!(g.min_inequality(*p) > tol)) return false;
            tangent_at(s, *p);
            return true;
        }
        const auto& g = s.parametric();
        std::vector<StratumPoint> starts;
        if (hints && !hints->empty()) {
            std::vector<std::pair<Real, std::size_t>> order;
            for (std::size_t i = 0; i < hints->size(); ++i) order.emplace_back(((*hints)[i].x - b).norm(), i);
            std::sort(order.begin(), order.end());
            for (std::size_t i = 0; i < order.size() && i < 3; ++i) starts.push_back((*hints)[order[i].second]);
        } else {
            Vec u = closest_parameter(g, b);
            starts.push_back({g.map(u), u});
        }
        for (const auto& st : starts) {
            auto q = nearest_point(s, b, st);
            if (!q || !q->u || (q->x - b).norm() > tol) continue;
            // A preimage pressed against a face is a limit point, not a member.
            bool interior = true;
            for (int j = 0; j < g.dim(); ++j) {
                Real w = g.domain().hi(j) - g.domain().lo(j);
                if ((*q->u)(j) - g.domain().lo(j) < 1e-6L * w || g.domain().hi(j) - (*q->u)(j) < 1e-6L * w)
                    interior = false;
            }
            if (interior) return true;
        }
        return false;
    } catch (const Error&) {
        return false;
    }
}

ValidationReport validate(const Stratification& s, int samples_per_stratum, std::uint64_t seed)
{
    ValidationReport report;
    const auto& strata = s.strata();
    const Box& box = s.box();

    std::vector<std::vector<StratumPoint>> samples;
    AxiomCheck regular{"regularity", true, 0, ""};
    for (std::size_t i = 0; i < strata.size(); ++i) {
        Rng rng(derive_seed(seed, 1, i));
        samples.push_back(sample_stratum(strata[i], box, samples_per_stratum, rng));
        const auto& pts = samples.back();
        regular.samples += static_cast<int>(pts.size());
        if (pts.empty() && regular.pass) {
            regular.pass = false;
            regular.witness = "no regular sample of '" + strata[i].name + "' in the box";
        }
        for (const auto& p : pts) {
            bool ok = true;
            try {
                ok = tangent_at(strata[i], p).dim() == strata[i].dim();
                if (ok && strata[i].is_implicit()) ok = membership(strata[i], p.x);
            } catch (const Error&) {
                ok = false;
            }
            if (!ok && regular.pass) {
                regular.pass = false;
                regular.witness = "'" + strata[i].name + "' at " + format_point(p.x);
            }
        }
    }
    report.checks.push_back(regular);

    AxiomCheck disjoint{"disjoint", true, 0, ""};
    for (std::size_t i = 0; i < strata.size(); ++i) {
        for (const auto& p : samples[i]) {
            ++disjoint.samples;
            for (std::size_t j = 0; j < strata.size() && disjoint.pass; ++j) {
                if (j == i) continue;
                if (within(strata[j], p.x, 1e-9L, &samples[j])) {
                    disjoint.pass = false;
                    disjoint.witness = "'" + strata[i].name + "' meets '" + strata[j].name + "' at " + format_point(p.x);
                }
            }
        }
    }
    report.checks.push_back(disjoint);

    AxiomCheck frontier{"frontier", true, 0, ""};
    const Real margin = 1e-3L * box.diameter();
    for (std::size_t i = 0; i < strata.size(); ++i) {
        auto lower = s.below(static_cast<int>(i));
        for (const auto& p : samples[i]) {
            for (const Vec& b : boundary_limits(strata[i], p)) {
                if (!box.contains(b, margin)) continue;
                ++frontier.samples;
                bool covered = std::any_of(lower.begin(), lower.end(), [&](int j) {
                    return within(strata[static_cast<std::size_t>(j)], b, 1e-6L, &samples[static_cast<std::size_t>(j)]);
                });
                if (!covered && frontier.pass) {
                    frontier.pass = false;
                    frontier.witness = "boundary of '" + strata[i].name + "' at " + format_point(b);
                }
            }
        }
    }
    report.checks.push_back(frontier);

    AxiomCheck order{"order", s.is_partial_order(), static_cast<int>(s.frontier().size()), ""};
    if (!order.pass) {
        for (const auto& p : s.frontier())
            if (s.at(p.lower).dim() >= s.at(p.upper).dim()) {
                order.witness = "'" + s.at(p.lower).name + "' < '" + s.at(p.upper).name + "'";
                break;
            }
    }
    report.checks.push_back(order);
    return report;
}

}  // namespace strat
