#include "strat/gallery.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace strat {

namespace {

Vec pt(std::initializer_list<Real> xs)
{
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (Real x : xs) v(i++) = x;
    return v;
}

Expectation expect(int scene, Condition c, std::string lower, std::string upper, Vec base, std::optional<Verdict> v,
                   std::string source)
{
    Expectation e;
    e.scene = scene;
    e.condition = c;
    e.lower = std::move(lower);
    e.upper = std::move(upper);
    e.base = std::move(base);
    e.verdict = v;
    e.source = std::move(source);
    return e;
}

const char* kKurdyka = R"J({
  "name": "kurdyka",
  "ambient_dim": 2,
  "box": {"lo": ["1/4", "-1"], "hi": ["3", "1"]},
  "strata": [
    {"name": "axis", "kind": "implicit", "dim": 1, "equations": ["y"], "inequalities": []},
    {"name": "upper", "kind": "implicit", "dim": 2, "equations": [], "inequalities": ["y"]}
  ],
  "frontier": [["axis", "upper"]],
  "function": {"expression": "y^x", "ranks": {"axis": 0}},
  "wings": [
    {"lower": "axis", "upper": "upper", "kind": "point", "map": ["x", "exp(-1/(t*x))"],
     "t": [], "label": "level curve"}
  ]
})J";

const char* kOscillation = R"J({
  "name": "x-sin-1/x",
  "ambient_dim": 2,
  "box": {"lo": ["-1", "-1"], "hi": ["1", "1"]},
  "strata": [
    {"name": "origin", "kind": "point", "point": ["0", "0"]},
    {"name": "curve", "kind": "parametric", "domain": {"lo": ["0"], "hi": ["3/2"]}, "maps": ["u", "u*sin(1/u)"]}
  ],
  "frontier": [["origin", "curve"]],
  "wings": [
    {"lower": "origin", "upper": "curve", "kind": "param", "map": ["t"], "t": [], "label": "zeros of sin(1/x)"}
  ]
})J";

const char* kSpiral = R"J({
  "name": "spiral",
  "ambient_dim": 2,
  "box": {"lo": ["-1", "-1"], "hi": ["1", "1"]},
  "strata": [
    {"name": "origin", "kind": "point", "point": ["0", "0"]},
    {"name": "curve", "kind": "parametric", "domain": {"lo": ["0"], "hi": ["2"]}, "maps": ["u*cos(u)", "u*sin(u)"]}
  ],
  "frontier": [["origin", "curve"]]
})J";

const char* kCross = R"J({
  "name": "xy-cross",
  "ambient_dim": 2,
  "box": {"lo": ["-1", "-1"], "hi": ["1", "1"]},
  "polynomial": "x*y",
  "strata": [
    {"name": "origin", "kind": "point", "point": ["0", "0"]},
    {"name": "ray+x", "kind": "implicit", "dim": 1, "equations": ["x*y"], "inequalities": ["x"]},
    {"name": "ray-x", "kind": "implicit", "dim": 1, "equations": ["x*y"], "inequalities": ["-x"]},
    {"name": "ray+y", "kind": "implicit", "dim": 1, "equations": ["x*y"], "inequalities": ["y"]},
    {"name": "ray-y", "kind": "implicit", "dim": 1, "equations": ["x*y"], "inequalities": ["-y"]}
  ],
  "frontier": [["origin", "ray+x"], ["origin", "ray-x"], ["origin", "ray+y"], ["origin", "ray-y"]]
})J";

const char* kCusp = R"J({
  "name": "cusp",
  "ambient_dim": 2,
  "box": {"lo": ["-1", "-1"], "hi": ["1", "1"]},
  "polynomial": "y^2 - x^3",
  "strata": [
    {"name": "origin", "kind": "point", "point": ["0", "0"]},
    {"name": "branch+", "kind": "implicit", "dim": 1, "equations": ["y^2 - x^3"], "inequalities": ["y"]},
    {"name": "branch-", "kind": "implicit", "dim": 1, "equations": ["y^2 - x^3"], "inequalities": ["-y"]}
  ],
  "frontier": [["origin", "branch+"], ["origin", "branch-"]]
})J";

const char* kUmbrellaCoarse = R"J({
  "name": "umbrella-coarse",
  "ambient_dim": 3,
  "box": {"lo": ["-1", "-1", "-1"], "hi": ["1", "1", "1"]},
  "polynomial": "x^2 - z*y^2",
  "strata": [
    {"name": "axis", "kind": "implicit", "dim": 1, "equations": ["x", "y"], "inequalities": []},
    {"name": "sheet+", "kind": "implicit", "dim": 2, "equations": ["x^2 - z*y^2"], "inequalities": ["y"]},
    {"name": "sheet-", "kind": "implicit", "dim": 2, "equations": ["x^2 - z*y^2"], "inequalities": ["-y"]}
  ],
  "frontier": [["axis", "sheet+"], ["axis", "sheet-"]],
  "wings": [
    {"lower": "axis", "upper": "sheet+", "kind": "point", "map": ["t^2", "t", "t^2"], "t": [],
     "label": "x = s^2, y = s, z = s^2", "base": ["0", "0", "0"]}
  ]
})J";

const char* kUmbrellaRefined = R"J({
  "name": "umbrella-refined",
  "ambient_dim": 3,
  "box": {"lo": ["-1", "-1", "-1"], "hi": ["1", "1", "1"]},
  "polynomial": "x^2 - z*y^2",
  "strata": [
    {"name": "origin", "kind": "point", "point": ["0", "0", "0"]},
    {"name": "axis+", "kind": "implicit", "dim": 1, "equations": ["x", "y"], "inequalities": ["z"]},
    {"name": "handle", "kind": "implicit", "dim": 1, "equations": ["x", "y"], "inequalities": ["-z"]},
    {"name": "sheet+", "kind": "implicit", "dim": 2, "equations": ["x^2 - z*y^2"], "inequalities": ["y"]},
    {"name": "sheet-", "kind": "implicit", "dim": 2, "equations": ["x^2 - z*y^2"], "inequalities": ["-y"]}
  ],
  "frontier": [["origin", "axis+"], ["origin", "handle"], ["origin", "sheet+"], ["origin", "sheet-"],
               ["axis+", "sheet+"], ["axis+", "sheet-"]]
})J";

const char* kExpGraph = R"J({
  "name": "exp-graph",
  "ambient_dim": 2,
  "box": {"lo": ["-1", "-1"], "hi": ["1", "1"]},
  "strata": [
    {"name": "origin", "kind": "point", "point": ["0", "0"]},
    {"name": "graph", "kind": "parametric", "domain": {"lo": ["0"], "hi": ["2"]}, "maps": ["u", "exp(-1/u)"]}
  ],
  "frontier": [["origin", "graph"]]
})J";

const char* kConstant = R"J({
  "name": "constant-f",
  "ambient_dim": 2,
  "box": {"lo": ["-1", "-1"], "hi": ["1", "1"]},
  "strata": [
    {"name": "axis", "kind": "implicit", "dim": 1, "equations": ["y"], "inequalities": []},
    {"name": "upper", "kind": "implicit", "dim": 2, "equations": [], "inequalities": ["y"]}
  ],
  "frontier": [["axis", "upper"]],
  "function": {"expression": "1", "ranks": {}}
})J";

std::vector<GalleryEntry> build()
{
    std::vector<GalleryEntry> g;
    const auto H = Verdict::Holds, F = Verdict::Fails;
    using C = Condition;

    {
        GalleryEntry e;
        e.name = "kurdyka";
        e.description = "f = y^x over the half-plane; level curves y = exp(-1/(t x)) break (wf) everywhere on the axis";
        Scene s = scene_from_json(kKurdyka);
        // Level curves reach y ~ exp(-4000) at the smallest t, still a normal long double.
        for (int i = 0; i < 10; ++i) s.wings[0].t_values.push_back(0.1L * std::pow(0.6L, static_cast<Real>(i)));
        e.scenes.push_back(std::move(s));
        for (Real x0 : {0.5L, 1.0L, 2.0L}) {
            auto x = expect(0, C::WF, "axis", "upper", pt({x0, 0}), F, "classical");
            x.slope = -1;
            e.checks.push_back(x);
        }
        e.checks.push_back(expect(0, C::AF, "axis", "upper", pt({1, 0}), H, "analytic"));
        e.checks.push_back(expect(0, C::W, "axis", "upper", pt({1, 0}), H, "direct"));
        e.polynomially_bounded = false;
        g.push_back(std::move(e));
    }
    {
        GalleryEntry e;
        e.name = "x-sin-1/x";
        e.description = "graph of x sin(1/x): (w) holds at the origin while (b) fails";
        Scene s = scene_from_json(kOscillation);
        // u = 1/(k pi) with k growing geometrically; sin(1/u) vanishes there.
        long prev = 0;
        for (int i = 0; i < 24; ++i) {
            long k = std::lround(3 * std::pow(1.6L, static_cast<Real>(i)));
            if (k == prev) continue;
            prev = k;
            s.wings[0].t_values.push_back(1 / (static_cast<Real>(k) * 3.14159265358979323846264338327950288L));
        }
        e.scenes.push_back(std::move(s));
        auto b = expect(0, C::B, "origin", "curve", pt({0, 0}), F, "classical");
        b.min_c = 0.9L;
        e.checks.push_back(b);
        e.checks.push_back(expect(0, C::W, "origin", "curve", pt({0, 0}), H, "direct"));
        e.definable = false;
        g.push_back(std::move(e));
    }
    {
        GalleryEntry e;
        e.name = "spiral";
        e.description = "curve (r cos r, r sin r); no expected verdict";
        e.scenes.push_back(scene_from_json(kSpiral));
        e.checks.push_back(expect(0, C::W, "origin", "curve", pt({0, 0}), std::nullopt, "open question"));
        e.checks.push_back(expect(0, C::B, "origin", "curve", pt({0, 0}), std::nullopt, "open question"));
        e.open_question = true;
        g.push_back(std::move(e));
    }
    {
        GalleryEntry e;
        e.name = "xy-cross";
        e.description = "V(xy) split into the origin and four open rays";
        e.scenes.push_back(scene_from_json(kCross));
        for (C c : {C::W, C::A, C::B}) e.checks.push_back(expect(0, c, "origin", "ray+x", pt({0, 0}), H, "direct"));
        g.push_back(std::move(e));
    }
    {
        GalleryEntry e;
        e.name = "cusp";
        e.description = "V(y^2 - x^3): origin and two branches";
        e.scenes.push_back(scene_from_json(kCusp));
        e.checks.push_back(expect(0, C::A, "origin", "branch+", pt({0, 0}), H, "direct"));
        e.checks.push_back(expect(0, C::W, "origin", "branch+", pt({0, 0}), H, "direct"));
        e.checks.push_back(expect(0, C::B, "origin", "branch+", pt({0, 0}), H, "analytic"));
        g.push_back(std::move(e));
    }
    {
        GalleryEntry e;
        e.name = "whitney-umbrella";
        e.description = "V(x^2 - z y^2): the whole z-axis as one stratum fails (b) at 0; splitting off the origin repairs it";
        e.scenes.push_back(scene_from_json(kUmbrellaCoarse));
        e.scenes.push_back(scene_from_json(kUmbrellaRefined));
        e.checks.push_back(expect(0, C::B, "axis", "sheet+", pt({0, 0, 0}), F, "analytic"));
        e.checks.push_back(expect(0, C::A, "axis", "sheet+", pt({0, 0, 0.5L}), H, "analytic"));
        e.checks.push_back(expect(1, C::B, "axis+", "sheet+", pt({0, 0, 0.5L}), H, "analytic"));
        e.checks.push_back(expect(1, C::W, "axis+", "sheet+", pt({0, 0, 0.5L}), H, "analytic"));
        e.checks.push_back(expect(1, C::B, "origin", "sheet+", pt({0, 0, 0}), H, "analytic"));
        g.push_back(std::move(e));
    }
    {
        GalleryEntry e;
        e.name = "exp-graph";
        e.description = "graph of exp(-1/x), flat at the origin";
        e.scenes.push_back(scene_from_json(kExpGraph));
        e.checks.push_back(expect(0, C::W, "origin", "graph", pt({0, 0}), H, "direct"));
        e.checks.push_back(expect(0, C::B, "origin", "graph", pt({0, 0}), H, "analytic"));
        g.push_back(std::move(e));
    }
    {
        GalleryEntry e;
        e.name = "constant-f";
        e.description = "f = 1 on the half-plane: (wf) reduces to (w)";
        e.scenes.push_back(scene_from_json(kConstant));
        e.checks.push_back(expect(0, C::WF, "axis", "upper", pt({0.3L, 0}), H, "direct"));
        e.checks.push_back(expect(0, C::W, "axis", "upper", pt({0.3L, 0}), H, "direct"));
        g.push_back(std::move(e));
    }
    return g;
}

}  // namespace

const std::vector<GalleryEntry>& gallery()
{
    static const std::vector<GalleryEntry> entries = build();
    return entries;
}

const GalleryEntry& gallery_entry(const std::string& name)
{
    for (const auto& e : gallery())
        if (e.name == name) return e;
    throw Error("no gallery entry named '" + name + "'");
}

bool EntryOutcome::pass() const
{
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

EntryOutcome run_entry(const GalleryEntry& e, const ConditionParams& params)
{
    EntryOutcome out;
    out.name = e.name;
    for (std::size_t i = 0; i < e.checks.size(); ++i) {
        const auto& x = e.checks[i];
        const Scene& s = e.scenes.at(static_cast<std::size_t>(x.scene));
        ConditionParams p = params;
        p.seed = derive_seed(params.seed, i);
        CheckOutcome o;
        o.expectation = &x;
        try {
            o.report = check_condition(x.condition, pair_context(s, x.lower, x.upper), x.base, p);
        } catch (const Error& err) {
            o.report.condition = x.condition;
            o.report.lower = x.lower;
            o.report.upper = x.upper;
            o.report.base = x.base;
            o.report.diagnostic = err.what();
        }
        if (!x.verdict) {
            o.note = "no expectation (open question)";
        } else if (o.report.verdict != *x.verdict) {
            o.pass = false;
            o.note = "expected " + to_string(*x.verdict);
        } else if (x.slope && !(std::fabs(o.report.slope - *x.slope) <= x.slope_tol)) {
            o.pass = false;
            o.note = "slope " + format_real(o.report.slope) + " outside " + format_real(*x.slope) + " +- " +
                     format_real(x.slope_tol);
        } else if (x.min_c && !(o.report.c >= *x.min_c)) {
            o.pass = false;
            o.note = "C " + format_real(o.report.c) + " below " + format_real(*x.min_c);
        }
        out.checks.push_back(std::move(o));
    }
    return out;
}

std::vector<EntryOutcome> run_gallery(const std::string& filter, const ConditionParams& params, unsigned threads)
{
    std::vector<std::size_t> picked;
    const auto& all = gallery();
    for (std::size_t k = 0; k < all.size(); ++k)
        if (filter.empty() || all[k].name.find(filter) != std::string::npos) picked.push_back(k);
    std::vector<EntryOutcome> out(picked.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < picked.size();) {
            ConditionParams p = params;
            p.seed = derive_seed(params.seed, 0x6a11, picked[i]);
            out[i] = run_entry(all[picked[i]], p);
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(picked.size(), 1)));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace strat
