// Acceptance run: one PASS/FAIL line per criterion, with its runtime.

#include "strat/output.hpp"
#include "strat/subspace.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace strat;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

Vec v2(Real a, Real b)
{
    Vec v(2);
    v << a, b;
    return v;
}

Vec v3(Real a, Real b, Real c)
{
    Vec v(3);
    v << a, b, c;
    return v;
}

Subspace span(std::vector<Vec> vs)
{
    const int n = static_cast<int>(vs.front().size());
    return orthonormalize(vs, n);
}

const Scene& gallery_scene(const std::string& name, std::size_t i = 0)
{
    return gallery_entry(name).scenes.at(i);
}

std::string num(Real v)
{
    return format_real(v, 4);
}

Outcome delta_exactness()
{
    Rng rng(20240501);
    auto t = span({v2(1, 0)});
    Real worst = 0;
    for (int i = 0; i < 100; ++i) {
        Real th = rng.uniform(0, std::numbers::pi_v<Real> / 2);
        worst = std::max(worst, std::fabs(delta(t, span({v2(std::cos(th), std::sin(th))})) - std::sin(th)));
    }
    const auto plane = span({v3(1, 0, 0), v3(0, 1, 0)}), line = span({v3(1, 0, 0)});
    const Real plane_line = delta(plane, line), line_plane = delta(line, plane);
    bool ok = worst <= 1e-10L && plane_line == 1 && line_plane == 0;
    return {ok, "max error " + num(worst) + ", plane->line " + num(plane_line) + ", line->plane " + num(line_plane)};
}

Outcome kurdyka_ratio()
{
    // Level parameters 1e-1 down to 1e-3 in quarter decades.
    Scene s = gallery_scene("kurdyka");
    s.wings.at(0).t_values.clear();
    for (int k = 0; k <= 8; ++k) s.wings[0].t_values.push_back(std::pow(10.0L, -1 - k / 4.0L));
    const auto ctx = pair_context(s, "axis", "upper");
    Real worst = 0, worst_slope = 0;
    bool ok = true;
    for (Real x0 : {0.5L, 1.0L, 2.0L}) {
        auto r = check_wf(ctx, v2(x0, 0));
        const int w = r.witness();
        if (r.verdict != Verdict::Fails || w < 0) {
            ok = false;
            continue;
        }
        const auto& tr = r.traces[static_cast<std::size_t>(w)];
        if (tr.label != "level curve") ok = false;
        worst_slope = std::max(worst_slope, std::fabs(tr.limit.slope + 1));
        for (Real t : {1e-1L, 1e-2L, 1e-3L}) {
            auto it = std::find_if(tr.t.begin(), tr.t.end(), [&](Real u) { return std::fabs(u / t - 1) < 1e-12L; });
            if (it == tr.t.end()) {
                ok = false;
                continue;
            }
            Real g = tr.g[static_cast<std::size_t>(it - tr.t.begin())];
            worst = std::max(worst, std::fabs(g * t * x0 * x0 - 1));
        }
        for (std::size_t i = 0; i < tr.t.size(); ++i) worst = std::max(worst, std::fabs(tr.g[i] * tr.t[i] * x0 * x0 - 1));
    }
    ok = ok && worst <= 0.02L && worst_slope <= 0.05L;
    return {ok, "max relative error " + num(worst) + ", max |slope + 1| " + num(worst_slope)};
}

Outcome oscillation_b()
{
    auto r = check_b(pair_context(gallery_scene("x-sin-1/x"), "origin", "curve"), v2(0, 0));
    Real gap = 0;
    for (const auto& tr : r.traces)
        if (tr.label == "zeros of sin(1/x)" && tr.witness) gap = std::max(gap, tr.limit.bound);
    bool ok = r.verdict == Verdict::Fails && gap >= 0.9L;
    return {ok, "verdict " + to_string(r.verdict) + ", gap on sin(1/x_k) = 0 " + num(gap)};
}

std::vector<Vec> base_points(const Scene& s, int lower, int count, std::uint64_t seed)
{
    const Stratum& st = s.strat.at(lower);
    if (auto c = st.as_point()) return std::vector<Vec>(static_cast<std::size_t>(count), *c);
    Rng rng(seed);
    std::vector<Vec> out;
    for (const auto& p : sample_stratum(st, s.strat.box(), count, rng)) out.push_back(p.x);
    return out;
}

Outcome w_implies_b()
{
    ConditionParams params;
    int pairs = 0, instances = 0, violations = 0, fewer = 0;
    std::string excluded, first;
    for (const auto& e : gallery()) {
        if (!e.definable) {
            excluded += (excluded.empty() ? "" : ", ") + e.name;
            continue;
        }
        for (std::size_t si = 0; si < e.scenes.size(); ++si) {
            const Scene& s = e.scenes[si];
            for (const auto& fp : s.strat.frontier()) {
                const auto ctx = pair_context(s, s.strat.at(fp.lower).name, s.strat.at(fp.upper).name);
                auto pts = base_points(s, fp.lower, 20, derive_seed(params.seed, 0xacce, si, static_cast<std::uint64_t>(pairs)));
                if (pts.size() < 20) ++fewer;
                auto w = scan_bad_locus(Condition::W, ctx, 0, params, 0, &pts);
                auto b = scan_bad_locus(Condition::B, ctx, 0, params, 0, &pts);
                ++pairs;
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    ++instances;
                    if (w.reports[i].verdict == Verdict::Holds && b.reports[i].verdict == Verdict::Fails) {
                        ++violations;
                        if (first.empty())
                            first = e.name + " " + ctx.strat->at(ctx.lower).name + " < " + ctx.strat->at(ctx.upper).name + " at " +
                                    format_point(pts[i]);
                    }
                }
            }
        }
    }
    std::string detail = std::to_string(pairs) + " pairs, " + std::to_string(instances) + " base points, " +
                         std::to_string(violations) + " with w Holds and b Fails";
    if (!first.empty()) detail += " (first: " + first + ")";
    if (!excluded.empty()) detail += "; not definable, excluded: " + excluded;
    return {violations == 0 && fewer == 0 && pairs > 0, detail};
}

Outcome constant_function()
{
    ConditionParams params;
    int pairs = 0, compared = 0, mismatched = 0;
    Real worst = 0;
    for (const auto& e : gallery()) {
        for (const auto& base : e.scenes) {
            Scene s = base;
            const int n = s.ambient_dim();
            s.f.emplace(parse_expression("1", Symbols::standard(n)), n, std::map<std::string, int>{});
            for (const auto& fp : s.strat.frontier()) {
                const auto ctx = pair_context(s, s.strat.at(fp.lower).name, s.strat.at(fp.upper).name);
                auto pts = base_points(s, fp.lower, s.strat.at(fp.lower).as_point() ? 1 : 5,
                                       derive_seed(params.seed, 0xc0, static_cast<std::uint64_t>(pairs)));
                auto w = scan_bad_locus(Condition::W, ctx, 0, params, 0, &pts);
                auto wf = scan_bad_locus(Condition::WF, ctx, 0, params, 0, &pts);
                ++pairs;
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    ++compared;
                    const auto& a = w.reports[i];
                    const auto& b = wf.reports[i];
                    Real diff = a.c == b.c ? 0 : std::fabs(a.c - b.c);
                    if (std::isnan(diff)) diff = std::numeric_limits<Real>::infinity();
                    worst = std::max(worst, diff);
                    if (a.verdict != b.verdict || diff > 1e-10L) ++mismatched;
                }
            }
        }
    }
    return {mismatched == 0 && pairs > 0, std::to_string(pairs) + " pairs, " + std::to_string(compared) +
                                              " base points, " + std::to_string(mismatched) + " disagreements, max |dC| " +
                                              num(worst)};
}

Outcome calibration()
{
    auto t = Grid{}.values();
    int correct = 0;
    for (Real s : {-2.0L, -1.0L, -0.5L, 0.0L, 0.5L, 1.0L, 2.0L}) {
        for (Real a : {0.1L, 1.0L, 10.0L}) {
            std::vector<Real> g;
            for (Real u : t) g.push_back(a * std::pow(u, s));
            auto v = classify_limit(t, g);
            LimitClass want = s > 0 ? LimitClass::ConvergesToZero : s < 0 ? LimitClass::Diverges : LimitClass::Bounded;
            if (v.cls == want && std::fabs(v.slope - s) <= 0.05L) ++correct;
        }
    }
    return {correct == 21, std::to_string(correct) + " of 21 classified"};
}

Outcome refinement()
{
    StratifyParams params;
    auto u = refine(gallery_scene("whitney-umbrella", 0), {Condition::B}, params);
    const auto& s = u.scene.strat;
    int origin = -1;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (auto c = s.at(static_cast<int>(i)).as_point(); c && c->norm() == 0) origin = static_cast<int>(i);
    auto cert = certify(u.scene, {Condition::B}, params.base_grid, params.condition);
    auto k = refine(gallery_scene("kurdyka"), {Condition::WF}, params);
    const Real frac = k.failing_fraction("axis");
    bool ok = origin >= 0 && u.rounds <= 2 && cert.status == CertificateStatus::Certified &&
              k.status == RefineStatus::NonConvergence && frac == 1;
    return {ok, "umbrella: origin " + std::string(origin >= 0 ? "split off" : "missing") + " in " +
                    std::to_string(u.rounds) + " rounds, certificate " + to_string(cert.status) + "; kurdyka: " +
                    to_string(k.status) + ", failing fraction " + num(frac)};
}

Outcome axioms()
{
    std::vector<std::pair<std::string, Stratification>> produced;
    const std::vector<std::pair<const char*, int>> polys{
        {"x*y", 2}, {"y^2 - x^3", 2}, {"x^2 + y^2 - 1/4", 2}, {"x^2 - z*y^2", 3}, {"x^2 + y^2 - z^2", 3}};
    for (auto [p, n] : polys) {
        Scene s = initial_scene(Polynomial::parse(p, n), Box::cube(n, 1));
        produced.emplace_back(std::string(p), s.strat);
        produced.emplace_back(std::string(p) + " refined", refine(s, {Condition::W, Condition::B}).scene.strat);
    }
    produced.emplace_back("umbrella refined under b",
                          refine(gallery_scene("whitney-umbrella", 0), {Condition::B}).scene.strat);
    int failed = 0;
    std::string first;
    for (const auto& [name, st] : produced) {
        auto v = validate(st, 200);
        if (!v.get("regularity").pass || !v.get("disjoint").pass || !v.get("frontier").pass) {
            ++failed;
            if (first.empty()) first = name;
        }
    }
    const Stratification& cross = gallery_scene("xy-cross").strat;
    Stratification holed(cross.ambient_dim(), cross.box());
    for (const auto& st : cross.strata())
        if (st.name != "origin") holed.add(st);
    auto hv = validate(holed, 200);
    const auto& fr = hv.get("frontier");
    bool ok = failed == 0 && !fr.pass && !fr.witness.empty();
    std::string detail = std::to_string(produced.size() - static_cast<std::size_t>(failed)) + " of " +
                         std::to_string(produced.size()) + " engine outputs valid";
    if (!first.empty()) detail += " (first failure: " + first + ")";
    detail += "; cross without origin: frontier " + std::string(fr.pass ? "pass" : "fail, " + fr.witness);
    return {ok, detail};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string tree_text(const fs::path& root)
{
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::ostringstream os;
    for (const auto& f : files) os << fs::relative(f, root).string() << "\n" << slurp(f) << "\n";
    return os.str();
}

Outcome determinism()
{
    const fs::path dir = fs::temp_directory_path() / ("strat-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    std::string trees[2];
    int codes[2];
    for (int k = 0; k < 2; ++k) {
        const fs::path out = dir / ("run" + std::to_string(k));
        const std::string cmd = std::string(STRATCHECK) + " gallery --seed 7 --out " + out.string() + " > " +
                                (dir / ("stdout" + std::to_string(k))).string() + " 2>&1";
        fs::create_directories(dir);
        int status = std::system(cmd.c_str());
        codes[k] = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        trees[k] = tree_text(out) + "stdout\n" + slurp(dir / ("stdout" + std::to_string(k)));
    }
    fs::remove_all(dir);
    bool same = trees[0] == trees[1];
    return {same && codes[0] == 0 && codes[1] == 0,
            std::string(same ? "byte-identical" : "outputs differ") + ", exit codes " + std::to_string(codes[0]) + " " +
                std::to_string(codes[1]) + ", " + std::to_string(trees[0].size()) + " bytes"};
}

}  // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        double budget;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "delta exactness", 1, delta_exactness},
        {2, "Kurdyka ratio and wf failure", 5, kurdyka_ratio},
        {3, "b fails on x sin(1/x)", 2, oscillation_b},
        {4, "w implies b over the gallery", 30, w_implies_b},
        {5, "wf equals w for constant f", 0, constant_function},
        {6, "classify_limit calibration", 0, calibration},
        {7, "refinement engine", 60, refinement},
        {8, "stratification axioms", 0, axioms},
        {9, "gallery determinism", 0, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool in_time = c.budget == 0 || secs < c.budget;
        bool pass = o.pass && in_time;
        if (!pass) ++failed;
        char timing[64];
        if (c.budget > 0)
            std::snprintf(timing, sizeof timing, "%.2f s of %.0f s", secs, c.budget);
        else
            std::snprintf(timing, sizeof timing, "%.2f s", secs);
        std::cout << "criterion " << c.id << " " << (pass ? "PASS" : "FAIL") << " [" << timing << "] " << c.name << ": "
                  << o.detail << (in_time ? "" : " (over time budget)") << std::endl;
    }
    std::cout << (9 - failed) << " of 9 criteria pass" << std::endl;
    return failed == 0 ? 0 : 1;
}
