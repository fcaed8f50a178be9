// stratcheck: command-line front end for the condition checkers, the
// refinement engine and the built-in gallery.

#include "CLI11.hpp"

#include "strat/output.hpp"

#include <filesystem>
#include <iostream>

using namespace strat;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::uint64_t seed = 1;
    std::string grid;
    int wings = 8;
    int base_grid = 20;
    std::vector<std::string> tol;
    std::string out;
    unsigned threads = 0;
};

void add_common(CLI::App* app, Options& o, const std::string& default_out)
{
    o.out = default_out;
    app->add_option("--seed", o.seed, "master seed")->capture_default_str();
    app->add_option("--grid", o.grid, "wing grid t0,q,m");
    app->add_option("--wings", o.wings, "random wings per base point")->capture_default_str();
    app->add_option("--base-grid", o.base_grid, "base points per stratum")->capture_default_str();
    app->add_option("--tol", o.tol, "tolerance override name=value (slope_tol, b_gap, zero_level, clearance, cluster_radius)");
    app->add_option("--out", o.out, "output directory")->capture_default_str();
    app->add_option("--threads", o.threads, "worker threads (0: all cores)");
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

Real number(const std::string& s)
{
    return to_real(parse_rational(s));
}

Vec point(const std::string& s)
{
    auto parts = split(s, ',');
    Vec v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(parts[i]);
    return v;
}

StratifyParams make_params(const Options& o)
{
    StratifyParams sp;
    ConditionParams& p = sp.condition;
    p.seed = o.seed;
    p.wings = o.wings;
    if (!o.grid.empty()) {
        auto g = split(o.grid, ',');
        if (g.size() != 3) throw Error("--grid expects t0,q,m");
        Grid grid{number(g[0]), number(g[1]), std::stoi(g[2])};
        if (!(grid.t0 > 0) || !(grid.q > 0 && grid.q < 1) || grid.m < 8) throw Error("--grid needs t0 > 0, 0 < q < 1, m >= 8");
        p.grid = grid;
    }
    for (const auto& kv : o.tol) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error("--tol expects name=value, got '" + kv + "'");
        const std::string name = kv.substr(0, eq);
        const Real v = number(kv.substr(eq + 1));
        if (name == "slope_tol") p.slope_tol = v;
        else if (name == "b_gap") p.b_gap = v;
        else if (name == "zero_level") p.zero_level = v;
        else if (name == "clearance") p.clearance = v;
        else if (name == "cluster_radius") sp.cluster_radius = v;
        else throw Error("unknown tolerance '" + name + "'");
    }
    sp.base_grid = o.base_grid;
    sp.threads = o.threads;
    return sp;
}

/// A scene file, or a gallery entry name with an optional ":index".
Scene resolve_scene(const std::string& spec)
{
    if (fs::exists(spec)) return load_scene(spec);
    std::string name = spec;
    std::size_t idx = 0;
    if (auto colon = spec.rfind(':'); colon != std::string::npos) {
        name = spec.substr(0, colon);
        idx = static_cast<std::size_t>(std::stoul(spec.substr(colon + 1)));
    }
    for (const auto& e : gallery())
        if (e.name == name) {
            if (idx >= e.scenes.size()) throw Error("gallery entry '" + name + "' has " + std::to_string(e.scenes.size()) + " scenes");
            return e.scenes[idx];
        }
    throw Error("'" + spec + "' is neither a scene file nor a gallery entry");
}

std::vector<Condition> conditions(const std::string& list)
{
    std::vector<Condition> out;
    for (const auto& c : split(list, ',')) out.push_back(parse_condition(c));
    return out;
}

Box box_from(const std::string& s, int n)
{
    auto parts = split(s, ',');
    if (parts.size() != 2) throw Error("--box expects lo,hi");
    Box b{Vec::Constant(n, number(parts[0])), Vec::Constant(n, number(parts[1]))};
    if (!(b.lo(0) < b.hi(0))) throw Error("--box needs lo < hi");
    return b;
}

std::string file_stem(std::string s)
{
    for (char& c : s)
        if (c == '/' || c == ' ' || c == '<' || c == '>') c = '_';
    return s;
}

int exit_code(Verdict v)
{
    return v == Verdict::Holds ? 0 : v == Verdict::Fails ? 2 : 3;
}

int exit_code(CertificateStatus s)
{
    return s == CertificateStatus::Certified ? 0 : s == CertificateStatus::Refuted ? 2 : 3;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Numerical checks of stratification regularity conditions"};
    app.require_subcommand(1);

    Options check_opt, strat_opt, gal_opt, val_opt;

    auto* check = app.add_subcommand("check", "run one condition checker at one base point");
    std::string scene_spec, cond_name, lower, upper, base;
    check->add_option("scene", scene_spec, "scene file or gallery entry[:index]")->required();
    check->add_option("condition", cond_name, "w, a, b, af or wf")->required();
    check->add_option("lower", lower, "lower stratum")->required();
    check->add_option("upper", upper, "upper stratum")->required();
    check->add_option("--base", base, "base point x1,x2,... (default: the point stratum or the first declared base point)");
    add_common(check, check_opt, "stratcheck-out");

    auto* stratify = app.add_subcommand("stratify", "refine a stratification and certify it");
    std::string strat_scene, poly, box = "-1,1", cond_list = "w,b";
    int max_rounds = 5, vars = 0;
    bool rank = false;
    stratify->add_option("scene", strat_scene, "scene file or gallery entry[:index]");
    stratify->add_option("--poly", poly, "build the initial decomposition of V(p) instead of loading a scene");
    stratify->add_option("--vars", vars, "number of variables of --poly (default: 3 when z occurs, else 2)");
    stratify->add_option("--box", box, "box lo,hi for --poly")->capture_default_str();
    stratify->add_option("--conditions", cond_list, "comma separated conditions")->capture_default_str();
    stratify->add_option("--max-rounds", max_rounds, "refinement rounds")->capture_default_str();
    stratify->add_flag("--rank", rank, "split off critical points of f first");
    add_common(stratify, strat_opt, "stratcheck-out");

    auto* gal = app.add_subcommand("gallery", "run the built-in examples against their expected verdicts");
    std::string filter;
    gal->add_option("--filter", filter, "only entries whose name contains this text");
    add_common(gal, gal_opt, "gallery-out");

    auto* val = app.add_subcommand("validate", "sampled check of the stratification axioms");
    std::string val_scene;
    int samples = 200;
    val->add_option("scene", val_scene, "scene file or gallery entry[:index]")->required();
    val->add_option("--samples", samples, "samples per stratum")->capture_default_str();
    add_common(val, val_opt, "stratcheck-out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*check) {
            StratifyParams sp = make_params(check_opt);
            Scene scene = resolve_scene(scene_spec);
            PairContext ctx = pair_context(scene, lower, upper);
            Vec y0;
            if (!base.empty()) {
                y0 = point(base);
            } else if (auto c = scene.strat.at(ctx.lower).as_point()) {
                y0 = *c;
            } else if (auto it = scene.base_points.find(lower); it != scene.base_points.end() && !it->second.empty()) {
                y0 = it->second.front();
            } else {
                throw Error("'" + lower + "' is not a point stratum; give --base");
            }
            if (y0.size() != scene.ambient_dim()) throw Error("base point has the wrong dimension");
            ConditionReport r = check_condition(parse_condition(cond_name), ctx, y0, sp.condition);
            write_report(r, check_opt.out, "report");
            std::cout << r.str();
            return exit_code(r.verdict);
        }

        if (*stratify) {
            StratifyParams sp = make_params(strat_opt);
            sp.max_rounds = max_rounds;
            auto conds = conditions(cond_list);
            std::optional<Scene> scene;
            if (!poly.empty()) {
                int n = vars;
                if (n == 0) n = poly.find('z') != std::string::npos ? 3 : 2;
                Polynomial p = Polynomial::parse(poly, n);
                DecompositionOptions dopt;
                dopt.seed = strat_opt.seed;
                scene = initial_scene(p, box_from(box, n), dopt);
            } else if (!strat_scene.empty()) {
                scene = resolve_scene(strat_scene);
            } else {
                throw Error("stratify needs a scene or --poly");
            }
            if (rank) {
                if (!scene->f) throw Error("--rank needs a function on the scene");
                *scene = with_stratification(*scene, rank_partition(scene->strat, *scene->f));
            }
            RefinementState r = refine(*scene, conds, sp);
            Certificate cert = certify(r.scene, conds, sp.base_grid, sp.condition, sp.threads);
            const fs::path out = strat_opt.out;
            fs::create_directories(out);
            save_scene(r.scene, (out / "stratification.json").string());
            write_text(out / "refine.txt", refinement_text(r));
            write_text(out / "certificate.csv", cert.csv());
            write_text(out / "summary.txt", cert.summary());
            int k = 0;
            for (const auto& rep : cert.reports)
                if (rep.verdict == Verdict::Fails && k < 10)
                    write_report(rep, out / "witnesses", "witness" + std::to_string(k++));
            std::cout << refinement_text(r) << cert.summary();
            return exit_code(cert.status);
        }

        if (*gal) {
            StratifyParams sp = make_params(gal_opt);
            auto outcomes = run_gallery(filter, sp.condition, gal_opt.threads);
            if (outcomes.empty()) throw Error("no gallery entry matches '" + filter + "'");
            const fs::path out = gal_opt.out;
            for (const auto& e : outcomes)
                for (std::size_t i = 0; i < e.checks.size(); ++i) {
                    const auto& r = e.checks[i].report;
                    write_report(r, out / file_stem(e.name), "check" + std::to_string(i) + "-" + to_string(r.condition));
                }
            std::string table = gallery_table(outcomes);
            write_text(out / "summary.txt", table);
            std::cout << table;
            bool all = std::all_of(outcomes.begin(), outcomes.end(), [](const EntryOutcome& e) { return e.pass(); });
            return all ? 0 : 2;
        }

        if (*val) {
            Scene scene = resolve_scene(val_scene);
            ValidationReport v = validate(scene.strat, samples, val_opt.seed);
            std::cout << v.str();
            return v.pass() ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
