#include "strat/scene.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace strat {

using json = nlohmann::ordered_json;

std::vector<Real> Grid::values() const
{
    if (!(t0 > 0) || !(q > 0 && q < 1) || m < 1) throw Error("grid needs t0 > 0, 0 < q < 1 and m >= 1");
    std::vector<Real> t(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) t[static_cast<std::size_t>(i)] = t0 * std::pow(q, static_cast<Real>(i));
    return t;
}

namespace {

Real read_real(const json& j)
{
    if (j.is_string()) return to_real(parse_rational(j.get<std::string>()));
    if (j.is_number()) return static_cast<Real>(j.get<double>());
    throw Error("expected a number, got " + j.dump());
}

Vec read_vec(const json& j)
{
    if (!j.is_array()) throw Error("expected an array of numbers, got " + j.dump());
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = read_real(j[i]);
    return v;
}

json write_vec(const Vec& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(shortest_text(v(i)));
    return a;
}

Box read_box(const json& j)
{
    Box b{read_vec(j.at("lo")), read_vec(j.at("hi"))};
    if (b.lo.size() != b.hi.size()) throw Error("box corners differ in dimension");
    for (int i = 0; i < b.dim(); ++i)
        if (!(b.lo(i) < b.hi(i))) throw Error("box is empty along axis " + std::to_string(i + 1));
    return b;
}

json write_box(const Box& b) { return json{{"lo", write_vec(b.lo)}, {"hi", write_vec(b.hi)}}; }

std::vector<Expression> read_exprs(const json& j, const Symbols& sym)
{
    std::vector<Expression> out;
    for (const auto& e : j) out.push_back(parse_expression(e.get<std::string>(), sym));
    return out;
}

json write_exprs(const std::vector<Expression>& es, const Symbols& sym)
{
    json a = json::array();
    for (const auto& e : es) a.push_back(e.str(sym.display));
    return a;
}

Stratum read_stratum(const json& j, int n)
{
    std::string name = j.at("name").get<std::string>();
    std::string kind = j.value("kind", std::string("implicit"));
    Symbols sym = Symbols::standard(n);
    Stratum s = [&]() -> Stratum {
        if (kind == "implicit") {
            std::vector<Polynomial> eqs;
            for (const auto& e : j.value("equations", json::array()))
                eqs.push_back(Polynomial::from_expression(parse_expression(e.get<std::string>(), sym), n));
            auto ineqs = read_exprs(j.value("inequalities", json::array()), sym);
            return {name, ImplicitStratum(n, std::move(eqs), std::move(ineqs), j.at("dim").get<int>())};
        }
        if (kind == "parametric") {
            Box domain = read_box(j.at("domain"));
            auto maps = read_exprs(j.at("maps"), Symbols::parameters(domain.dim()));
            return {name, ParametricStratum(n, std::move(domain), std::move(maps))};
        }
        if (kind == "point") return Stratum::point(name, read_vec(j.at("point")));
        throw Error("unknown stratum kind '" + kind + "'");
    }();
    s.declared_connected = j.value("connected", true);
    return s;
}

json write_stratum(const Stratum& s)
{
    json j;
    j["name"] = s.name;
    Symbols sym = Symbols::standard(s.ambient_dim());
    if (s.is_implicit()) {
        const auto& g = s.implicit();
        j["kind"] = "implicit";
        j["dim"] = g.dim();
        json eqs = json::array();
        for (const auto& p : g.equations()) eqs.push_back(p.str(sym.display));
        j["equations"] = eqs;
        j["inequalities"] = write_exprs(g.inequalities(), sym);
    } else {
        const auto& g = s.parametric();
        j["kind"] = "parametric";
        j["domain"] = write_box(g.domain());
        j["maps"] = write_exprs(g.maps(), Symbols::parameters(g.dim()));
    }
    j["connected"] = s.declared_connected;
    return j;
}

}  // namespace

Scene scene_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("scene is not valid JSON: ") + e.what());
    }
    try {
        const int n = j.at("ambient_dim").get<int>();
        if (n < 1) throw Error("ambient_dim must be positive");
        Box box = read_box(j.at("box"));
        if (box.dim() != n) throw Error("box dimension differs from ambient_dim");
        Stratification strat(n, box);
        for (const auto& s : j.value("strata", json::array())) strat.add(read_stratum(s, n));
        for (const auto& p : j.value("frontier", json::array())) {
            int lo = strat.index_of(p.at(0).get<std::string>());
            int up = strat.index_of(p.at(1).get<std::string>());
            if (lo < 0 || up < 0) throw Error("frontier pair names a missing stratum: " + p.dump());
            strat.add_frontier(lo, up);
        }
        Scene scene(std::move(strat));
        scene.name = j.value("name", std::string());
        if (j.contains("polynomial"))
            scene.polynomial = Polynomial::parse(j["polynomial"].get<std::string>(), n);
        if (j.contains("function")) {
            const auto& f = j["function"];
            std::map<std::string, int> ranks;
            const json rj = f.value("ranks", json::object());
            for (const auto& [k, v] : rj.items()) ranks[k] = v.get<int>();
            scene.f.emplace(parse_expression(f.at("expression").get<std::string>(), Symbols::standard(n)), n, ranks);
        }
        if (j.contains("grid")) {
            const auto& g = j["grid"];
            scene.grid = Grid{read_real(g.at("t0")), read_real(g.at("q")), g.at("m").get<int>()};
        }
        for (const auto& w : j.value("wings", json::array())) {
            ExplicitWing ew;
            ew.lower = w.at("lower").get<std::string>();
            ew.upper = w.at("upper").get<std::string>();
            if (scene.strat.index_of(ew.lower) < 0 || scene.strat.index_of(ew.upper) < 0)
                throw Error("wing names a missing stratum");
            std::string kind = w.value("kind", std::string("point"));
            if (kind == "point") ew.kind = ExplicitWing::Kind::Point;
            else if (kind == "param") ew.kind = ExplicitWing::Kind::Param;
            else throw Error("unknown wing kind '" + kind + "'");
            ew.map = read_exprs(w.at("map"), Symbols::wing(n));
            for (const auto& t : w.value("t", json::array())) ew.t_values.push_back(read_real(t));
            ew.label = w.value("label", std::string());
            if (w.contains("base")) {
                ew.base = read_vec(w["base"]);
                if (ew.base->size() != n) throw Error("wing base point of the wrong dimension");
            }
            const auto& up = scene.strat.by_name(ew.upper);
            std::size_t want = ew.kind == ExplicitWing::Kind::Point ? static_cast<std::size_t>(n)
                                                                     : static_cast<std::size_t>(up.dim());
            if (ew.map.size() != want) throw Error("wing map has the wrong number of components");
            if (ew.kind == ExplicitWing::Kind::Param && up.is_implicit())
                throw Error("parameter wings need a parametric upper stratum");
            scene.wings.push_back(std::move(ew));
        }
        const json bj = j.value("base_points", json::object());
        for (const auto& [k, pts] : bj.items()) {
            if (scene.strat.index_of(k) < 0) throw Error("base points for missing stratum '" + k + "'");
            for (const auto& p : pts) {
                Vec v = read_vec(p);
                if (v.size() != n) throw Error("base point of the wrong dimension");
                scene.base_points[k].push_back(v);
            }
        }
        return scene;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed scene: ") + e.what());
    }
}

std::string scene_to_json(const Scene& scene)
{
    const int n = scene.ambient_dim();
    json j;
    j["name"] = scene.name;
    j["ambient_dim"] = n;
    j["box"] = write_box(scene.strat.box());
    if (scene.polynomial) j["polynomial"] = scene.polynomial->str(Symbols::standard(n).display);
    json strata = json::array();
    for (const auto& s : scene.strat.strata()) strata.push_back(write_stratum(s));
    j["strata"] = strata;
    json frontier = json::array();
    for (const auto& p : scene.strat.frontier())
        frontier.push_back(json::array({scene.strat.at(p.lower).name, scene.strat.at(p.upper).name}));
    j["frontier"] = frontier;
    if (scene.f) {
        json f;
        f["expression"] = scene.f->expression().str(Symbols::standard(n).display);
        json ranks = json::object();
        for (const auto& [k, v] : scene.f->declared_ranks()) ranks[k] = v;
        f["ranks"] = ranks;
        j["function"] = f;
    }
    if (scene.grid) {
        j["grid"] = json{{"t0", shortest_text(scene.grid->t0)}, {"q", shortest_text(scene.grid->q)}, {"m", scene.grid->m}};
    }
    json wings = json::array();
    for (const auto& w : scene.wings) {
        json jw;
        jw["lower"] = w.lower;
        jw["upper"] = w.upper;
        jw["kind"] = w.kind == ExplicitWing::Kind::Point ? "point" : "param";
        jw["map"] = write_exprs(w.map, Symbols::wing(n));
        json t = json::array();
        for (Real v : w.t_values) t.push_back(shortest_text(v));
        jw["t"] = t;
        jw["label"] = w.label;
        if (w.base) jw["base"] = write_vec(*w.base);
        wings.push_back(jw);
    }
    j["wings"] = wings;
    json base = json::object();
    for (const auto& [k, pts] : scene.base_points) {
        json a = json::array();
        for (const auto& p : pts) a.push_back(write_vec(p));
        base[k] = a;
    }
    j["base_points"] = base;
    return j.dump(2) + "\n";
}

Scene load_scene(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot read scene file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return scene_from_json(ss.str());
}

void save_scene(const Scene& scene, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write scene file '" + path + "'");
    out << scene_to_json(scene);
}

Scene with_stratification(const Scene& scene, Stratification s)
{
    Scene out(std::move(s));
    out.name = scene.name;
    out.f = scene.f;
    out.grid = scene.grid;
    out.polynomial = scene.polynomial;
    for (const auto& w : scene.wings)
        if (out.strat.index_of(w.lower) >= 0 && out.strat.index_of(w.upper) >= 0) out.wings.push_back(w);
    for (const auto& [k, pts] : scene.base_points)
        if (out.strat.index_of(k) >= 0) out.base_points[k] = pts;
    return out;
}

// --- rigid motions -------------------------------------------------------------------

namespace {

using RMat = std::vector<std::vector<Rational>>;

RMat rational_inverse(RMat a)
{
    const std::size_t n = a.size();
    RMat inv(n, std::vector<Rational>(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && a[piv][c] == 0) ++piv;
        if (piv == n) throw Error("singular matrix");
        std::swap(a[piv], a[c]);
        std::swap(inv[piv], inv[c]);
        Rational d = a[c][c];
        for (std::size_t k = 0; k < n; ++k) {
            a[c][k] /= d;
            inv[c][k] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || a[r][c] == 0) continue;
            Rational f = a[r][c];
            for (std::size_t k = 0; k < n; ++k) {
                a[r][k] -= f * a[c][k];
                inv[r][k] -= f * inv[c][k];
            }
        }
    }
    return inv;
}

Expression rconst(const Rational& q) { return Expression::constant(q); }

}  // namespace

std::vector<std::vector<Rational>> cayley_rotation(int n, const std::vector<Rational>& skew)
{
    if (n < 1 || skew.size() != static_cast<std::size_t>(n * (n - 1) / 2))
        throw Error("cayley_rotation needs n(n-1)/2 skew entries");
    RMat a(static_cast<std::size_t>(n), std::vector<Rational>(static_cast<std::size_t>(n), Rational(0)));
    std::size_t k = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Rational v = skew[k];
            ++k;
            a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
            a[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = -v;
        }
    RMat minus = a, plus = a;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a.size(); ++j) {
            minus[i][j] = (i == j ? Rational(1) : Rational(0)) - a[i][j];
            plus[i][j] = (i == j ? Rational(1) : Rational(0)) + a[i][j];
        }
    }
    RMat inv = rational_inverse(plus);
    RMat q(a.size(), std::vector<Rational>(a.size(), Rational(0)));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j)
            for (std::size_t l = 0; l < a.size(); ++l) q[i][j] += minus[i][l] * inv[l][j];
    return q;
}

Scene transform_scene(const Scene& scene, const std::vector<std::vector<Rational>>& q, const std::vector<Rational>& b,
                      const Rational& lambda)
{
    const int n = scene.ambient_dim();
    const auto un = static_cast<std::size_t>(n);
    if (q.size() != un || b.size() != un || lambda <= 0) throw Error("transform does not match the scene dimension");

    // Old coordinates as functions of new ones: x_old = Q^T (x_new - b) / lambda.
    std::vector<Polynomial> old_poly;
    std::vector<Expression> old_expr;
    for (std::size_t i = 0; i < un; ++i) {
        Polynomial p(n);
        for (std::size_t j = 0; j < un; ++j)
            p = p + Polynomial::constant(n, Rational(q[j][i] / lambda)) *
                        (Polynomial::variable(n, static_cast<int>(j)) - Polynomial::constant(n, b[j]));
        old_expr.push_back(p.to_expression());
        old_poly.push_back(std::move(p));
    }
    auto forward = [&](const std::vector<Expression>& x) {
        std::vector<Expression> out;
        for (std::size_t i = 0; i < un; ++i) {
            Expression e = rconst(b[i]);
            for (std::size_t j = 0; j < un; ++j) e = e + rconst(Rational(lambda * q[i][j])) * x[j];
            out.push_back(e);
        }
        return out;
    };
    auto forward_point = [&](const Vec& x) {
        Vec y(n);
        for (std::size_t i = 0; i < un; ++i) {
            Real v = to_real(b[i]);
            for (std::size_t j = 0; j < un; ++j) v += to_real(Rational(lambda * q[i][j])) * x(static_cast<Eigen::Index>(j));
            y(static_cast<Eigen::Index>(i)) = v;
        }
        return y;
    };

    // Bounding box of the transformed corners.
    const Box& box = scene.strat.box();
    Vec lo = Vec::Constant(n, std::numeric_limits<Real>::infinity());
    Vec hi = -lo;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        Vec c(n);
        for (int i = 0; i < n; ++i) c(i) = (mask >> i) & 1 ? box.hi(i) : box.lo(i);
        Vec y = forward_point(c);
        lo = lo.cwiseMin(y);
        hi = hi.cwiseMax(y);
    }

    Stratification strat(n, Box{lo, hi});
    for (const auto& s : scene.strat.strata()) {
        Stratum t = [&]() -> Stratum {
            if (s.is_implicit()) {
                const auto& g = s.implicit();
                std::vector<Polynomial> eqs;
                for (const auto& p : g.equations()) eqs.push_back(p.compose(old_poly));
                std::vector<Expression> ineqs;
                for (const auto& e : g.inequalities()) ineqs.push_back(substitute(e, old_expr));
                return {s.name, ImplicitStratum(n, std::move(eqs), std::move(ineqs), g.dim())};
            }
            const auto& g = s.parametric();
            return {s.name, ParametricStratum(n, g.domain(), forward(g.maps()))};
        }();
        t.declared_connected = s.declared_connected;
        strat.add(std::move(t));
    }
    strat.set_frontier(scene.strat.frontier());

    Scene out(std::move(strat));
    out.name = scene.name;
    out.polynomial = scene.polynomial ? std::optional<Polynomial>(scene.polynomial->compose(old_poly)) : std::nullopt;
    if (scene.f) out.f.emplace(substitute(scene.f->expression(), old_expr), n, scene.f->declared_ranks());
    // The default grid is made explicit so that it scales with the scene.
    Grid g = scene.grid.value_or(Grid{});
    g.t0 *= to_real(lambda);
    out.grid = g;
    // Wing maps: base coordinates and t are both pulled back.
    std::vector<Expression> wing_old = old_expr;
    wing_old.push_back(Expression::variable(n) / rconst(lambda));
    for (const auto& w : scene.wings) {
        ExplicitWing nw = w;
        std::vector<Expression> pulled;
        for (const auto& e : w.map) pulled.push_back(substitute(e, wing_old));
        nw.map = w.kind == ExplicitWing::Kind::Point ? forward(pulled) : pulled;
        for (auto& t : nw.t_values) t *= to_real(lambda);
        if (w.base) nw.base = forward_point(*w.base);
        out.wings.push_back(std::move(nw));
    }
    for (const auto& [k, pts] : scene.base_points)
        for (const auto& p : pts) out.base_points[k].push_back(forward_point(p));
    return out;
}

}  // namespace strat
