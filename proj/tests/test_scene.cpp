#include "doctest.h"

#include "strat/gallery.hpp"

#include <filesystem>
#include <string>

using namespace strat;

namespace {

Vec vec(std::initializer_list<Real> xs)
{
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (Real x : xs) v(i++) = x;
    return v;
}

std::string with_body(const std::string& strata_and_more)
{
    return R"J({"ambient_dim": 2, "box": {"lo": ["-1", "-1"], "hi": ["1", "1"]}, )J" + strata_and_more + "}";
}

const char* kRay = R"J({
  "name": "ray",
  "ambient_dim": 2,
  "box": {"lo": ["-1", "-1"], "hi": ["1", "1"]},
  "strata": [
    {"name": "origin", "kind": "point", "point": ["0", "0"]},
    {"name": "ray", "kind": "implicit", "dim": 1, "equations": ["y"], "inequalities": ["x"]}
  ],
  "frontier": [["origin", "ray"]],
  "function": {"expression": "x + y^2", "ranks": {"ray": 1}},
  "grid": {"t0": "1/20", "q": "1/2", "m": 16},
  "wings": [
    {"lower": "origin", "upper": "ray", "kind": "point", "map": ["t", "0"], "t": ["1/10", "1/100"], "label": "along",
     "base": ["0", "0"]}
  ],
  "base_points": {"ray": [["1/2", "0"], ["0.25", "0"]]}
})J";

}  // namespace

TEST_CASE("scene fields are read")
{
    Scene s = scene_from_json(kRay);
    CHECK(s.name == "ray");
    CHECK(s.ambient_dim() == 2);
    CHECK(s.strat.size() == 2);
    CHECK(*s.strat.by_name("origin").as_point() == vec({0, 0}));
    REQUIRE(s.f);
    CHECK(s.f->value(vec({2, 3})) == doctest::Approx(11.0));
    CHECK(s.f->declared_rank("ray") == 1);
    CHECK_FALSE(s.f->declared_rank("origin"));
    REQUIRE(s.grid);
    CHECK(s.grid->t0 == 0.05L);
    CHECK(s.grid->q == 0.5L);
    CHECK(s.grid->m == 16);
    REQUIRE(s.wings.size() == 1);
    CHECK(s.wings[0].t_values == std::vector<Real>{0.1L, 0.01L});
    CHECK(s.wings[0].label == "along");
    REQUIRE(s.wings[0].base);
    CHECK(*s.wings[0].base == vec({0, 0}));
    CHECK(s.base_points.at("ray").size() == 2);
    CHECK(s.base_points.at("ray")[1] == vec({0.25L, 0}));
}

TEST_CASE("scene round trips are lossless")
{
    Scene s = scene_from_json(kRay);
    std::string text = scene_to_json(s);
    CHECK(scene_to_json(scene_from_json(text)) == text);
    for (const auto& e : gallery())
        for (const auto& sc : e.scenes) {
            CAPTURE(e.name);
            std::string t = scene_to_json(sc);
            Scene back = scene_from_json(t);
            CHECK(scene_to_json(back) == t);
            CHECK(back.strat.frontier() == sc.strat.frontier());
            CHECK(back.wings.size() == sc.wings.size());
        }
    // Values that are not short decimals survive exactly.
    Stratification st(1, Box{vec({-1}), vec({1})});
    st.add(Stratum::point("third", vec({1.0L / 3})));
    Scene third(st);
    Scene back = scene_from_json(scene_to_json(third));
    CHECK(*back.strat.by_name("third").as_point() == vec({1.0L / 3}));
}

TEST_CASE("scene files on disk")
{
    auto path = std::filesystem::temp_directory_path() / "strat_scene_test.json";
    Scene s = scene_from_json(kRay);
    save_scene(s, path.string());
    Scene back = load_scene(path.string());
    CHECK(scene_to_json(back) == scene_to_json(s));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_scene(path.string()), Error);
    CHECK_THROWS_AS(save_scene(s, "/nonexistent-dir/x/scene.json"), Error);
}

TEST_CASE("malformed scenes are rejected")
{
    CHECK_THROWS_AS(scene_from_json("{"), Error);
    CHECK_THROWS_AS(scene_from_json("{}"), Error);
    CHECK_THROWS_AS(scene_from_json(R"J({"ambient_dim": 0, "box": {"lo": [], "hi": []}})J"), Error);
    CHECK_THROWS_AS(scene_from_json(R"J({"ambient_dim": 2, "box": {"lo": ["0"], "hi": ["1"]}})J"), Error);
    CHECK_THROWS_AS(scene_from_json(R"J({"ambient_dim": 1, "box": {"lo": ["1"], "hi": ["0"]}})J"), Error);
    CHECK_THROWS_AS(scene_from_json(with_body(R"J("strata": [{"name": "a", "kind": "blob"}])J")), Error);
    CHECK_THROWS_AS(scene_from_json(with_body(R"J("strata": [{"name": "a", "kind": "point", "point": ["0", "0"]}],
                                                 "frontier": [["a", "b"]])J")),
                    Error);
    CHECK_THROWS_AS(scene_from_json(with_body(R"J("strata": [{"name": "a", "kind": "implicit", "dim": 1,
                                                 "equations": ["y + sin(x)"]}])J")),
                    Error);
    CHECK_THROWS_AS(scene_from_json(with_body(R"J("strata": [], "base_points": {"a": [["0", "0"]]})J")), Error);
    CHECK_THROWS_AS(scene_from_json(with_body(R"J("strata": [{"name": "a", "kind": "point", "point": ["0", "0"]}],
                                                 "base_points": {"a": [["0"]]})J")),
                    Error);
    CHECK_THROWS_AS(scene_from_json(with_body(R"J("strata": [{"name": "a", "kind": "point", "point": ["0", "0"]},
                                                 {"name": "b", "kind": "implicit", "dim": 1, "equations": ["y"]}],
                                                 "wings": [{"lower": "a", "upper": "b", "map": ["t"]}])J")),
                    Error);
    CHECK_THROWS_AS(scene_from_json(with_body(R"J("strata": [{"name": "a", "kind": "point", "point": ["0", "0"]},
                                                 {"name": "b", "kind": "implicit", "dim": 1, "equations": ["y"]}],
                                                 "wings": [{"lower": "a", "upper": "b", "kind": "param", "map": ["t"]}])J")),
                    Error);
    CHECK_THROWS_AS(scene_from_json(with_body(R"J("strata": [{"name": "a", "kind": "point", "point": ["0", "0"]},
                                                 {"name": "b", "kind": "implicit", "dim": 1, "equations": ["y"]}],
                                                 "wings": [{"lower": "a", "upper": "b", "map": ["t", "0"], "base": ["0"]}])J")),
                    Error);
    CHECK_THROWS_AS(scene_from_json(with_body(R"J("strata": [], "function": {"expression": "x + w"})J")), Error);
    CHECK_THROWS_AS(scene_from_json(with_body(R"J("strata": [], "function": {"expression": "x", "ranks": {"a": 2}})J")), Error);
}

TEST_CASE("grid values")
{
    Grid g;
    auto t = g.values();
    REQUIRE(t.size() == 24);
    CHECK(t[0] == 0.1L);
    CHECK(t[1] == doctest::Approx(0.06));
    CHECK(t[23] / t[22] == doctest::Approx(0.6));
    CHECK_THROWS_AS((Grid{0, 0.5L, 10}.values()), Error);
    CHECK_THROWS_AS((Grid{0.1L, 1, 10}.values()), Error);
}

TEST_CASE("cayley rotations are exactly orthogonal")
{
    for (auto [n, skew] : {std::pair{2, std::vector<Rational>{Rational(1, 3)}},
                           {3, std::vector<Rational>{Rational(1, 3), Rational(-1, 5), Rational(2, 7)}}}) {
        auto q = cayley_rotation(n, skew);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Rational dot = 0;
                for (int k = 0; k < n; ++k) dot += q[k][i] * q[k][j];
                CHECK(dot == Rational(i == j ? 1 : 0));
            }
    }
    CHECK_THROWS_AS(cayley_rotation(3, {Rational(1)}), Error);
}

TEST_CASE("rigid motions and scaling move every part of a scene")
{
    Scene s = scene_from_json(kRay);
    auto q = cayley_rotation(2, {Rational(1, 2)});
    std::vector<Rational> b{Rational(1, 4), Rational(-1, 8)};
    Scene m = transform_scene(s, q, b, Rational(2));
    auto image = [&](const Vec& x) {
        Vec y(2);
        for (int i = 0; i < 2; ++i) y(i) = 2 * (to_real(q[i][0]) * x(0) + to_real(q[i][1]) * x(1)) + to_real(b[i]);
        return y;
    };
    CHECK((*m.strat.by_name("origin").as_point() - image(vec({0, 0}))).norm() < 1e-15L);
    CHECK(membership(m.strat.by_name("ray"), image(vec({0.5L, 0}))));
    CHECK_FALSE(membership(m.strat.by_name("ray"), image(vec({-0.5L, 0}))));
    REQUIRE(m.grid);
    CHECK(m.grid->t0 == doctest::Approx(0.1));
    CHECK(m.grid->m == 16);
    REQUIRE(m.wings.size() == 1);
    REQUIRE(m.wings[0].base);
    CHECK((*m.wings[0].base - image(vec({0, 0}))).norm() < 1e-15L);
    CHECK(m.wings[0].t_values[0] == doctest::Approx(0.2));
    CHECK((m.base_points.at("ray")[0] - image(vec({0.5L, 0}))).norm() < 1e-15L);
    REQUIRE(m.f);
    CHECK(m.f->value(image(vec({0.3L, 0.2L}))) == doctest::Approx(s.f->value(vec({0.3L, 0.2L}))));
    CHECK(validate(m.strat, 100).pass());
    // A scene without a grid gets the scaled default grid.
    Scene plain = gallery_entry("xy-cross").scenes[0];
    Scene scaled = transform_scene(plain, cayley_rotation(2, {Rational(0)}), {0, 0}, Rational(1, 10));
    REQUIRE(scaled.grid);
    CHECK(scaled.grid->t0 == doctest::Approx(0.01));
    CHECK_THROWS_AS(transform_scene(s, q, b, Rational(-1)), Error);
    CHECK_THROWS_AS(transform_scene(s, q, {Rational(0)}, Rational(1)), Error);
}

TEST_CASE("replacing the stratification keeps what still applies")
{
    Scene s = scene_from_json(kRay);
    Stratification only_ray(2, s.strat.box());
    only_ray.add(s.strat.by_name("ray"));
    Scene t = with_stratification(s, only_ray);
    CHECK(t.wings.empty());
    CHECK(t.base_points.count("ray") == 1);
    CHECK(t.f.has_value());
    CHECK(t.grid == s.grid);
    CHECK(t.name == s.name);
}
