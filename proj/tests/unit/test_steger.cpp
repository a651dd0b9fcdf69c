#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spermmorph/error.hpp"
#include "spermmorph/steger.hpp"

using namespace spermmorph;

TEST_CASE("Hessian normal by hand") {
    auto a = try_hessian_normal(-2, 0, 0);
    REQUIRE(a);
    CHECK(a->normal.x == doctest::Approx(1.0));
    CHECK(a->normal.y == doctest::Approx(0.0));
    CHECK(a->eigenvalue == doctest::Approx(-2.0));

    auto b = try_hessian_normal(0, 0, -2);
    REQUIRE(b);
    CHECK(b->normal.x == doctest::Approx(0.0));
    CHECK(b->normal.y == doctest::Approx(1.0));
    CHECK(b->eigenvalue == doctest::Approx(-2.0));

    auto c = try_hessian_normal(-1, -1, -1);
    REQUIRE(c);
    CHECK(std::abs(c->normal.x) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(c->normal.y == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(c->eigenvalue == doctest::Approx(-2.0));

    CHECK(!try_hessian_normal(0, 0, 0));
}

TEST_CASE("hessian_normal errors") {
    const auto d = derivative_fields(ScalarImage(30, 30, 0.3), GaussianSpec(1.8));
    CHECK_THROWS_WITH_AS(hessian_normal(d, {15, 15}), "no ridge direction", Error);
    CHECK_THROWS_AS(hessian_normal(d, {1, 15}), InvalidArgument);
}

TEST_CASE("sub-pixel centre of a horizontal Gaussian line at y = 10.3") {
    const ScalarImage img = oracle::gaussian_line(40, 21, 0.0, {0.0, 10.3}, 2.0);
    const auto d = derivative_fields(img, GaussianSpec(1.8));
    for (int x = 8; x < 32; ++x) {
        auto cp = subpixel_center(d, {x, 10}, 0.001);
        REQUIRE(cp);
        CHECK(cp->position.y == doctest::Approx(10.3).epsilon(0.1 / 10.3));
        CHECK(std::abs(cp->position.y - 10.3) < 0.1);
        CHECK(!subpixel_center(d, {x, 13}, 0.001));
    }
}

TEST_CASE("constant image yields no centre points") {
    const auto d = derivative_fields(ScalarImage(30, 30, 0.5), GaussianSpec(1.8));
    for (int y = 6; y < 24; ++y)
        for (int x = 6; x < 24; ++x) CHECK(!subpixel_center(d, {x, y}, 0.0));
}

TEST_CASE("line centred on a pixel row has zero offset") {
    const auto d = derivative_fields(oracle::gaussian_line(40, 21, 0.0, {0.0, 10.0}, 2.0), GaussianSpec(1.8));
    auto cp = subpixel_center(d, {20, 10}, 0.001);
    REQUIRE(cp);
    CHECK(std::abs(cp->position.y - 10.0) < 1e-12);
    CHECK(std::abs(cp->position.x - 20.0) < 1e-12);
}

TEST_CASE("normals are perpendicular on straight lines") {
    for (double deg : {0.0, 20.0, 45.0, 70.0, 110.0, 160.0}) {
        const auto d = derivative_fields(oracle::gaussian_line(60, 60, deg, {30.0, 30.0}, 2.0), GaussianSpec(1.8));
        const auto pts = detect_center_points(d, 0.001);
        REQUIRE(pts.size() > 20);
        const Vec2 n_true = oracle::unit(deg).perp();
        for (const auto& p : pts) {
            const double c = std::min(1.0, std::abs(p.normal.dot(n_true)));
            CHECK(std::acos(c) * 180.0 / oracle::kPi < 1.0);
        }
    }
}

static std::vector<CenterPoint> synthetic_points(const std::vector<Vec2>& pos, const std::vector<Vec2>& normals) {
    std::vector<CenterPoint> out;
    for (std::size_t i = 0; i < pos.size(); ++i) {
        CenterPoint c;
        c.position = pos[i];
        c.normal = canonical_normal(normals[i]);
        c.second_dir_deriv = -1.0;
        c.pixel = {int(std::lround(pos[i].x)), int(std::lround(pos[i].y))};
        out.push_back(c);
    }
    return out;
}

TEST_CASE("linking a straight line, in any input order") {
    std::vector<Vec2> pos, nrm;
    for (int i = 0; i < 30; ++i) {
        pos.push_back({10.0 + i, 20.0});
        nrm.push_back({0.0, 1.0});
    }
    auto pts = synthetic_points(pos, nrm);
    const auto lines = link_centerlines(pts, LinkParams{});
    REQUIRE(lines.size() == 1);
    REQUIRE(lines[0].points.size() == 30);
    const double dir = lines[0].points.back().position.x - lines[0].points.front().position.x;
    for (std::size_t i = 1; i < 30; ++i)
        CHECK((lines[0].points[i].position.x - lines[0].points[i - 1].position.x) * dir > 0.0);

    std::mt19937 rng(3);
    for (int k = 0; k < 5; ++k) {
        std::shuffle(pts.begin(), pts.end(), rng);
        const auto again = link_centerlines(pts, LinkParams{});
        REQUIRE(again.size() == 1);
        for (std::size_t i = 0; i < 30; ++i) CHECK(again[0].points[i].position == lines[0].points[i].position);
    }
}

TEST_CASE("two parallel lines 10 px apart") {
    std::vector<Vec2> pos, nrm;
    for (int i = 0; i < 25; ++i)
        for (double y : {20.0, 30.0}) {
            pos.push_back({10.0 + i, y});
            nrm.push_back({0.0, 1.0});
        }
    CHECK(link_centerlines(synthetic_points(pos, nrm), LinkParams{}).size() == 2);
    CHECK(link_centerlines(std::vector<CenterPoint>{}, LinkParams{}).empty());
}

TEST_CASE("linking a 90 degree arc keeps arc order") {
    std::vector<Vec2> pos, nrm;
    const double R = 40.0;
    const int n = 63;  // about one point per pixel
    for (int i = 0; i < n; ++i) {
        const double t = 0.5 * oracle::kPi * i / (n - 1);
        pos.push_back({50.0 + R * std::cos(t), 50.0 + R * std::sin(t)});
        nrm.push_back({std::cos(t), std::sin(t)});
    }
    const auto lines = link_centerlines(synthetic_points(pos, nrm), LinkParams{});
    REQUIRE(lines.size() == 1);
    REQUIRE(lines[0].points.size() == static_cast<std::size_t>(n));
    std::vector<double> param;
    for (const auto& p : lines[0].points) param.push_back(std::atan2(p.position.y - 50.0, p.position.x - 50.0));
    const bool up = param.back() > param.front();
    for (std::size_t i = 1; i < param.size(); ++i) CHECK((param[i] > param[i - 1]) == up);
}

TEST_CASE("short chains are discarded") {
    std::vector<Vec2> pos, nrm;
    for (int i = 0; i < 5; ++i) {
        pos.push_back({10.0 + i, 20.0});
        nrm.push_back({0.0, 1.0});
    }
    CHECK(link_centerlines(synthetic_points(pos, nrm), LinkParams{}).empty());
}

TEST_CASE("edge pair on a Gaussian line sits at the inflection points") {
    const auto d = derivative_fields(oracle::gaussian_line(60, 41, 0.0, {0.0, 20.0}, 2.0), GaussianSpec(1.0));
    auto cp = subpixel_center(d, {30, 20}, 0.001);
    REQUIRE(cp);
    auto e = edge_pair(d, *cp, 6.0);
    REQUIRE(e);
    // The smoothed profile is wider; the Gaussian correction maps the edge back
    // to the inflection point of the unsmoothed profile.
    CHECK(std::abs(e->d1 - e->d2) < 0.2);
    CHECK(std::abs(unbias_halfwidth(e->d1, 1.0, WidthProfile::Gaussian) - 2.0) < 0.15);
    CHECK(std::abs(unbias_halfwidth(e->d2, 1.0, WidthProfile::Gaussian) - 2.0) < 0.15);
}

TEST_CASE("edge pair on a step bar of half-width 3") {
    const double sigma = 1.5;
    const auto d = derivative_fields(oracle::bar_line(60, 41, 0.0, {0.0, 20.0}, 3.0, 0.3), GaussianSpec(sigma));
    auto cp = subpixel_center(d, {30, 20}, 0.001);
    REQUIRE(cp);
    auto e = edge_pair(d, *cp, 6.0);
    REQUIRE(e);
    // Dense-sampled oracle: maximum of |d/dy| of the analytic smoothed bar.
    const double s = std::sqrt(sigma * sigma + 0.09);
    double best = 0.0, arg = 0.0;
    for (double t = 0.0; t < 6.0; t += 1e-4) {
        const double g = std::abs(std::exp(-(t - 3) * (t - 3) / (2 * s * s)) - std::exp(-(t + 3) * (t + 3) / (2 * s * s)));
        if (g > best) {
            best = g;
            arg = t;
        }
    }
    CHECK(std::abs(e->d1 - arg) < 0.1);
    CHECK(std::abs(e->d2 - arg) < 0.1);
    CHECK(std::abs(unbias_halfwidth(e->d1, sigma, WidthProfile::Bar) - 3.0) < 0.25);
    CHECK(std::abs(unbias_halfwidth(e->d2, sigma, WidthProfile::Bar) - 3.0) < 0.25);
    CHECK(bar_edge_offset(3.0, sigma) == doctest::Approx(arg).epsilon(1e-3));
}

TEST_CASE("no edge pair on a flat background") {
    const auto d = derivative_fields(ScalarImage(40, 40, 0.2), GaussianSpec(1.8));
    CenterPoint cp;
    cp.position = {20, 20};
    cp.normal = {0, 1};
    cp.pixel = {20, 20};
    CHECK(!edge_pair(d, cp, 6.0));
}

TEST_CASE("detection is deterministic and gated") {
    const auto d = derivative_fields(oracle::gaussian_line(50, 50, 30.0, {25.0, 25.0}, 2.0), GaussianSpec(1.8));
    const auto a = detect_center_points(d, 0.001);
    const auto b = detect_center_points(d, 0.001);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].position == b[i].position);
    BinaryMask gate(50, 50);
    for (int y = 0; y < 25; ++y)
        for (int x = 0; x < 50; ++x) gate.set(x, y);
    for (const auto& p : detect_center_points(d, 0.001, &gate)) CHECK(gate.test(p.pixel));
}
