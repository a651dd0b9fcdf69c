#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spermmorph/geometry.hpp"

using namespace spermmorph;

TEST_CASE("conic fit on exact ellipse points") {
    std::vector<Vec2> pts;
    const double a = 30, b = 12, th = 25 * oracle::kPi / 180;
    for (int i = 0; i < 50; ++i) {
        const double t = 2 * oracle::kPi * i / 50;
        const double px = a * std::cos(t), py = b * std::sin(t);
        pts.push_back({40 + px * std::cos(th) - py * std::sin(th), 35 + px * std::sin(th) + py * std::cos(th)});
    }
    auto conic = fit_ellipse_conic(pts);
    REQUIRE(conic);
    auto e = conic_to_ellipse(*conic);
    REQUIRE(e);
    CHECK(e->center.x == doctest::Approx(40).epsilon(1e-9));
    CHECK(e->center.y == doctest::Approx(35).epsilon(1e-9));
    CHECK(e->semi_major == doctest::Approx(a).epsilon(1e-9));
    CHECK(e->semi_minor == doctest::Approx(b).epsilon(1e-9));
    CHECK(e->angle_deg == doctest::Approx(25).epsilon(1e-9));
}

TEST_CASE("collinear points admit no ellipse") {
    std::vector<Vec2> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({double(i), 2.0 * i});
    auto conic = fit_ellipse_conic(pts);
    CHECK((!conic || !conic_to_ellipse(*conic)));
}

TEST_CASE("convex hull and minimum-area rectangle") {
    std::vector<Vec2> pts{{0, 0}, {4, 0}, {4, 2}, {0, 2}, {2, 1}, {1, 1}};
    CHECK(convex_hull(pts).size() == 4);
    const RotatedRect r = min_area_rect(pts);
    CHECK(r.length == doctest::Approx(4));
    CHECK(r.width == doctest::Approx(2));
    CHECK(oracle::axis_diff(r.angle_deg, 0.0) < 1e-9);
}

TEST_CASE("axis angle folding") {
    CHECK(fold_axis_angle(-10) == doctest::Approx(170));
    CHECK(fold_axis_angle(370) == doctest::Approx(10));
    CHECK(axis_angle_between(10, 10) == doctest::Approx(0));
    CHECK(axis_angle_between(0, 90) == doctest::Approx(90));
    CHECK(axis_angle_between(170, 10) == doctest::Approx(20));
}

TEST_CASE("boundary points lie on pixel edges") {
    BinaryMask m(3, 3);
    m.set(1, 1);
    const auto b = boundary_points(m);
    CHECK(b.size() == 4);
    for (Vec2 p : b) CHECK(distance(p, {1, 1}) == doctest::Approx(0.5));
}
