#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spermmorph/error.hpp"
#include "spermmorph/synth.hpp"

using namespace spermmorph;

TEST_CASE("straight and arc ground truth") {
    CurveSpec s;
    s.start = {20, 20};
    s.end = {220, 20};
    CHECK(curve_truth(s).length == doctest::Approx(200.0).epsilon(1e-12));

    CurveSpec a;
    a.kind = CurveKind::Arc;
    a.center = {150, 150};
    a.radius = 100;
    a.sweep_deg = 90;
    const GroundTruth t = curve_truth(a);
    CHECK(t.length == doctest::Approx(157.0796).epsilon(1e-6));
    REQUIRE(t.constant_curvature);
    CHECK(std::abs(*t.constant_curvature) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(t.mean_abs_curvature == doctest::Approx(0.01).epsilon(1e-9));

    // Self-consistency: the dense-sample polyline agrees with the closed form.
    double poly = 0.0;
    for (std::size_t i = 1; i < t.samples.size(); ++i) poly += distance(t.samples[i].position, t.samples[i - 1].position);
    CHECK(std::abs(poly - t.length) < 1e-3);
}

TEST_CASE("spline truth is self-consistent") {
    CurveSpec s;
    s.kind = CurveKind::Spline;
    s.control = {{20, 20}, {60, 50}, {110, 40}, {160, 80}};
    const GroundTruth t = curve_truth(s);
    double poly = 0.0;
    for (std::size_t i = 1; i < t.samples.size(); ++i) poly += distance(t.samples[i].position, t.samples[i - 1].position);
    CHECK(std::abs(poly - t.length) < 1e-3);
}

TEST_CASE("invalid curves") {
    CurveSpec s;
    s.start = {20, 20};
    s.end = {20, 20};
    CHECK_THROWS_AS(sample_curve(s), InvalidArgument);
    s.end = {300, 20};
    CHECK_THROWS_AS(render_curve(s, 100, 50, 0.0, 1), InvalidArgument);
    s.end = {60, 20};
    s.width_start = -1;
    CHECK_THROWS_AS(sample_curve(s), InvalidArgument);
}

TEST_CASE("junction decoration adds a bright bar beyond the end") {
    CurveSpec s;
    s.start = {20, 50};
    s.end = {100, 50};
    const auto plain = render_curve(s, 140, 100, 0.0, 1);
    s.junction_end = JunctionSpec{};
    const auto deco = render_curve(s, 140, 100, 0.0, 1);
    // Perpendicular bar centred half its width beyond the end.
    CHECK(deco.image.at(102, 62) > 0.5);
    CHECK(plain.image.at(102, 62) < 0.2);
    CHECK(deco.image.at(60, 62) == plain.image.at(60, 62));
    // The bar is not part of the tail mask.
    CHECK(deco.mask == plain.mask);
    CHECK_THROWS_AS(([&] {
                        CurveSpec b = s;
                        b.junction_end->width = 0;
                        (void)render_curve(b, 140, 100, 0.0, 1);
                    }()),
                    InvalidArgument);
}

TEST_CASE("rendered mask contains every centreline sample") {
    CurveSpec a;
    a.kind = CurveKind::Arc;
    a.center = {80, 80};
    a.radius = 50;
    a.start_angle_deg = 10;
    a.sweep_deg = 140;
    a.width_start = 6;
    a.width_end = 2;
    const auto r = render_curve(a, 160, 160, 0.02, 9);
    for (const auto& smp : r.truth.samples)
        CHECK(r.mask.test(int(std::lround(smp.position.x)), int(std::lround(smp.position.y))));
    CHECK(r.truth.mean_width == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("phantom parts and truth") {
    PhantomRanges rg;
    PhantomSpec spec = random_phantom_spec(3, 0, rg);
    spec.head.semi_major = 25;
    spec.head.semi_minor = 13;
    spec.head.vacuoles = {{{-5, -3}, 2.5}, {{6, 3}, 2.0}};
    const Phantom ph = render_sperm_phantom(spec);
    CHECK(ph.truth.ellipticity == doctest::Approx(25.0 / 13.0));
    CHECK(ph.truth.vacuole_count == 2);
    CHECK(ph.mask.instance_ids() == std::vector<InstanceId>{1});
    CHECK(instance_part_mask(ph.mask, 1, PartLabel::Tail).count() == ph.truth.tail_px);
    CHECK(instance_part_mask(ph.mask, 1, PartLabel::Midpiece).count() == ph.truth.midpiece_px);
    CHECK(instance_part_mask(ph.mask, 1, PartLabel::Vacuole).count() == ph.truth.vacuole_px);
    CHECK(connected_components(instance_part_mask(ph.mask, 1, PartLabel::Vacuole)).size() == 2);
}

TEST_CASE("batches are deterministic per seed") {
    const auto a = phantom_batch(42, 3);
    const auto b = phantom_batch(42, 3);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::equal(a[i].image.values().begin(), a[i].image.values().end(), b[i].image.values().begin()));
        CHECK(a[i].mask == b[i].mask);
        // Members do not depend on the batch size.
        const Phantom single = render_sperm_phantom(random_phantom_spec(42, i));
        CHECK(single.mask == a[i].mask);
    }
    const auto c = phantom_batch(43, 1);
    CHECK(!(c[0].mask == a[0].mask));
}
