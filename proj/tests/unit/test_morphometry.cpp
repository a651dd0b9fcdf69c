#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spermmorph/error.hpp"
#include "spermmorph/morphometry.hpp"
#include "spermmorph/synth.hpp"

using namespace spermmorph;

namespace {

Centerline polyline(const std::vector<Vec2>& pts) {
    Centerline l;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CenterPoint p;
        p.position = pts[i];
        const Vec2 a = pts[i == 0 ? 0 : i - 1], b = pts[i + 1 < pts.size() ? i + 1 : i];
        p.normal = canonical_normal((b - a).normalized().perp());
        l.points.push_back(p);
    }
    return l;
}

Centerline arc(double R, double sweep_deg, double step = 1.0) {
    std::vector<Vec2> pts;
    const double sweep = sweep_deg * oracle::kPi / 180;
    const int n = int(std::ceil(R * sweep / step));
    for (int i = 0; i <= n; ++i) {
        const double t = sweep * i / n;
        pts.push_back({200 + R * std::cos(t), 200 + R * std::sin(t)});
    }
    return polyline(pts);
}

}  // namespace

TEST_CASE("tail length") {
    std::vector<Vec2> s;
    for (int i = 0; i <= 200; ++i) s.push_back({10.0 + i, 5.0});
    CHECK(tail_length(polyline(s), PixelScale(0.1)) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(tail_length(arc(100, 90), PixelScale(1.0)) == doctest::Approx(157.08).epsilon(0.005));
    CHECK(tail_length(polyline({{0, 0}, {1, 0}}), PixelScale(0.05)) == doctest::Approx(0.05));
    CHECK_THROWS_AS(tail_length(polyline({{0, 0}}), PixelScale(1.0)), InvalidArgument);
    // Polyline length is never shorter than the chord.
    const Centerline a = arc(60, 200, 0.7);
    CHECK(polyline_length_px(a) >= distance(a.points.front().position, a.points.back().position));
}

TEST_CASE("tail width") {
    Centerline l = polyline({{0, 0}, {1, 0}, {2, 0}});
    l.points[1].width = 3.2;
    CHECK(tail_width(l) == doctest::Approx(3.2));
    CHECK_THROWS_AS(tail_width(polyline({{0, 0}, {1, 0}})), Error);
}

TEST_CASE("tail width on rendered lines") {
    MeasurementConfig cfg;
    auto measure = [&](const CurveSpec& spec) {
        const auto r = render_curve(spec, 200, 60, 0.0, 1);
        const auto f = derivative_fields(r.image, cfg.gaussian);
        const auto tt = trace_tail(f, r.mask, cfg);
        REQUIRE(tt.line);
        return tail_width(*tt.line);
    };
    CurveSpec g;
    g.start = {20, 30};
    g.end = {180, 30};
    g.profile = IntensityProfile::Gaussian;
    g.width_start = g.width_end = 4.0;  // Gaussian sigma 2
    cfg.steger.width_profile = WidthProfile::Gaussian;
    CHECK(measure(g) == doctest::Approx(4.0).epsilon(0.05));

    CurveSpec taper = g;
    taper.profile = IntensityProfile::SmoothedStep;
    taper.width_start = 6.0;
    taper.width_end = 2.0;
    cfg.steger.width_profile = WidthProfile::Bar;
    CHECK(measure(taper) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("tail curvature") {
    std::vector<Vec2> s;
    for (int i = 0; i <= 100; ++i) s.push_back({10.0 + i, 5.0 + 0.5 * i});
    const auto flat = tail_curvature(polyline(s), 10.0);
    for (double k : flat.curvature) CHECK(std::abs(k) < 1e-12);
    CHECK(flat.angle_max_deg < 1e-9);

    const Centerline c = arc(50, 120);
    const auto prof = tail_curvature(c, 10.0);
    for (std::size_t i = 10; i + 10 < prof.curvature.size(); ++i)
        CHECK(std::abs(prof.curvature[i]) == doctest::Approx(0.02).epsilon(0.05));
    CHECK(prof.mean_abs_curvature == doctest::Approx(0.02).epsilon(0.05));

    const Centerline q = arc(60, 90);
    CHECK(tail_curvature(q, polyline_length_px(q)).angle_max_deg == doctest::Approx(90).epsilon(2.0 / 90));

    CHECK_THROWS_AS(tail_curvature(polyline({{0, 0}, {1, 0}}), 10.0), InvalidArgument);
    CHECK_THROWS_AS(tail_curvature(polyline({{1, 1}, {1, 1}, {1, 1}}), 10.0), Error);
}

TEST_CASE("ellipse fit") {
    const PixelScale one(1.0);
    auto e = fit_ellipse(oracle::ellipse_mask(160, 100, {80, 50}, 50, 25, 0), one);
    REQUIRE(e);
    CHECK(e->length_um == doctest::Approx(100).epsilon(0.02));
    CHECK(e->width_um == doctest::Approx(50).epsilon(0.02));
    CHECK(e->ellipticity == doctest::Approx(2.0).epsilon(0.02));
    CHECK(oracle::axis_diff(e->major_axis_angle_deg, 0) < 1.0);

    auto c = fit_ellipse(oracle::ellipse_mask(60, 60, {30, 30}, 20, 20, 0), one);
    REQUIRE(c);
    CHECK(c->ellipticity == doctest::Approx(1.0).epsilon(0.02));
    CHECK(c->ellipticity >= 1.0);

    BinaryMask tiny(5, 5);
    tiny.set(2, 2);
    CHECK(!fit_ellipse(tiny, one));
}

TEST_CASE("Table 2 ellipticity rounding") {
    CHECK(format_2dp(4.67 / 2.69) == "1.74");
    CHECK(format_2dp(5.05 / 2.57) == "1.96");
    CHECK(round_half_up_2(0.125) == doctest::Approx(0.13));
    CHECK(format_2dp(2.675) == "2.68");
    CHECK(format_2dp(-0.004) == "0.00");
}

TEST_CASE("rectangle fit") {
    const PixelScale one(1.0);
    const RectangleFit r = fit_rectangle(oracle::rect_mask(80, 40, {40.5, 20.5}, 40, 10, 0), one);
    CHECK(r.length_um == doctest::Approx(40).epsilon(1e-9));
    CHECK(r.width_um == doctest::Approx(10).epsilon(1e-9));
    CHECK(oracle::axis_diff(r.angle_deg, 0) < 1e-9);

    const RectangleFit t = fit_rectangle(oracle::rect_mask(100, 100, {50, 50}, 40, 10, 30), one);
    CHECK(std::abs(t.length_um - 40) <= 1.0);
    CHECK(std::abs(t.width_um - 10) <= 1.0);
    CHECK(oracle::axis_diff(t.angle_deg, 30) <= 1.0);

    const RectangleFit sq = fit_rectangle(oracle::rect_mask(60, 60, {30.5, 30.5}, 20, 20, 0), one);
    CHECK(sq.length_um == doctest::Approx(20));
    CHECK(sq.width_um == doctest::Approx(20));
    const RectangleFit sq2 = fit_rectangle(oracle::rect_mask(60, 60, {30.5, 30.5}, 20, 20, 0), one);
    CHECK(sq.angle_deg == sq2.angle_deg);

    BinaryMask px(5, 5);
    px.set(2, 2);
    CHECK(fit_rectangle(px, one).degenerate);
    CHECK_THROWS_AS(fit_rectangle(BinaryMask(5, 5), one), InvalidArgument);
}

TEST_CASE("head-midpiece angle") {
    CHECK(head_midpiece_angle(10, 10) == doctest::Approx(0));
    CHECK(head_midpiece_angle(0, 90) == doctest::Approx(90));
    CHECK(head_midpiece_angle(170, 10) == doctest::Approx(20));
}

TEST_CASE("part areas") {
    InstancePartMask m(40, 40);
    for (int i = 0; i < 100; ++i) m.set(i % 20, 20 + i / 20, 1, PartLabel::Tail);
    auto a = part_areas(m, 1, PixelScale(0.1));
    CHECK(a.area_um2.at(PartLabel::Tail) == doctest::Approx(1.0));
    CHECK(a.vacuole.count == 0);
    CHECK(!a.vacuole.area_um2);

    for (int i = 0; i < 10; ++i) m.set(i, 0, 1, PartLabel::Vacuole);
    for (int i = 0; i < 10; ++i) m.set(i, 5, 1, PartLabel::Vacuole);
    a = part_areas(m, 1, PixelScale(0.1));
    CHECK(a.vacuole.count == 2);
    REQUIRE(a.vacuole.area_um2);
    CHECK(*a.vacuole.area_um2 == doctest::Approx(0.20));
    CHECK_THROWS_AS(part_areas(m, 4, PixelScale(0.1)), InvalidArgument);
}

TEST_CASE("phantom measurement") {
    PhantomRanges rg;
    rg.max_vacuoles = 0;
    const Phantom ph = render_sperm_phantom(random_phantom_spec(11, 0, rg));
    MeasurementConfig cfg;
    MeasurementDetail det;
    const MorphReport r = measure_sperm(ph.image, ph.mask, 1, cfg, &det);
    const double s = cfg.scale.microns_per_pixel();
    CHECK(r.vacuole.count == 0);
    CHECK(!r.vacuole.area_um2);
    REQUIRE(r.head);
    CHECK(r.head->length_um == doctest::Approx(ph.truth.head_length * s).epsilon(0.02));
    CHECK(r.head->width_um == doctest::Approx(ph.truth.head_width * s).epsilon(0.03));
    REQUIRE(r.tail);
    CHECK(r.tail->length_um == doctest::Approx(ph.truth.tail.length * s).epsilon(0.05));
    CHECK(r.tail->width_um == doctest::Approx(ph.truth.tail.mean_width * s).epsilon(0.04));
    REQUIRE(r.midpiece);
    CHECK(std::abs(r.midpiece->length_um - ph.truth.midpiece_length * s) <= 1.0 * s);
    REQUIRE(r.head_midpiece_angle_deg);
    CHECK(std::abs(*r.head_midpiece_angle_deg - ph.truth.head_midpiece_angle_deg) <= 1.0);
    CHECK(r.flags.count(QualityFlag::FragmentedTail) == 0);
    CHECK_THROWS_AS(measure_sperm(ph.image, ph.mask, 9, cfg), InvalidArgument);
}

TEST_CASE("fragmented tail measures the longest piece and flags it") {
    const Phantom ph = render_sperm_phantom(random_phantom_spec(11, 1));
    InstancePartMask cut = ph.mask;
    // Erase a stretch of tail around the middle of the curve.
    const auto& mid = ph.truth.tail.samples[ph.truth.tail.samples.size() / 2].position;
    for (int y = 0; y < cut.height(); ++y)
        for (int x = 0; x < cut.width(); ++x)
            if (cut.part(x, y) == PartLabel::Tail && distance({double(x), double(y)}, mid) < 8.0)
                cut.set(x, y, 0, PartLabel::Background);
    const MorphReport r = measure_sperm(ph.image, cut, 1, MeasurementConfig{});
    CHECK(r.flags.count(QualityFlag::FragmentedTail) == 1);
    REQUIRE(r.tail);
    CHECK(r.tail->length_um < 0.6 * ph.truth.tail.length * 0.1);
}

TEST_CASE("missing parts set flags instead of failing") {
    InstancePartMask m(60, 60);
    for (int y = 10; y < 20; ++y)
        for (int x = 10; x < 30; ++x) m.set(x, y, 1, PartLabel::Nucleus);
    const MorphReport r = measure_sperm(ScalarImage(60, 60, 0.2), m, 1, MeasurementConfig{});
    CHECK(r.flags.count(QualityFlag::MissingPart) == 1);
    CHECK(!r.tail);
    CHECK(!r.midpiece);
    CHECK(r.head);
}
