#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spermmorph/endpoint.hpp"
#include "spermmorph/error.hpp"
#include "spermmorph/morphometry.hpp"
#include "spermmorph/synth.hpp"

using namespace spermmorph;

TEST_CASE("cos_alpha cases") {
    CHECK(cos_alpha({1, 0}, {-1, 0}) == -1.0);
    CHECK(cos_alpha({1, 0}, {0, 1}) == 0.0);
    CHECK(std::abs(cos_alpha({3, 4}, {6, 8}) - 1.0) < 1e-12);
    CHECK_THROWS_WITH_AS(cos_alpha({0, 0}, {1, 0}), "undefined angle", Error);
    CHECK_THROWS_AS(cos_alpha({1, 0}, {0, 0}), Error);
}

TEST_CASE("cos_alpha is scale invariant") {
    const Vec2 g1{0.3, -1.7}, g2{-2.2, 0.4};
    const double ref = cos_alpha(g1, g2);
    for (double a : {1e-3, 0.5, 7.0, 1e4})
        for (double b : {1e-2, 3.0, 250.0}) CHECK(std::abs(cos_alpha(g1 * a, g2 * b) - ref) < 1e-12);
}

TEST_CASE("filter keeps |cos alpha| on the threshold and trims just below it") {
    MeasurementConfig cfg;
    const Centerline line = oracle::row_line(10, 30);
    const double thr = cfg.endpoint.cos_threshold;

    const auto above = oracle::crafted_edge_fields(std::acos(thr + 1e-9), 12);
    const FilterResult keep = filter_endpoints(line, above, cfg);
    CHECK(keep.trimmed_head() == 0);
    CHECK(keep.trimmed_tip() == 0);
    REQUIRE(keep.head_verdicts.front().cos_alpha);
    CHECK(std::abs(*keep.head_verdicts.front().cos_alpha) >= thr);

    const auto below = oracle::crafted_edge_fields(std::acos(thr - 1e-9), 12);
    const FilterResult trim = filter_endpoints(line, below, cfg);
    CHECK(trim.trimmed_head() == 3);
    CHECK(trim.trimmed_tip() == 0);
    CHECK(trim.line.points.front().position.x == 13.0);
    CHECK(std::abs(*trim.head_verdicts.front().cos_alpha) < thr);

    // 25 degrees off antiparallel is inside acos(0.9) = 25.84 degrees.
    const auto within = oracle::crafted_edge_fields(25.0 * oracle::kPi / 180.0, 12);
    CHECK(filter_endpoints(line, within, cfg).trimmed_head() == 0);
}

TEST_CASE("filter errors") {
    MeasurementConfig cfg;
    const auto f = oracle::crafted_edge_fields(0.0, -1);
    CHECK_THROWS_AS(filter_endpoints(oracle::row_line(10, 14), f, cfg), InvalidArgument);
    const auto bad = oracle::crafted_edge_fields(1.2, 40);
    CHECK_THROWS_WITH_AS(filter_endpoints(oracle::row_line(10, 30), bad, cfg), "no valid center points", Error);
}

namespace {

struct Traced {
    RenderedCurve r;
    DerivativeFields fields;
    Centerline line;
};

Traced trace(const CurveSpec& spec, int w, int h) {
    MeasurementConfig cfg;
    Traced t{render_curve(spec, w, h, 0.0, 1), {}, {}};
    t.fields = derivative_fields(t.r.image, cfg.gaussian);
    const BinaryMask gate = dilate(t.r.mask, cfg.steger.mask_margin);
    const auto pts = detect_center_points(t.fields, cfg.steger.strength_threshold, &gate, cfg.steger.dedup_radius);
    auto lines = link_centerlines(pts, link_params(cfg.steger));
    REQUIRE(!lines.empty());
    t.line = lines.front();
    // Orient from the curve start to its end.
    if (distance(t.line.points.front().position, t.r.truth.start) >
        distance(t.line.points.back().position, t.r.truth.start))
        std::reverse(t.line.points.begin(), t.line.points.end());
    return t;
}

CurveSpec straight(Vec2 a, Vec2 b) {
    CurveSpec s;
    s.start = a;
    s.end = b;
    s.width_start = s.width_end = 4.0;
    return s;
}

}  // namespace

// Columns [x0, x0 + w) of a rendered curve, so that a line can enter from the
// image border without a cap.
static RenderedCurve crop(const RenderedCurve& r, int x0, int w) {
    std::vector<double> v;
    BinaryMask m(w, r.image.height());
    for (int y = 0; y < r.image.height(); ++y)
        for (int x = 0; x < w; ++x) {
            v.push_back(r.image.at(x0 + x, y));
            if (r.mask.test(x0 + x, y)) m.set(x, y);
        }
    return {ScalarImage(w, r.image.height(), std::move(v)), m, r.truth};
}

TEST_CASE("straight line without caps: nothing trimmed") {
    MeasurementConfig cfg;
    const auto r = crop(render_curve(straight({10, 40}, {190, 40}), 200, 80, 0.0, 1), 40, 100);
    const auto f = derivative_fields(r.image, cfg.gaussian);
    const TailTrace tt = trace_tail(f, r.mask, cfg);
    REQUIRE(tt.filter);
    CHECK(tt.filter->trimmed_head() == 0);
    CHECK(tt.filter->trimmed_tip() == 0);
    for (const auto& v : tt.filter->head_verdicts) CHECK(v.kept);
    for (const auto& v : tt.filter->tip_verdicts) CHECK(v.kept);
}

TEST_CASE("flat caps: points near the cap are trimmed and walked back") {
    MeasurementConfig cfg;
    const auto r = render_curve(straight({20, 40}, {120, 40}), 140, 80, 0.0, 1);
    const auto f = derivative_fields(r.image, cfg.gaussian);
    const TailTrace tt = trace_tail(f, r.mask, cfg, r.truth.start);
    REQUIRE(tt.filter);
    for (const auto* verdicts : {&tt.filter->head_verdicts, &tt.filter->tip_verdicts})
        for (std::size_t i = 0; i + 1 < verdicts->size(); ++i)
            CHECK(std::min(distance((*verdicts)[i].point.position, r.truth.start),
                           distance((*verdicts)[i].point.position, r.truth.end)) < 2.0 * cfg.gaussian.sigma());
    REQUIRE(tt.line);
    CHECK(distance(tt.line->points.front().position, r.truth.start) <= 1.0);
    CHECK(distance(tt.line->points.back().position, r.truth.end) <= 1.0);
}

TEST_CASE("T-junction at one end: points trimmed there only, near the junction") {
    MeasurementConfig cfg;
    CurveSpec spec = straight({10, 50}, {150, 50});
    spec.junction_end = JunctionSpec{30.0, 4.0, 0.0, 90.0};
    const auto r = crop(render_curve(spec, 180, 100, 0.0, 1), 40, 140);
    const Vec2 end = r.truth.end - Vec2{40.0, 0.0};
    const auto f = derivative_fields(r.image, cfg.gaussian);
    const TailTrace tt = trace_tail(f, r.mask, cfg, Vec2{0.0, 50.0});
    REQUIRE(tt.filter);
    CHECK(tt.filter->trimmed_head() == 0);
    CHECK(tt.filter->trimmed_tip() >= 1);
    // The bar occupies x in [end.x, end.x + 4]; trimmed points lie within 3 px of it.
    for (std::size_t i = 0; i + 1 < tt.filter->tip_verdicts.size(); ++i)
        CHECK(end.x - tt.filter->tip_verdicts[i].point.position.x < 3.0);
    REQUIRE(tt.line);
    CHECK(distance(tt.line->points.back().position, end) <= 1.5);
}

TEST_CASE("candidate pixels by sector") {
    using P = std::array<Pixel, 2>;
    CHECK(candidate_pixels({5, 5}, 30.0) == P{Pixel{6, 6}, Pixel{6, 5}});
    auto c120 = candidate_pixels({5, 5}, 120.0);
    CHECK(((c120 == P{Pixel{4, 6}, Pixel{5, 6}}) || (c120 == P{Pixel{5, 6}, Pixel{4, 6}})));
    auto c225 = candidate_pixels({0, 0}, 225.0);
    CHECK(((c225 == P{Pixel{-1, -1}, Pixel{-1, 0}}) || (c225 == P{Pixel{-1, 0}, Pixel{-1, -1}})));
    // Every sector brackets the direction: both candidates within 45 degrees of it.
    for (double a = -720.0; a <= 720.0; a += 7.5) {
        const Vec2 d = oracle::unit(a);
        for (Pixel p : candidate_pixels({0, 0}, a)) {
            const Vec2 v = Vec2{double(p.x), double(p.y)}.normalized();
            CHECK(v.dot(d) >= std::cos(oracle::kPi / 4) - 1e-12);
        }
    }
    CHECK_THROWS_AS(candidate_pixels({0, 0}, std::nan("")), InvalidArgument);
}

TEST_CASE("momentum update arithmetic") {
    const Vec2 g = momentum_update(0.9, {1, 0}, {0, 1});
    CHECK(g.x == 0.9);
    CHECK(g.y == 0.09999999999999998);  // (1 - 0.9) in binary
    CHECK(std::abs(g.y - 0.1) < 1e-15);
}

TEST_CASE("walk on a straight line reaches the mask end") {
    MeasurementConfig cfg;
    const Traced t = trace(straight({20, 40}, {100, 40}), 130, 80);
    Centerline cut;
    for (const auto& p : t.line.points)
        if (p.position.x <= 95.0) cut.points.push_back(p);
    REQUIRE(cut.points.back().position.x > 94.0);
    const Reconstruction rec = reconstruct_endpoint(cut, LineEnd::Tip, t.fields, t.r.mask, cfg);
    REQUIRE(!rec.points.empty());
    CHECK(rec.terminated);
    double prev = cut.points.back().position.x;
    for (const auto& p : rec.points) {
        CHECK(p.position.x > prev);
        prev = p.position.x;
        CHECK(p.source == PointSource::Reconstructed);
    }
    CHECK(distance(rec.points.back().position, {100.0, 40.0}) <= 1.5);
    REQUIRE(rec.momenta.size() == rec.points.size());
    for (std::size_t i = 0; i < rec.points.size(); ++i) {
        CHECK(std::abs(rec.points[i].normal.dot(rec.momenta[i])) < 1e-9);
        CHECK(rec.momenta[i].norm() > 0.0);
    }

    Centerline joined = cut;
    attach_reconstruction(joined, Reconstruction{}, rec);
    CHECK(joined.points.size() == cut.points.size() + rec.points.size());
}

TEST_CASE("walk from a line already at the mask boundary is empty") {
    MeasurementConfig cfg;
    const Traced t = trace(straight({20, 40}, {100, 40}), 130, 80);
    const int end_x = int(std::lround(t.line.points.back().position.x));
    BinaryMask mask(t.r.mask.width(), t.r.mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x <= end_x; ++x)
            if (t.r.mask.test(x, y)) mask.set(x, y);
    const Reconstruction rec = reconstruct_endpoint(t.line, LineEnd::Tip, t.fields, mask, cfg);
    CHECK(rec.points.empty());
}

TEST_CASE("walk on a diagonal line stays on the line") {
    MeasurementConfig cfg;
    const Traced t = trace(straight({20, 20}, {90, 90}), 110, 110);
    Centerline cut;
    for (const auto& p : t.line.points)
        if (p.position.x <= 80.0) cut.points.push_back(p);
    const Reconstruction rec = reconstruct_endpoint(cut, LineEnd::Tip, t.fields, t.r.mask, cfg);
    REQUIRE(!rec.points.empty());
    for (const auto& p : rec.points) CHECK(std::abs(p.position.x - p.position.y) <= 1.5);
    CHECK(distance(rec.points.back().position, {90.0, 90.0}) <= 1.5);
}
