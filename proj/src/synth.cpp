#include "spermmorph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "spermmorph/error.hpp"
#include "spermmorph/geometry.hpp"
#include "spermmorph/parallel.hpp"

namespace spermmorph {

namespace {

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Bar of half-width h blurred by a Gaussian of scale s, evaluated at offset d.
double band(double d, double h, double s) { return phi((h - d) / s) + phi((h + d) / s) - 1.0; }

bool finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

Vec2 direction(double deg) { return {std::cos(deg2rad(deg)), std::sin(deg2rad(deg))}; }

void check_widths(const CurveSpec& spec) {
    if (!(spec.width_start > 0.0) || !(spec.width_end > 0.0) || !std::isfinite(spec.width_start) ||
        !std::isfinite(spec.width_end)) {
        throw InvalidArgument("curve widths must be finite and > 0");
    }
    if (!(spec.edge_sigma > 0.0)) throw InvalidArgument("edge_sigma must be > 0");
}

void add_spline_samples(const CurveSpec& spec, double spacing, std::vector<CurveSample>& out) {
    const auto& c = spec.control;
    if (c.size() < 2) throw InvalidArgument("spline needs at least 2 control points");
    for (const auto& p : c) {
        if (!finite(p)) throw InvalidArgument("spline control points must be finite");
    }
    const std::size_t segs = c.size() - 1;
    for (std::size_t i = 0; i < segs; ++i) {
        const Vec2 p0 = c[i == 0 ? 0 : i - 1];
        const Vec2 p1 = c[i];
        const Vec2 p2 = c[i + 1];
        const Vec2 p3 = c[std::min(i + 2, c.size() - 1)];
        if (distance(p1, p2) == 0.0) throw InvalidArgument("repeated spline control point");
        const Vec2 a = p1 * 2.0;
        const Vec2 b = p2 - p0;
        const Vec2 cc = p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3;
        const Vec2 d = p1 * 3.0 - p0 - p2 * 3.0 + p3;
        const double est = distance(p0, p1) + distance(p1, p2) + distance(p2, p3);
        const int n = std::max(16, static_cast<int>(std::ceil(est / spacing)));
        for (int k = (i == 0 ? 0 : 1); k <= n; ++k) {
            const double t = static_cast<double>(k) / n;
            const Vec2 pos = (a + b * t + cc * (t * t) + d * (t * t * t)) * 0.5;
            const Vec2 d1 = (b + cc * (2.0 * t) + d * (3.0 * t * t)) * 0.5;
            const Vec2 d2 = (cc * 2.0 + d * (6.0 * t)) * 0.5;
            const double speed = d1.norm();
            CurveSample smp;
            smp.position = pos;
            smp.tangent = d1.normalized();
            smp.curvature = speed > 0.0 ? d1.cross(d2) / (speed * speed * speed) : 0.0;
            if (!out.empty()) smp.s = out.back().s + distance(out.back().position, pos);
            out.push_back(smp);
        }
    }
}

}  // namespace

std::vector<CurveSample> sample_curve(const CurveSpec& spec, double spacing) {
    if (!(spacing > 0.0)) throw InvalidArgument("sample spacing must be > 0");
    check_widths(spec);
    std::vector<CurveSample> out;
    switch (spec.kind) {
        case CurveKind::Straight: {
            if (!finite(spec.start) || !finite(spec.end)) throw InvalidArgument("endpoints must be finite");
            const double len = distance(spec.start, spec.end);
            if (len == 0.0) throw InvalidArgument("straight curve has zero length");
            const int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
            const Vec2 t = (spec.end - spec.start) / len;
            for (int k = 0; k <= n; ++k) {
                const double s = len * k / n;
                out.push_back({spec.start + t * s, t, s, 0.0, 0.0});
            }
            break;
        }
        case CurveKind::Arc: {
            if (!finite(spec.center) || !(spec.radius > 0.0) || !std::isfinite(spec.radius) ||
                !std::isfinite(spec.start_angle_deg) || !std::isfinite(spec.sweep_deg) || spec.sweep_deg == 0.0) {
                throw InvalidArgument("arc needs a finite centre, radius > 0 and nonzero sweep");
            }
            const double sign = spec.sweep_deg > 0.0 ? 1.0 : -1.0;
            const double len = spec.radius * deg2rad(std::abs(spec.sweep_deg));
            const int n = std::max(2, static_cast<int>(std::ceil(len / spacing)));
            for (int k = 0; k <= n; ++k) {
                const double s = len * k / n;
                const double ang = deg2rad(spec.start_angle_deg) + sign * s / spec.radius;
                const Vec2 radial{std::cos(ang), std::sin(ang)};
                out.push_back({spec.center + radial * spec.radius, radial.perp() * sign, s, sign / spec.radius, 0.0});
            }
            break;
        }
        case CurveKind::Spline:
            add_spline_samples(spec, spacing, out);
            break;
    }
    const double len = out.back().s;
    for (auto& smp : out) {
        smp.width = spec.width_start + (spec.width_end - spec.width_start) * (len > 0.0 ? smp.s / len : 0.0);
    }
    return out;
}

GroundTruth curve_truth(const CurveSpec& spec, double curvature_window) {
    GroundTruth gt;
    gt.samples = sample_curve(spec, 0.05);
    const auto& smp = gt.samples;
    gt.start = smp.front().position;
    gt.end = smp.back().position;
    gt.mean_width = 0.5 * (spec.width_start + spec.width_end);
    switch (spec.kind) {
        case CurveKind::Straight:
            gt.length = distance(spec.start, spec.end);
            gt.constant_curvature = 0.0;
            break;
        case CurveKind::Arc:
            gt.length = spec.radius * deg2rad(std::abs(spec.sweep_deg));
            gt.constant_curvature = (spec.sweep_deg > 0.0 ? 1.0 : -1.0) / spec.radius;
            break;
        case CurveKind::Spline:
            gt.length = smp.back().s;
            break;
    }
    if (gt.constant_curvature) {
        gt.mean_abs_curvature = std::abs(*gt.constant_curvature);
    } else {
        double acc = 0.0;
        for (std::size_t i = 1; i < smp.size(); ++i) {
            acc += 0.5 * (std::abs(smp[i].curvature) + std::abs(smp[i - 1].curvature)) * (smp[i].s - smp[i - 1].s);
        }
        gt.mean_abs_curvature = gt.length > 0.0 ? acc / smp.back().s : 0.0;
    }

    // Same windowing as the measurement: turn of the direction across each window.
    std::vector<double> theta(smp.size());
    theta[0] = std::atan2(smp[0].tangent.y, smp[0].tangent.x);
    for (std::size_t i = 1; i < smp.size(); ++i) {
        const double a = std::atan2(smp[i].tangent.y, smp[i].tangent.x);
        theta[i] = theta[i - 1] + std::remainder(a - theta[i - 1], 2.0 * kPi);
    }
    const double half = 0.5 * curvature_window;
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < smp.size(); ++i) {
        while (smp[lo].s < smp[i].s - half) ++lo;
        while (hi + 1 < smp.size() && smp[hi + 1].s <= smp[i].s + half) ++hi;
        gt.angle_max_deg = std::max(gt.angle_max_deg, rad2deg(std::abs(theta[hi] - theta[lo])));
    }
    return gt;
}

namespace {

// Signal above background, combined by maximum.
struct Canvas {
    int width, height;
    std::vector<double> signal;
    Canvas(int w, int h) : width(w), height(h), signal(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0) {}
    void put(int x, int y, double v) {
        double& s = signal[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
        s = std::max(s, v);
    }
};

void check_inside(Vec2 p, int width, int height, int margin, const char* what) {
    if (p.x < margin || p.y < margin || p.x > width - 1 - margin || p.y > height - 1 - margin) {
        throw InvalidArgument(std::string(what) + " leaves the canvas (point " + std::to_string(p.x) + ", " +
                              std::to_string(p.y) + ")");
    }
}

// Flat-capped tube around the samples. Pixel centres up to half a pixel
// diagonal past an end still belong to the mask, so the pixel holding the end
// point is always included.
void paint_curve(Canvas& cv, BinaryMask* mask, const std::vector<CurveSample>& smp, const CurveSpec& spec,
                 double amplitude) {
    const double se = spec.edge_sigma;
    double hmax = 0.0;
    for (const auto& s : smp) hmax = std::max(hmax, 0.5 * s.width);
    const double reach = (spec.profile == IntensityProfile::Gaussian ? 4.0 * hmax : hmax + 4.0 * se) + 1.0;
    double minx = std::numeric_limits<double>::infinity(), miny = minx, maxx = -minx, maxy = -minx;
    for (const auto& s : smp) {
        minx = std::min(minx, s.position.x);
        maxx = std::max(maxx, s.position.x);
        miny = std::min(miny, s.position.y);
        maxy = std::max(maxy, s.position.y);
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(minx - reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(miny - reach)));
    const int x1 = std::min(cv.width - 1, static_cast<int>(std::ceil(maxx + reach)));
    const int y1 = std::min(cv.height - 1, static_cast<int>(std::ceil(maxy + reach)));
    if (x1 < x0 || y1 < y0) return;
    const int bw = x1 - x0 + 1;
    const int bh = y1 - y0 + 1;
    std::vector<double> best(static_cast<std::size_t>(bw) * static_cast<std::size_t>(bh),
                             std::numeric_limits<double>::infinity());
    std::vector<int> best_k(best.size(), -1);
    const int r = static_cast<int>(std::ceil(reach));
    for (std::size_t k = 0; k < smp.size(); ++k) {
        const Vec2 p = smp[k].position;
        const int cx = static_cast<int>(std::lround(p.x));
        const int cy = static_cast<int>(std::lround(p.y));
        for (int y = std::max(y0, cy - r); y <= std::min(y1, cy + r); ++y) {
            for (int x = std::max(x0, cx - r); x <= std::min(x1, cx + r); ++x) {
                const double dx = x - p.x;
                const double dy = y - p.y;
                const double d2 = dx * dx + dy * dy;
                const std::size_t i = static_cast<std::size_t>(y - y0) * static_cast<std::size_t>(bw) +
                                      static_cast<std::size_t>(x - x0);
                if (d2 < best[i]) {
                    best[i] = d2;
                    best_k[i] = static_cast<int>(k);
                }
            }
        }
    }
    const double len = smp.back().s;
    const CurveSample& first = smp.front();
    const CurveSample& last = smp.back();
    const double cap = std::sqrt(0.5);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const std::size_t i = static_cast<std::size_t>(y - y0) * static_cast<std::size_t>(bw) +
                                  static_cast<std::size_t>(x - x0);
            if (best_k[i] < 0) continue;
            const auto k = static_cast<std::size_t>(best_k[i]);
            const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
            double d = std::sqrt(best[i]);
            double factor = 1.0;
            bool in_mask = true;
            const double a_end = (p - last.position).dot(last.tangent);
            const double a_start = (first.position - p).dot(first.tangent);
            if (k + 1 == smp.size() && a_end > 0.0) d = std::abs((p - last.position).cross(last.tangent));
            if (k == 0 && a_start > 0.0) d = std::abs((p - first.position).cross(first.tangent));
            if (smp[k].s >= len - 4.0 * se - 1.0) {
                factor *= phi(-a_end / se);
                in_mask = in_mask && a_end <= cap;
            }
            if (smp[k].s <= 4.0 * se + 1.0) {
                factor *= phi(-a_start / se);
                in_mask = in_mask && a_start <= cap;
            }
            const double h = 0.5 * smp[k].width;
            const double v = spec.profile == IntensityProfile::Gaussian ? std::exp(-d * d / (2.0 * h * h))
                                                                        : band(d, h, se);
            cv.put(x, y, amplitude * v * factor);
            if (mask && in_mask && d <= h) mask->set(x, y);
        }
    }
}

// Rectangle centred at c with its length along unit vector u.
void paint_bar(Canvas& cv, BinaryMask* mask, Vec2 c, Vec2 u, double length, double width, double amplitude,
               double se) {
    const Vec2 v = u.perp();
    const double reach = 0.5 * std::hypot(length, width) + 4.0 * se + 1.0;
    const int x0 = std::max(0, static_cast<int>(std::floor(c.x - reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(c.y - reach)));
    const int x1 = std::min(cv.width - 1, static_cast<int>(std::ceil(c.x + reach)));
    const int y1 = std::min(cv.height - 1, static_cast<int>(std::ceil(c.y + reach)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const Vec2 q = Vec2{static_cast<double>(x), static_cast<double>(y)} - c;
            const double a = std::abs(q.dot(u));
            const double b = std::abs(q.dot(v));
            cv.put(x, y, amplitude * band(a, 0.5 * length, se) * band(b, 0.5 * width, se));
            if (mask && a <= 0.5 * length && b <= 0.5 * width) mask->set(x, y);
        }
    }
}

void paint_junction(Canvas& cv, const CurveSample& end, bool outward_is_tangent, const JunctionSpec& j,
                    double amplitude, double se) {
    if (!(j.length > 0.0) || !(j.width > 0.0) || !(j.gap >= 0.0) || !std::isfinite(j.angle_deg) ||
        std::abs(std::sin(deg2rad(j.angle_deg))) < 1e-3) {
        throw InvalidArgument("junction needs positive size, gap >= 0 and an angle crossing the curve");
    }
    const Vec2 out = outward_is_tangent ? end.tangent : -end.tangent;
    const double a = deg2rad(j.angle_deg);
    const Vec2 axis{out.x * std::cos(a) - out.y * std::sin(a), out.x * std::sin(a) + out.y * std::cos(a)};
    // Near side of the bar at `gap` from the end, measured along the curve.
    const Vec2 c = end.position + out * (j.gap + 0.5 * j.width / std::abs(std::sin(a)));
    paint_bar(cv, nullptr, c, axis, j.length, j.width, amplitude, se);
}

ScalarImage finish(const Canvas& cv, double background, double noise_sigma, std::uint64_t seed) {
    std::vector<double> px(cv.signal.size());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
    for (std::size_t i = 0; i < px.size(); ++i) {
        double v = background + cv.signal[i];
        if (noise_sigma > 0.0) v += noise(rng);
        px[i] = std::clamp(v, 0.0, 1.0);
    }
    return ScalarImage(cv.width, cv.height, std::move(px));
}

}  // namespace

RenderedCurve render_curve(const CurveSpec& spec, int width, int height, double noise_sigma, std::uint64_t seed,
                           int margin) {
    if (width <= 0 || height <= 0) throw InvalidArgument("canvas must be nonempty");
    if (noise_sigma < 0.0 || !std::isfinite(noise_sigma)) throw InvalidArgument("noise sigma must be >= 0");
    RenderedCurve out;
    out.truth = curve_truth(spec);
    for (const auto& s : out.truth.samples) check_inside(s.position, width, height, margin, "curve");
    Canvas cv(width, height);
    out.mask = BinaryMask(width, height);
    const double amp = spec.intensity - spec.background;
    paint_curve(cv, &out.mask, out.truth.samples, spec, amp);
    if (spec.junction_start) paint_junction(cv, out.truth.samples.front(), false, *spec.junction_start, amp, spec.edge_sigma);
    if (spec.junction_end) paint_junction(cv, out.truth.samples.back(), true, *spec.junction_end, amp, spec.edge_sigma);
    out.image = finish(cv, spec.background, noise_sigma, seed);
    return out;
}

Phantom render_sperm_phantom(const PhantomSpec& spec) {
    const HeadSpec& head = spec.head;
    const MidpieceSpec& mid = spec.midpiece;
    const int w = spec.canvas_width;
    const int h = spec.canvas_height;
    if (w <= 0 || h <= 0) throw InvalidArgument("canvas must be nonempty");
    if (!(head.semi_major >= head.semi_minor) || !(head.semi_minor > 0.0)) {
        throw InvalidArgument("head needs semi_major >= semi_minor > 0");
    }
    if (!(mid.length > 0.0) || !(mid.width > 0.0)) throw InvalidArgument("midpiece size must be > 0");
    const double se = spec.tail.edge_sigma;
    const Vec2 u = direction(head.angle_deg);
    const Vec2 v = u.perp();
    const Vec2 um = direction(head.angle_deg + mid.angle_offset_deg);
    const Vec2 mid_start = head.center + u * head.semi_major;
    const Vec2 mid_center = mid_start + um * (0.5 * mid.length);
    const Vec2 mid_end = mid_start + um * mid.length;

    const double ext = head.semi_major + 1.0;
    for (Vec2 corner : {Vec2{-ext, -ext}, Vec2{ext, -ext}, Vec2{-ext, ext}, Vec2{ext, ext}}) {
        check_inside(head.center + corner, w, h, 6, "head");
    }
    check_inside(mid_end, w, h, 6, "midpiece");

    Phantom out;
    PhantomTruth& t = out.truth;
    t.tail = curve_truth(spec.tail);
    for (const auto& s : t.tail.samples) check_inside(s.position, w, h, 6, "tail");

    Canvas cv(w, h);
    BinaryMask head_mask(w, h), mid_mask(w, h), tail_mask(w, h);
    std::vector<std::uint8_t> vac(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
    const double a = head.semi_major;
    const double b = head.semi_minor;
    const int r = static_cast<int>(std::ceil(a + 4.0 * se + 1.0));
    const int cx = static_cast<int>(std::lround(head.center.x));
    const int cy = static_cast<int>(std::lround(head.center.y));
    for (int y = std::max(0, cy - r); y <= std::min(h - 1, cy + r); ++y) {
        for (int x = std::max(0, cx - r); x <= std::min(w - 1, cx + r); ++x) {
            const Vec2 q = Vec2{static_cast<double>(x), static_cast<double>(y)} - head.center;
            const double hx = q.dot(u);
            const double hy = q.dot(v);
            const double rho = (hx / a) * (hx / a) + (hy / b) * (hy / b);
            const double rr = std::hypot(hx, hy);
            const double sd = rr > 0.0 ? rr - rr / std::sqrt(rho) : -b;
            double dark = 0.0;
            bool in_vac = false;
            for (const auto& d : head.vacuoles) {
                const double dist = std::hypot(hx - d.offset.x, hy - d.offset.y);
                dark = std::max(dark, band(dist, d.radius, se));
                in_vac = in_vac || dist <= d.radius;
            }
            cv.put(x, y, (head.intensity - spec.background) * phi(-sd / se) * (1.0 - 0.4 * dark));
            if (rho <= 1.0) {
                head_mask.set(x, y);
                if (in_vac) vac[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = 1;
            }
        }
    }
    paint_bar(cv, &mid_mask, mid_center, um, mid.length, mid.width, mid.intensity - spec.background, se);
    paint_curve(cv, &tail_mask, t.tail.samples, spec.tail, spec.tail.intensity - spec.background);
    if (spec.tail.junction_end) {
        paint_junction(cv, t.tail.samples.back(), true, *spec.tail.junction_end,
                       spec.tail.intensity - spec.background, se);
    }

    for (const auto& s : t.tail.samples) {
        if (s.s < 2.0 * mid.width) continue;
        const Vec2 q = s.position - head.center;
        const double hx = q.dot(u) / (a + 2.0);
        const double hy = q.dot(v) / (b + 2.0);
        const Vec2 m = s.position - mid_center;
        if (hx * hx + hy * hy <= 1.0 ||
            (std::abs(m.dot(um)) <= 0.5 * mid.length && std::abs(m.dot(um.perp())) <= 0.5 * mid.width + 2.0)) {
            throw InvalidArgument("tail overlaps the head or midpiece");
        }
    }

    InstancePartMask mask(w, h);
    const double split = -a + 2.0 * a * head.acrosome_fraction;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
            if (head_mask.test(x, y)) {
                PartLabel p = PartLabel::Nucleus;
                if (vac[i]) {
                    p = PartLabel::Vacuole;
                } else if ((Vec2{static_cast<double>(x), static_cast<double>(y)} - head.center).dot(u) < split) {
                    p = PartLabel::Acrosome;
                }
                mask.set(x, y, 1, p);
            } else if (mid_mask.test(x, y)) {
                mask.set(x, y, 1, PartLabel::Midpiece);
            } else if (tail_mask.test(x, y)) {
                mask.set(x, y, 1, PartLabel::Tail);
            }
        }
    }
    for (std::size_t i = 0; i < mask.parts().size(); ++i) {
        switch (mask.parts()[i]) {
            case PartLabel::Acrosome: ++t.acrosome_px; break;
            case PartLabel::Nucleus: ++t.nucleus_px; break;
            case PartLabel::Vacuole: ++t.vacuole_px; break;
            case PartLabel::Midpiece: ++t.midpiece_px; break;
            case PartLabel::Tail: ++t.tail_px; break;
            default: break;
        }
    }
    t.vacuole_count = static_cast<int>(connected_components(instance_part_mask(mask, 1, PartLabel::Vacuole)).size());
    t.head_length = 2.0 * a;
    t.head_width = 2.0 * b;
    t.ellipticity = a / b;
    t.head_angle_deg = fold_axis_angle(head.angle_deg);
    t.midpiece_length = mid.length;
    t.midpiece_width = mid.width;
    t.midpiece_angle_deg = fold_axis_angle(head.angle_deg + mid.angle_offset_deg);
    t.head_midpiece_angle_deg = axis_angle_between(t.head_angle_deg, t.midpiece_angle_deg);
    t.midpiece_center = mid_center;
    t.midpiece_end = mid_end;

    out.image = finish(cv, spec.background, spec.noise_sigma, spec.seed);
    out.mask = std::move(mask);
    return out;
}

PhantomSpec random_phantom_spec(std::uint64_t seed, std::size_t index, const PhantomRanges& rg) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::mt19937_64 rng(seq);
    auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

    PhantomSpec spec;
    spec.canvas_width = rg.canvas_width;
    spec.canvas_height = rg.canvas_height;
    spec.noise_sigma = rg.noise_sigma;
    spec.seed = rng();
    HeadSpec& head = spec.head;
    head.semi_major = uni(rg.head_a_min, rg.head_a_max);
    head.semi_minor = uni(rg.head_b_min, rg.head_b_max);
    head.angle_deg = uni(0.0, 360.0);
    spec.midpiece.length = uni(rg.mid_length_min, rg.mid_length_max);
    spec.midpiece.width = uni(rg.mid_width_min, rg.mid_width_max);
    spec.midpiece.angle_offset_deg = uni(-8.0, 8.0);

    const double tail_len = uni(rg.tail_length_min, rg.tail_length_max);
    const double ws = uni(std::max(rg.tail_width_min, 3.5), rg.tail_width_max);
    const double we = std::max(rg.tail_width_min, ws * uni(0.75, 1.0));
    const double rmin = std::min(rg.tail_radius_max, std::max(rg.tail_radius_min, tail_len / kPi));
    const double radius = uni(rmin, rg.tail_radius_max);
    const double turn = uni(0.0, 1.0) < 0.5 ? 1.0 : -1.0;

    const int nvac = static_cast<int>(std::floor(uni(0.0, rg.max_vacuoles + 1.0 - 1e-9)));
    for (int i = 0; i < nvac; ++i) {
        const double y = nvac == 1 ? uni(-0.3, 0.3) * head.semi_minor : (i == 0 ? -0.4 : 0.4) * head.semi_minor;
        head.vacuoles.push_back({{uni(-0.2, 0.3) * head.semi_major, y}, uni(2.0, 3.0)});
    }

    // Geometry relative to a head at the origin, shifted onto the canvas afterwards.
    const Vec2 u = direction(head.angle_deg);
    const Vec2 um = direction(head.angle_deg + spec.midpiece.angle_offset_deg);
    const Vec2 tail_start = u * head.semi_major + um * spec.midpiece.length;
    CurveSpec& tail = spec.tail;
    tail.kind = CurveKind::Arc;
    tail.radius = radius;
    tail.center = tail_start + um.perp() * (turn * radius);
    const Vec2 radial = (tail_start - tail.center) / radius;
    tail.start_angle_deg = rad2deg(std::atan2(radial.y, radial.x));
    tail.sweep_deg = turn * rad2deg(tail_len / radius);
    tail.width_start = ws;
    tail.width_end = we;
    tail.intensity = uni(0.6, 0.75);
    tail.background = spec.background;
    head.intensity = std::min(0.95, tail.intensity + 0.1);
    spec.midpiece.intensity = tail.intensity + 0.05;

    const auto smp = sample_curve(tail, 1.0);
    const double ext = head.semi_major + 2.0;
    double minx = -ext, maxx = ext, miny = -ext, maxy = ext;
    for (const auto& s : smp) {
        minx = std::min(minx, s.position.x);
        maxx = std::max(maxx, s.position.x);
        miny = std::min(miny, s.position.y);
        maxy = std::max(maxy, s.position.y);
    }
    const double margin = 16.0;
    const double lo_x = margin - minx, hi_x = rg.canvas_width - 1 - margin - maxx;
    const double lo_y = margin - miny, hi_y = rg.canvas_height - 1 - margin - maxy;
    if (hi_x < lo_x || hi_y < lo_y) throw InvalidArgument("phantom does not fit the canvas");
    const Vec2 shift{uni(lo_x, hi_x), uni(lo_y, hi_y)};
    head.center = shift;
    tail.center = tail.center + shift;
    return spec;
}

std::vector<Phantom> phantom_batch(std::uint64_t seed, std::size_t count, const PhantomRanges& ranges) {
    std::vector<Phantom> out(count);
    parallel_for(count, [&](std::size_t i) { out[i] = render_sperm_phantom(random_phantom_spec(seed, i, ranges)); });
    return out;
}

}  // namespace spermmorph
