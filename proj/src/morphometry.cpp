#include "spermmorph/morphometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "spermmorph/error.hpp"

namespace spermmorph {

double polyline_length_px(const Centerline& line) {
    double len = 0.0;
    for (std::size_t i = 1; i < line.points.size(); ++i) {
        len += distance(line.points[i].position, line.points[i - 1].position);
    }
    return len;
}

double tail_length(const Centerline& line, const PixelScale& scale) {
    if (line.points.size() < 2) throw InvalidArgument("tail length needs at least 2 points");
    return scale.length(polyline_length_px(line));
}

double tail_width(const Centerline& line) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& p : line.points) {
        if (p.width) {
            sum += *p.width;
            ++n;
        }
    }
    if (n == 0) throw Error("no centerline point has a valid edge pair");
    return sum / static_cast<double>(n);
}

CurvatureProfile tail_curvature(const Centerline& line, double window_px) {
    const auto& pts = line.points;
    const std::size_t n = pts.size();
    if (n < 3) throw InvalidArgument("curvature needs at least 3 points");
    if (!(window_px > 0.0)) throw InvalidArgument("curvature window must be > 0");

    std::vector<double> s(n, 0.0);
    std::vector<double> theta(n, 0.0);
    theta[0] = std::atan2(pts[0].normal.y, pts[0].normal.x);
    for (std::size_t i = 1; i < n; ++i) {
        s[i] = s[i - 1] + distance(pts[i].position, pts[i - 1].position);
        double d = std::atan2(pts[i].normal.y, pts[i].normal.x) - theta[i - 1];
        // Normals are undirected: unwrap modulo pi.
        d = std::remainder(d, kPi);
        theta[i] = theta[i - 1] + d;
    }
    if (s.back() == 0.0) throw Error("degenerate centerline: all points coincide");

    CurvatureProfile out;
    out.curvature.resize(n);
    const double half = 0.5 * window_px;
    std::size_t lo = 0;
    std::size_t hi = 0;
    std::vector<double> rotation(n);
    std::vector<std::pair<std::size_t, std::size_t>> span(n);
    for (std::size_t i = 0; i < n; ++i) {
        while (s[lo] < s[i] - half) ++lo;
        while (hi + 1 < n && s[hi + 1] <= s[i] + half) ++hi;
        std::size_t j = lo;
        std::size_t k = std::max(hi, i);
        if (k == j) {
            j = i > 0 ? i - 1 : i;
            k = std::min(n - 1, i + 1);
        }
        const double ds = s[k] - s[j];
        const double dtheta = theta[k] - theta[j];
        out.curvature[i] = ds > 0.0 ? dtheta / ds : 0.0;
        rotation[i] = rad2deg(std::abs(dtheta));
        span[i] = {j, k};
    }
    // Summaries prefer windows made of detected points only and lying fully on
    // the line. Walked points carry no Hessian normal and truncated windows are
    // biased by the line terminations. Falls back to complete windows, then to
    // all points.
    std::vector<std::size_t> walked(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        walked[i + 1] = walked[i] + (pts[i].source == PointSource::Reconstructed ? 1 : 0);
    }
    const double len = s.back();
    auto complete = [&](std::size_t i) { return s[i] - half >= 0.0 && s[i] + half <= len; };
    auto detected_only = [&](std::size_t i) { return walked[span[i].second + 1] == walked[span[i].first]; };
    std::size_t used = 0;
    double abs_sum = 0.0;
    for (int level = 2; level >= 0 && used == 0; --level) {
        for (std::size_t i = 0; i < n; ++i) {
            if (level >= 1 && !complete(i)) continue;
            if (level == 2 && !detected_only(i)) continue;
            abs_sum += std::abs(out.curvature[i]);
            out.angle_max_deg = std::max(out.angle_max_deg, rotation[i]);
            ++used;
        }
    }
    out.mean_abs_curvature = abs_sum / static_cast<double>(used);
    return out;
}

std::optional<EllipseFit> fit_ellipse(const BinaryMask& mask, const PixelScale& scale) {
    const auto pts = boundary_points(mask);
    if (pts.size() < 6) return std::nullopt;
    const auto conic = fit_ellipse_conic(pts);
    if (!conic) return std::nullopt;
    const auto e = conic_to_ellipse(*conic);
    if (!e || !(e->semi_minor > 0.0)) return std::nullopt;
    EllipseFit fit;
    fit.ellipse = *e;
    fit.length_um = scale.length(2.0 * e->semi_major);
    fit.width_um = scale.length(2.0 * e->semi_minor);
    fit.ellipticity = fit.length_um / fit.width_um;
    fit.major_axis_angle_deg = e->angle_deg;
    return fit;
}

RectangleFit fit_rectangle(const BinaryMask& mask, const PixelScale& scale) {
    const std::size_t area = mask.count();
    if (area == 0) throw InvalidArgument("cannot fit a rectangle to an empty mask");
    RectangleFit fit;
    if (area == 1) {
        for (int y = 0; y < mask.height(); ++y) {
            for (int x = 0; x < mask.width(); ++x) {
                if (mask.test(x, y)) fit.rect.center = {static_cast<double>(x), static_cast<double>(y)};
            }
        }
        fit.degenerate = true;
        return fit;
    }
    fit.rect = min_area_rect(boundary_points(mask));
    fit.length_um = scale.length(fit.rect.length);
    fit.width_um = scale.length(fit.rect.width);
    fit.angle_deg = fit.rect.angle_deg;
    fit.degenerate = !(fit.rect.width > 0.0);
    return fit;
}

double head_midpiece_angle(double head_major_angle_deg, double midpiece_major_angle_deg) {
    if (!std::isfinite(head_major_angle_deg) || !std::isfinite(midpiece_major_angle_deg)) {
        throw InvalidArgument("axis angles must be finite");
    }
    return axis_angle_between(head_major_angle_deg, midpiece_major_angle_deg);
}

PartAreas part_areas(const InstancePartMask& mask, InstanceId instance, const PixelScale& scale) {
    if (!mask.has_instance(instance)) {
        throw InvalidArgument("unknown instance ID " + std::to_string(instance));
    }
    std::array<std::size_t, kPartLabelCount> counts{};
    const auto parts = mask.parts();
    const auto ids = mask.instances();
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (ids[i] == instance) ++counts[static_cast<std::size_t>(parts[i])];
    }
    PartAreas out;
    for (PartLabel p : kForegroundParts) {
        out.area_um2[p] = scale.area(static_cast<double>(counts[static_cast<std::size_t>(p)]));
    }
    const auto vac = instance_part_mask(mask, instance, PartLabel::Vacuole);
    out.vacuole.count = static_cast<int>(connected_components(vac).size());
    if (out.vacuole.count > 0) out.vacuole.area_um2 = out.area_um2[PartLabel::Vacuole];
    return out;
}

std::string_view to_string(QualityFlag f) {
    switch (f) {
        case QualityFlag::MissingPart: return "missing_part";
        case QualityFlag::FragmentedTail: return "fragmented_tail";
        case QualityFlag::NonterminatingWalk: return "nonterminating_walk";
        case QualityFlag::FitDegenerate: return "fit_degenerate";
        case QualityFlag::MidpieceAngleFallback: return "midpiece_angle_fallback";
    }
    return "unknown";
}

ImageContext prepare_image(const ScalarImage& img, const MeasurementConfig& cfg) {
    ImageContext ctx;
    ctx.image = cfg.steger.dark_lines ? img.inverted() : img;
    ctx.fields = derivative_fields(ctx.image, cfg.gaussian);
    return ctx;
}

namespace {

std::size_t points_inside(const Centerline& line, const BinaryMask& mask) {
    return static_cast<std::size_t>(std::count_if(line.points.begin(), line.points.end(),
                                                  [&](const CenterPoint& p) { return mask.test(p.pixel); }));
}

std::optional<Centerline> longest_line(const DerivativeFields& fields, const BinaryMask& gate,
                                       const MeasurementConfig& cfg) {
    const auto candidates = detect_center_points(fields, cfg.steger.strength_threshold, &gate,
                                                 cfg.steger.dedup_radius);
    auto lines = link_centerlines(candidates, link_params(cfg.steger));
    if (lines.empty()) return std::nullopt;
    return std::move(lines.front());
}

}  // namespace

TailTrace trace_tail(const DerivativeFields& fields, const BinaryMask& tail_mask,
                     const MeasurementConfig& cfg, std::optional<Vec2> head_anchor) {
    TailTrace out;
    const BinaryMask gate = dilate(tail_mask, cfg.steger.mask_margin);
    if (cfg.steger_baseline) {
        const auto candidates =
            detect_center_points(fields, cfg.steger.strength_threshold, nullptr, cfg.steger.dedup_radius);
        auto lines = link_centerlines(candidates, link_params(cfg.steger));
        std::size_t best_inside = 0;
        for (auto& l : lines) {
            const std::size_t inside = points_inside(l, gate);
            if (inside > best_inside) {
                best_inside = inside;
                out.line = std::move(l);
            }
        }
    } else {
        out.line = longest_line(fields, gate, cfg);
    }
    if (!out.line) return out;

    Centerline& line = *out.line;
    if (head_anchor && distance(line.points.front().position, *head_anchor) >
                           distance(line.points.back().position, *head_anchor)) {
        std::reverse(line.points.begin(), line.points.end());
    }

    if (!cfg.steger_baseline) {
        // End points in the gate margin belong to whatever the tail runs into.
        auto outside = [&](const CenterPoint& p) {
            return !tail_mask.test(static_cast<int>(std::lround(p.position.x)),
                                   static_cast<int>(std::lround(p.position.y)));
        };
        auto& pts = line.points;
        std::size_t first = 0;
        std::size_t last = pts.size();
        while (first < last && outside(pts[first])) ++first;
        while (last > first && outside(pts[last - 1])) --last;
        if (first < last) {
            out.outside_head = first;
            out.outside_tip = pts.size() - last;
            pts = std::vector<CenterPoint>(pts.begin() + static_cast<std::ptrdiff_t>(first),
                                           pts.begin() + static_cast<std::ptrdiff_t>(last));
        }
        try {
            out.filter = filter_endpoints(line, fields, cfg);
            line = out.filter->line;
        } catch (const InvalidArgument&) {
            out.filter_failed = true;
        } catch (const Error&) {
            out.filter_failed = true;
        }
        if (tail_mask.any()) {
            out.head_walk = reconstruct_endpoint(line, LineEnd::Head, fields, tail_mask, cfg);
            out.tip_walk = reconstruct_endpoint(line, LineEnd::Tip, fields, tail_mask, cfg);
            attach_reconstruction(line, *out.head_walk, *out.tip_walk);
        }
    }
    measure_widths(line, fields, cfg.steger);
    return out;
}

MorphReport measure_sperm(const ScalarImage& img, const InstancePartMask& mask, InstanceId instance,
                          const MeasurementConfig& cfg, MeasurementDetail* detail) {
    if (img.width() != mask.width() || img.height() != mask.height()) {
        throw InvalidArgument("image and mask dimensions differ");
    }
    if (!mask.has_instance(instance)) {
        throw InvalidArgument("unknown instance ID " + std::to_string(instance));
    }
    return measure_sperm(prepare_image(img, cfg), mask, instance, cfg, detail);
}

MorphReport measure_sperm(const ImageContext& ctx, const InstancePartMask& mask, InstanceId instance,
                          const MeasurementConfig& cfg, MeasurementDetail* detail) {
    if (ctx.image.width() != mask.width() || ctx.image.height() != mask.height()) {
        throw InvalidArgument("image and mask dimensions differ");
    }
    if (!mask.has_instance(instance)) {
        throw InvalidArgument("unknown instance ID " + std::to_string(instance));
    }
    cfg.validate();
    const PixelScale& scale = cfg.scale;
    MorphReport r;
    r.instance = instance;

    static constexpr PartLabel kHeadParts[] = {PartLabel::Acrosome, PartLabel::Nucleus,
                                               PartLabel::Vacuole};
    const BinaryMask head_mask = instance_parts_mask(mask, instance, kHeadParts);
    std::optional<EllipseFit> head_fit;
    if (!head_mask.any()) {
        r.flags.insert(QualityFlag::MissingPart);
    } else {
        head_fit = fit_ellipse(head_mask, scale);
        if (head_fit) {
            r.head = HeadMeasures{head_fit->length_um, head_fit->width_um, head_fit->ellipticity};
        } else {
            r.flags.insert(QualityFlag::FitDegenerate);
        }
    }

    const PartAreas areas = part_areas(mask, instance, scale);
    r.acrosome_area_um2 = areas.area_um2.at(PartLabel::Acrosome);
    r.nucleus_area_um2 = areas.area_um2.at(PartLabel::Nucleus);
    r.vacuole = areas.vacuole;

    const BinaryMask mid_mask = instance_part_mask(mask, instance, PartLabel::Midpiece);
    std::optional<RectangleFit> mid_fit;
    if (!mid_mask.any()) {
        r.flags.insert(QualityFlag::MissingPart);
    } else {
        mid_fit = fit_rectangle(mid_mask, scale);
        if (mid_fit->degenerate) {
            r.flags.insert(QualityFlag::FitDegenerate);
            mid_fit.reset();
        }
    }
    if (head_fit && mid_fit) {
        r.head_midpiece_angle_deg = head_midpiece_angle(head_fit->major_axis_angle_deg, mid_fit->angle_deg);
    }
    if (mid_fit) {
        double angle_max = 0.0;
        const BinaryMask gate = dilate(mid_mask, cfg.steger.mask_margin);
        auto mid_line = longest_line(ctx.fields, gate, cfg);
        if (mid_line && mid_line->points.size() >= 3) {
            angle_max = tail_curvature(*mid_line, cfg.curvature_window).angle_max_deg;
        } else {
            r.flags.insert(QualityFlag::MidpieceAngleFallback);
            if (head_fit) angle_max = axis_angle_between(mid_fit->angle_deg, head_fit->major_axis_angle_deg);
        }
        r.midpiece = SegmentMeasures{mid_fit->length_um, mid_fit->width_um, angle_max};
        if (detail) detail->midpiece_line = std::move(mid_line);
    }

    const BinaryMask tail_mask = instance_part_mask(mask, instance, PartLabel::Tail);
    if (!tail_mask.any()) {
        r.flags.insert(QualityFlag::MissingPart);
    } else {
        if (connected_components(tail_mask).size() > 1) r.flags.insert(QualityFlag::FragmentedTail);
        std::optional<Vec2> anchor;
        if (mid_fit) {
            anchor = mid_fit->rect.center;
        } else if (head_fit) {
            anchor = head_fit->ellipse.center;
        }
        TailTrace trace = trace_tail(ctx.fields, tail_mask, cfg, anchor);
        if (trace.filter_failed) r.flags.insert(QualityFlag::FitDegenerate);
        if ((trace.head_walk && !trace.head_walk->terminated) ||
            (trace.tip_walk && !trace.tip_walk->terminated)) {
            r.flags.insert(QualityFlag::NonterminatingWalk);
        }
        if (!trace.line || trace.line->points.size() < 3) {
            r.flags.insert(QualityFlag::FitDegenerate);
        } else {
            const Centerline& line = *trace.line;
            try {
                const double length = tail_length(line, scale);
                const double width = scale.length(tail_width(line));
                const auto curv = tail_curvature(line, cfg.curvature_window);
                r.tail = SegmentMeasures{length, width, curv.angle_max_deg};
                r.tail_mean_curvature_per_um = curv.mean_abs_curvature / scale.microns_per_pixel();
            } catch (const Error&) {
                r.flags.insert(QualityFlag::FitDegenerate);
            }
        }
        if (detail) {
            detail->tail_line = std::move(trace.line);
            detail->filter = std::move(trace.filter);
            detail->head_walk = std::move(trace.head_walk);
            detail->tip_walk = std::move(trace.tip_walk);
        }
    }
    if (detail) {
        detail->head_fit = head_fit;
        detail->midpiece_fit = mid_fit;
    }
    return r;
}

double round_half_up_2(double v) {
    if (v < 0.0) return -round_half_up_2(-v);
    return std::floor(v * 100.0 + 0.5 + 1e-9) / 100.0;
}

std::string format_2dp(double v) {
    char buf[64];
    double r = round_half_up_2(v);
    if (r == 0.0) r = 0.0;  // no "-0.00"
    std::snprintf(buf, sizeof buf, "%.2f", r);
    return buf;
}

}  // namespace spermmorph
