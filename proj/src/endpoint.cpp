#include "spermmorph/endpoint.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spermmorph/error.hpp"

namespace spermmorph {

double cos_alpha(Vec2 g1, Vec2 g2) {
    const double n1 = g1.norm();
    const double n2 = g2.norm();
    if (n1 == 0.0 || n2 == 0.0) throw Error("undefined angle");
    return std::clamp(g1.dot(g2) / (n1 * n2), -1.0, 1.0);
}

namespace {

EndpointVerdict examine(const CenterPoint& p, const DerivativeFields& fields,
                        const MeasurementConfig& cfg) {
    EndpointVerdict v{p, std::nullopt, false};
    const auto edges =
        edge_pair(fields, p, cfg.steger.max_halfwidth, cfg.steger.edge_threshold);
    if (!edges || edges->g1.norm() == 0.0 || edges->g2.norm() == 0.0) return v;
    v.cos_alpha = cos_alpha(edges->g1, edges->g2);
    v.kept = std::abs(*v.cos_alpha) >= cfg.endpoint.cos_threshold;
    return v;
}

}  // namespace

FilterResult filter_endpoints(const Centerline& line, const DerivativeFields& fields,
                              const MeasurementConfig& cfg) {
    const auto& pts = line.points;
    if (static_cast<int>(pts.size()) < cfg.steger.min_points) {
        throw InvalidArgument("centerline has " + std::to_string(pts.size()) +
                              " points, fewer than min_points = " +
                              std::to_string(cfg.steger.min_points));
    }
    FilterResult out;
    std::size_t first = pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        out.head_verdicts.push_back(examine(pts[i], fields, cfg));
        if (out.head_verdicts.back().kept) {
            first = i;
            break;
        }
    }
    if (first == pts.size()) throw Error("no valid center points");
    std::size_t last = first;
    for (std::size_t j = pts.size(); j-- > first;) {
        out.tip_verdicts.push_back(examine(pts[j], fields, cfg));
        if (out.tip_verdicts.back().kept) {
            last = j;
            break;
        }
    }
    out.line.instance = line.instance;
    out.line.closed = line.closed;
    out.line.points.assign(pts.begin() + static_cast<std::ptrdiff_t>(first),
                           pts.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    return out;
}

std::array<Pixel, 2> candidate_pixels(Pixel c, double angle_deg) {
    if (!std::isfinite(angle_deg)) throw InvalidArgument("gradient angle must be finite");
    double a = std::fmod(angle_deg, 360.0);
    if (a < 0.0) a += 360.0;
    int sector = static_cast<int>(std::floor(a / 45.0)) % 8;
    // Odd sectors are open at both ends: their boundaries belong to the even
    // neighbours, [0, 45] in particular.
    if (sector % 2 == 1 && a == sector * 45.0) sector -= 1;
    static constexpr Pixel kDiagonal[8] = {{1, 1}, {1, 1}, {-1, 1}, {-1, 1},
                                           {-1, -1}, {-1, -1}, {1, -1}, {1, -1}};
    static constexpr Pixel kAxis[8] = {{1, 0}, {0, 1}, {0, 1}, {-1, 0},
                                       {-1, 0}, {0, -1}, {0, -1}, {1, 0}};
    const Pixel d = kDiagonal[sector];
    const Pixel ax = kAxis[sector];
    return {Pixel{c.x + d.x, c.y + d.y}, Pixel{c.x + ax.x, c.y + ax.y}};
}

Vec2 momentum_update(double alpha, Vec2 g_current, Vec2 g_next) {
    return g_current * alpha + g_next * (1.0 - alpha);
}

namespace {

constexpr double kStartMinCos = 0.7071067811865476;  // cos 45 deg

Vec2 to_vec(Pixel p) { return {static_cast<double>(p.x), static_cast<double>(p.y)}; }

bool in_fields(const DerivativeFields& f, Pixel p) {
    return p.x >= 0 && p.y >= 0 && p.x < f.width() && p.y < f.height();
}

// Gradient with its component along the local Hessian normal removed; a centre
// point's gradient has none. Falls back to the Hessian tangent when nothing is
// left and to the raw gradient where the Hessian has no direction.
Vec2 along_line_gradient(const DerivativeFields& f, Pixel p) {
    const Vec2 g = f.gradient(p.x, p.y);
    const auto h = try_hessian_normal(f.rxx.at(p.x, p.y), f.rxy.at(p.x, p.y), f.ryy.at(p.x, p.y));
    if (!h) return g;
    const Vec2 t = h->normal.perp();
    const double along = g.dot(t);
    return along == 0.0 ? t : t * along;
}

double ray_distance(Vec2 origin, Vec2 dir_unit, Vec2 p) {
    const Vec2 rel = p - origin;
    return rel.dot(dir_unit) >= 0.0 ? std::abs(rel.cross(dir_unit)) : rel.norm();
}

}  // namespace

Reconstruction reconstruct_endpoint(const Centerline& line, LineEnd end,
                                    const DerivativeFields& fields, const BinaryMask& tail_mask,
                                    const MeasurementConfig& cfg) {
    const auto& pts = line.points;
    if (pts.empty()) throw InvalidArgument("cannot reconstruct the end of an empty centerline");
    if (!tail_mask.any()) throw InvalidArgument("tail mask is empty");

    const std::size_t n = pts.size();
    const bool head = end == LineEnd::Head;
    const CenterPoint& last = head ? pts.front() : pts.back();
    const std::size_t k = std::min<std::size_t>(3, n - 1);
    Vec2 outward = last.normal.perp();
    if (k > 0) {
        const Vec2 inner = head ? pts[k].position : pts[n - 1 - k].position;
        if (distance(last.position, inner) > 0.0) outward = (last.position - inner).normalized();
    }

    Reconstruction out;
    // The gradient of a centre point has no component along its normal; keep
    // only the along-line part, which an intersecting edge cannot tilt.
    const Vec2 tangent = last.normal.perp();
    Vec2 g = tangent * fields.gradient(last.position).dot(tangent);
    if (g.dot(outward) < 0.0) g = -g;
    // A gradient far off the line direction means the intensity hardly changes
    // along the line here, so it carries no direction.
    if (g.norm() == 0.0 || g.normalized().dot(outward) < kStartMinCos) {
        g = outward;
        out.fallback_direction = true;
    }
    g = g.normalized();

    const double alpha = cfg.endpoint.momentum_alpha;
    Pixel cur{static_cast<int>(std::lround(last.position.x)),
              static_cast<int>(std::lround(last.position.y))};
    for (int step = 0; step < cfg.endpoint.max_steps; ++step) {
        const Vec2 dir = g.normalized();
        const auto pixels = candidate_pixels(cur, rad2deg(std::atan2(dir.y, dir.x)));
        WalkStep record{step, cur, g, {}, 0};
        std::array<Vec2, 2> aligned{};
        for (std::size_t i = 0; i < 2; ++i) {
            WalkCandidate& c = record.candidates[i];
            c.pixel = pixels[i];
            c.distance = ray_distance(to_vec(cur), dir, to_vec(c.pixel));
            Vec2 gc = in_fields(fields, c.pixel) ? along_line_gradient(fields, c.pixel) : Vec2{};
            if (gc.dot(dir) < 0.0) gc = -gc;
            aligned[i] = gc;
            c.beta = gc.norm() > 0.0 ? std::acos(std::clamp(gc.normalized().dot(dir), -1.0, 1.0)) : 0.0;
            c.score = cfg.endpoint.w1 * c.distance + cfg.endpoint.w2 * c.beta;
            c.inside = tail_mask.test(c.pixel);
        }
        record.selected = record.candidates[1].score < record.candidates[0].score ? 1 : 0;
        out.trace.push_back(record);
        const auto sel = static_cast<std::size_t>(record.selected);
        const Pixel next = record.candidates[sel].pixel;
        if (!record.candidates[sel].inside) return out;

        const Vec2 g_next = aligned[sel].norm() > 0.0 ? aligned[sel].normalized() : dir;
        g = momentum_update(alpha, g, g_next);
        if (g.norm() == 0.0) g = g_next;

        CenterPoint cp;
        cp.position = to_vec(next);
        cp.normal = canonical_normal(g.perp().normalized());
        cp.gradient = fields.gradient(next.x, next.y);
        const Vec2 nn = cp.normal;
        cp.second_dir_deriv = fields.rxx.at(next.x, next.y) * nn.x * nn.x +
                              2.0 * fields.rxy.at(next.x, next.y) * nn.x * nn.y +
                              fields.ryy.at(next.x, next.y) * nn.y * nn.y;
        cp.pixel = next;
        cp.source = PointSource::Reconstructed;
        out.points.push_back(cp);
        out.momenta.push_back(g);
        cur = next;
    }
    out.terminated = false;
    return out;
}

void attach_reconstruction(Centerline& line, const Reconstruction& head, const Reconstruction& tip) {
    std::vector<CenterPoint> pts;
    pts.reserve(line.points.size() + head.points.size() + tip.points.size());
    pts.insert(pts.end(), head.points.rbegin(), head.points.rend());
    pts.insert(pts.end(), line.points.begin(), line.points.end());
    pts.insert(pts.end(), tip.points.begin(), tip.points.end());
    line.points = std::move(pts);
}

}  // namespace spermmorph
