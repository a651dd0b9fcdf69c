#include "spermmorph/steger.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spermmorph/error.hpp"
#include "spermmorph/parallel.hpp"

namespace spermmorph {

Vec2 canonical_normal(Vec2 n) {
    if (n.y < 0.0 || (n.y == 0.0 && n.x < 0.0)) return -n;
    return n;
}

std::optional<HessianNormal> try_hessian_normal(double rxx, double rxy, double ryy, double tolerance) {
    const double mean = 0.5 * (rxx + ryy);
    const double half_diff = 0.5 * (rxx - ryy);
    const double disc = std::hypot(half_diff, rxy);
    const double l1 = mean + disc;
    const double l2 = mean - disc;
    if (std::max(std::abs(l1), std::abs(l2)) < tolerance) return std::nullopt;
    // Ties go to the negative eigenvalue (bright-line polarity).
    const double lambda = std::abs(l1) > std::abs(l2) ? l1 : l2;
    const Vec2 va{rxy, lambda - rxx};
    const Vec2 vb{lambda - ryy, rxy};
    Vec2 v = va.norm() >= vb.norm() ? va : vb;
    v = v.norm() > 0.0 ? v.normalized() : Vec2{1.0, 0.0};
    return HessianNormal{canonical_normal(v), lambda};
}

HessianNormal hessian_normal(const DerivativeFields& fields, Pixel p) {
    if (!fields.interior(p.x, p.y)) {
        throw InvalidArgument("pixel (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                              ") is not in the field interior");
    }
    const auto hn = try_hessian_normal(fields.rxx.at(p.x, p.y), fields.rxy.at(p.x, p.y),
                                       fields.ryy.at(p.x, p.y));
    if (!hn) throw Error("no ridge direction");
    return *hn;
}

std::optional<CenterPoint> subpixel_center(const DerivativeFields& fields, Pixel p,
                                           double strength_threshold) {
    if (!fields.interior(p.x, p.y)) return std::nullopt;
    const double rxx = fields.rxx.at(p.x, p.y);
    const double rxy = fields.rxy.at(p.x, p.y);
    const double ryy = fields.ryy.at(p.x, p.y);
    const auto hn = try_hessian_normal(rxx, rxy, ryy);
    if (!hn || hn->eigenvalue >= -strength_threshold) return std::nullopt;
    const Vec2 n = hn->normal;
    const double denom = rxx * n.x * n.x + 2.0 * rxy * n.x * n.y + ryy * n.y * n.y;
    if (denom == 0.0) return std::nullopt;
    double t = -(fields.rx.at(p.x, p.y) * n.x + fields.ry.at(p.x, p.y) * n.y) / denom;
    double off = std::max(std::abs(t * n.x), std::abs(t * n.y));
    // Near a pixel border the Taylor offset overshoots from both sides; one
    // Newton step at the estimate settles which pixel owns the centre.
    if (off > 0.5 && off <= 0.75) {
        const Vec2 q = Vec2{static_cast<double>(p.x), static_cast<double>(p.y)} + n * t;
        const double d2 = fields.rxx.sample(q) * n.x * n.x + 2.0 * fields.rxy.sample(q) * n.x * n.y +
                          fields.ryy.sample(q) * n.y * n.y;
        if (d2 < 0.0) {
            t -= (fields.rx.sample(q) * n.x + fields.ry.sample(q) * n.y) / d2;
            off = std::max(std::abs(t * n.x), std::abs(t * n.y));
        }
    }
    if (off > 0.5) return std::nullopt;

    CenterPoint cp;
    cp.position = Vec2{static_cast<double>(p.x), static_cast<double>(p.y)} + n * t;
    cp.normal = n;
    cp.gradient = fields.gradient(cp.position);
    cp.second_dir_deriv = hn->eigenvalue;
    cp.pixel = p;
    return cp;
}

namespace {

bool canonical_less(const CenterPoint& a, const CenterPoint& b) {
    if (a.strength() != b.strength()) return a.strength() > b.strength();
    if (a.position.y != b.position.y) return a.position.y < b.position.y;
    if (a.position.x != b.position.x) return a.position.x < b.position.x;
    if (a.pixel.y != b.pixel.y) return a.pixel.y < b.pixel.y;
    return a.pixel.x < b.pixel.x;
}

/// Uniform bucket grid over point positions.
class PointGrid {
public:
    PointGrid(std::span<const CenterPoint> pts, double cell) : cell_(std::max(cell, 0.5)) {
        if (pts.empty()) return;
        min_x_ = max_x_ = pts[0].position.x;
        min_y_ = max_y_ = pts[0].position.y;
        for (const auto& p : pts) {
            min_x_ = std::min(min_x_, p.position.x);
            max_x_ = std::max(max_x_, p.position.x);
            min_y_ = std::min(min_y_, p.position.y);
            max_y_ = std::max(max_y_, p.position.y);
        }
        cols_ = static_cast<int>((max_x_ - min_x_) / cell_) + 1;
        rows_ = static_cast<int>((max_y_ - min_y_) / cell_) + 1;
        buckets_.resize(static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_));
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto [cx, cy] = cell_of(pts[i].position);
            buckets_[static_cast<std::size_t>(cy) * static_cast<std::size_t>(cols_) +
                     static_cast<std::size_t>(cx)]
                .push_back(i);
        }
    }

    /// Indices of points in cells overlapping the disc, in ascending order.
    void query(Vec2 c, double r, std::vector<std::size_t>& out) const {
        out.clear();
        if (buckets_.empty()) return;
        const int x0 = std::max(0, static_cast<int>(std::floor((c.x - r - min_x_) / cell_)));
        const int x1 = std::min(cols_ - 1, static_cast<int>(std::floor((c.x + r - min_x_) / cell_)));
        const int y0 = std::max(0, static_cast<int>(std::floor((c.y - r - min_y_) / cell_)));
        const int y1 = std::min(rows_ - 1, static_cast<int>(std::floor((c.y + r - min_y_) / cell_)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const auto& b = buckets_[static_cast<std::size_t>(y) * static_cast<std::size_t>(cols_) +
                                         static_cast<std::size_t>(x)];
                out.insert(out.end(), b.begin(), b.end());
            }
        }
        std::sort(out.begin(), out.end());
    }

private:
    [[nodiscard]] std::pair<int, int> cell_of(Vec2 p) const {
        return {std::clamp(static_cast<int>((p.x - min_x_) / cell_), 0, cols_ - 1),
                std::clamp(static_cast<int>((p.y - min_y_) / cell_), 0, rows_ - 1)};
    }

    double cell_;
    double min_x_ = 0.0, max_x_ = 0.0, min_y_ = 0.0, max_y_ = 0.0;
    int cols_ = 0;
    int rows_ = 0;
    std::vector<std::vector<std::size_t>> buckets_;
};

}  // namespace

std::vector<CenterPoint> detect_center_points(const DerivativeFields& fields,
                                              double strength_threshold, const BinaryMask* gate,
                                              double dedup_radius) {
    if (gate && (gate->width() != fields.width() || gate->height() != fields.height())) {
        throw InvalidArgument("gate mask does not match the field dimensions");
    }
    const int h = fields.height();
    const int w = fields.width();
    std::vector<std::vector<CenterPoint>> rows(static_cast<std::size_t>(h));
    parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < w; ++x) {
            if (gate && !gate->test(x, y)) continue;
            // Cheap rejection: the smaller eigenvalue must already be below -threshold.
            const double rxx = fields.rxx.at(x, y);
            const double ryy = fields.ryy.at(x, y);
            const double rxy = fields.rxy.at(x, y);
            const double hd = 0.5 * (rxx - ryy);
            if (0.5 * (rxx + ryy) - std::sqrt(hd * hd + rxy * rxy) >= -strength_threshold) continue;
            if (auto cp = subpixel_center(fields, {x, y}, strength_threshold)) {
                rows[row].push_back(*cp);
            }
        }
    });
    std::vector<CenterPoint> all;
    for (auto& r : rows) all.insert(all.end(), r.begin(), r.end());
    std::sort(all.begin(), all.end(), canonical_less);
    if (dedup_radius <= 0.0 || all.empty()) return all;

    PointGrid grid(all, 1.0);
    std::vector<std::uint8_t> dropped(all.size(), 0);
    std::vector<std::size_t> near;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (dropped[i]) continue;
        grid.query(all[i].position, dedup_radius, near);
        for (std::size_t j : near) {
            if (j > i && !dropped[j] && distance(all[i].position, all[j].position) < dedup_radius) {
                dropped[j] = 1;
            }
        }
    }
    std::vector<CenterPoint> kept;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (!dropped[i]) kept.push_back(all[i]);
    }
    return kept;
}

LinkParams link_params(const StegerParams& p) {
    return {p.link_radius, p.link_max_angle_deg, p.link_gamma, p.min_points};
}

namespace {

double normal_angle(Vec2 a, Vec2 b) { return std::acos(std::min(1.0, std::abs(a.dot(b)))); }

Vec2 oriented_tangent(const CenterPoint& p, Vec2 reference) {
    const Vec2 t = p.normal.perp();
    return t.dot(reference) >= 0.0 ? t : -t;
}

}  // namespace

std::vector<Centerline> link_centerlines(std::span<const CenterPoint> input, const LinkParams& params,
                                         const BinaryMask* mask) {
    std::vector<CenterPoint> pts;
    pts.reserve(input.size());
    for (const auto& p : input) {
        if (!mask || mask->test(p.pixel)) pts.push_back(p);
    }
    std::sort(pts.begin(), pts.end(), canonical_less);
    if (pts.empty()) return {};

    const double max_angle = deg2rad(params.max_angle_deg);
    PointGrid grid(pts, params.radius);
    std::vector<std::uint8_t> used(pts.size(), 0);
    std::vector<std::size_t> near;

    auto grow = [&](std::size_t start, Vec2 dir) {
        std::vector<std::size_t> chain;
        std::size_t cur = start;
        for (;;) {
            const Vec2 here = pts[cur].position;
            grid.query(here, params.radius, near);
            std::size_t best = pts.size();
            double best_cost = 0.0;
            double best_progress = 0.0;
            for (std::size_t j : near) {
                if (used[j]) continue;
                const Vec2 delta = pts[j].position - here;
                const double dist = delta.norm();
                const double progress = delta.dot(dir);
                if (dist > params.radius || progress <= 0.0) continue;
                const double dtheta = normal_angle(pts[cur].normal, pts[j].normal);
                if (dtheta > max_angle) continue;
                const double cost = dist + params.gamma * dtheta;
                if (best == pts.size() || cost < best_cost) {
                    best = j;
                    best_cost = cost;
                    best_progress = progress;
                }
            }
            if (best == pts.size()) break;
            used[best] = 1;
            // Parallel responses we stepped over belong to the same line.
            for (std::size_t j : near) {
                if (used[j]) continue;
                const Vec2 delta = pts[j].position - here;
                const double progress = delta.dot(dir);
                if (progress > 0.0 && progress <= best_progress && std::abs(delta.cross(dir)) <= 1.0 &&
                    delta.norm() <= params.radius) {
                    used[j] = 1;
                }
            }
            chain.push_back(best);
            dir = oriented_tangent(pts[best], dir);
            cur = best;
        }
        return chain;
    };

    std::vector<Centerline> lines;
    for (std::size_t seed = 0; seed < pts.size(); ++seed) {
        if (used[seed]) continue;
        used[seed] = 1;
        const Vec2 t = pts[seed].normal.perp();
        const auto forward = grow(seed, t);
        const auto backward = grow(seed, -t);
        if (static_cast<int>(forward.size() + backward.size() + 1) < params.min_points) continue;
        Centerline line;
        line.points.reserve(forward.size() + backward.size() + 1);
        for (auto it = backward.rbegin(); it != backward.rend(); ++it) line.points.push_back(pts[*it]);
        line.points.push_back(pts[seed]);
        for (std::size_t i : forward) line.points.push_back(pts[i]);
        lines.push_back(std::move(line));
    }
    std::stable_sort(lines.begin(), lines.end(), [](const Centerline& a, const Centerline& b) {
        return a.points.size() > b.points.size();
    });
    return lines;
}

namespace {

struct SideEdge {
    double offset;
    Vec2 point;
};

std::optional<SideEdge> first_edge(const DerivativeFields& fields, Vec2 origin, Vec2 dir,
                                   double max_halfwidth, double threshold) {
    constexpr double kStep = 0.25;
    const int n = static_cast<int>(std::floor(max_halfwidth / kStep + 1e-9));
    if (n < 2) return std::nullopt;
    std::vector<double> mag(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        mag[static_cast<std::size_t>(k)] = fields.gradient_cubic(origin + dir * (k * kStep)).norm();
    }
    for (int k = 1; k < n; ++k) {
        const double prev = mag[static_cast<std::size_t>(k - 1)];
        const double here = mag[static_cast<std::size_t>(k)];
        const double next = mag[static_cast<std::size_t>(k + 1)];
        if (here >= prev && here > next && here >= threshold) {
            const double curv = prev - 2.0 * here + next;
            const double shift = curv < 0.0 ? 0.5 * (prev - next) / curv : 0.0;
            const double s = (k + std::clamp(shift, -0.5, 0.5)) * kStep;
            return SideEdge{s, origin + dir * s};
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<EdgePair> edge_pair(const DerivativeFields& fields, const CenterPoint& cp,
                                  double max_halfwidth, double edge_threshold) {
    const auto plus = first_edge(fields, cp.position, cp.normal, max_halfwidth, edge_threshold);
    if (!plus) return std::nullopt;
    const auto minus = first_edge(fields, cp.position, -cp.normal, max_halfwidth, edge_threshold);
    if (!minus) return std::nullopt;
    EdgePair e;
    e.e1 = plus->point;
    e.e2 = minus->point;
    e.g1 = fields.gradient_cubic(e.e1);
    e.g2 = fields.gradient_cubic(e.e2);
    e.d1 = plus->offset;
    e.d2 = minus->offset;
    return e;
}

double bar_edge_offset(double halfwidth, double sigma) {
    if (halfwidth <= 0.0) return sigma;
    // Maximum of g(x - w) - g(x + w) over x >= 0: root of its derivative.
    auto slope = [&](double x) {
        return gaussian_derivative(x - halfwidth, sigma, 1) - gaussian_derivative(x + halfwidth, sigma, 1);
    };
    double lo = 0.0;
    double hi = halfwidth + 6.0 * sigma;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double unbias_halfwidth(double measured, double sigma, WidthProfile profile) {
    switch (profile) {
        case WidthProfile::None: return measured;
        case WidthProfile::Gaussian: return std::sqrt(std::max(0.0, measured * measured - sigma * sigma));
        case WidthProfile::Bar: {
            if (measured <= sigma) return 0.0;
            // bar_edge_offset is increasing in the half-width and >= it.
            double lo = 0.0;
            double hi = measured;
            while (hi - lo > 1e-9) {
                const double mid = 0.5 * (lo + hi);
                (bar_edge_offset(mid, sigma) < measured ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
    }
    return measured;
}

void measure_widths(Centerline& line, const DerivativeFields& fields, const StegerParams& params) {
    const double sigma = fields.spec.sigma();
    for (auto& cp : line.points) {
        cp.edges = edge_pair(fields, cp, params.max_halfwidth, params.edge_threshold);
        if (cp.edges) {
            cp.width = unbias_halfwidth(cp.edges->d1, sigma, params.width_profile) +
                       unbias_halfwidth(cp.edges->d2, sigma, params.width_profile);
        } else {
            cp.width.reset();
        }
    }
}

}  // namespace spermmorph
