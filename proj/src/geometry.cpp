#include "spermmorph/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace spermmorph {

std::vector<Vec2> boundary_points(const BinaryMask& mask) {
    std::vector<Vec2> out;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.test(x, y)) continue;
            if (!mask.test(x - 1, y)) out.push_back({x - 0.5, static_cast<double>(y)});
            if (!mask.test(x + 1, y)) out.push_back({x + 0.5, static_cast<double>(y)});
            if (!mask.test(x, y - 1)) out.push_back({static_cast<double>(x), y - 0.5});
            if (!mask.test(x, y + 1)) out.push_back({static_cast<double>(x), y + 0.5});
        }
    }
    return out;
}

double fold_axis_angle(double deg) {
    double a = std::fmod(deg, 180.0);
    if (a < 0.0) a += 180.0;
    if (a >= 180.0) a -= 180.0;
    return a;
}

double axis_angle_between(double a_deg, double b_deg) {
    const double d = std::abs(fold_axis_angle(a_deg) - fold_axis_angle(b_deg));
    return std::min(d, 180.0 - d);
}

std::optional<EllipseParams> conic_to_ellipse(const Conic& q) {
    const double det = 4.0 * q.a * q.c - q.b * q.b;
    if (!(det > 0.0)) return std::nullopt;
    const double x0 = (q.b * q.e - 2.0 * q.c * q.d) / det;
    const double y0 = (q.b * q.d - 2.0 * q.a * q.e) / det;
    const double f0 = q.a * x0 * x0 + q.b * x0 * y0 + q.c * y0 * y0 + q.d * x0 + q.e * y0 + q.f;
    Eigen::Matrix2d m;
    m << q.a, 0.5 * q.b, 0.5 * q.b, q.c;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
    const auto& ev = es.eigenvalues();
    const double s0 = -f0 / ev(0);
    const double s1 = -f0 / ev(1);
    if (!(s0 > 0.0) || !(s1 > 0.0)) return std::nullopt;
    const double r0 = std::sqrt(s0);
    const double r1 = std::sqrt(s1);
    const int major = r0 >= r1 ? 0 : 1;
    const Eigen::Vector2d dir = es.eigenvectors().col(major);
    EllipseParams p;
    p.center = {x0, y0};
    p.semi_major = std::max(r0, r1);
    p.semi_minor = std::min(r0, r1);
    p.angle_deg = fold_axis_angle(rad2deg(std::atan2(dir(1), dir(0))));
    return p;
}

std::optional<Conic> fit_ellipse_conic(std::span<const Vec2> points) {
    if (points.size() < 6) return std::nullopt;
    double mx = 0.0;
    double my = 0.0;
    for (const auto& p : points) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(points.size());
    my /= static_cast<double>(points.size());
    double scale = 0.0;
    for (const auto& p : points) scale = std::max({scale, std::abs(p.x - mx), std::abs(p.y - my)});
    if (scale == 0.0) return std::nullopt;

    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd d1(n, 3);
    Eigen::MatrixXd d2(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = (points[static_cast<std::size_t>(i)].x - mx) / scale;
        const double y = (points[static_cast<std::size_t>(i)].y - my) / scale;
        d1.row(i) << x * x, x * y, y * y;
        d2.row(i) << x, y, 1.0;
    }
    const Eigen::Matrix3d s1 = d1.transpose() * d1;
    const Eigen::Matrix3d s2 = d1.transpose() * d2;
    const Eigen::Matrix3d s3 = d2.transpose() * d2;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(s3);
    lu.setThreshold(1e-10);
    if (lu.rank() < 3) return std::nullopt;
    const Eigen::Matrix3d t = -lu.solve(s2.transpose());
    const Eigen::Matrix3d m = s1 + s2 * t;
    Eigen::Matrix3d reduced;
    reduced.row(0) = m.row(2) / 2.0;
    reduced.row(1) = -m.row(1);
    reduced.row(2) = m.row(0) / 2.0;
    const Eigen::EigenSolver<Eigen::Matrix3d> es(reduced);
    if (es.info() != Eigen::Success) return std::nullopt;

    std::optional<Eigen::Vector3d> a1;
    double best = 0.0;
    for (int k = 0; k < 3; ++k) {
        const Eigen::Vector3d v = es.eigenvectors().col(k).real();
        const double cond = 4.0 * v(0) * v(2) - v(1) * v(1);
        if (cond > best) {
            best = cond;
            a1 = v;
        }
    }
    if (!a1) return std::nullopt;
    const Eigen::Vector3d a2 = t * *a1;

    // Undo the normalization x' = (x - mx) / scale.
    const double a = (*a1)(0), b = (*a1)(1), c = (*a1)(2);
    const double d = a2(0), e = a2(1), f = a2(2);
    const double s = scale;
    Conic q;
    q.a = a / (s * s);
    q.b = b / (s * s);
    q.c = c / (s * s);
    q.d = (-2.0 * a * mx - b * my) / (s * s) + d / s;
    q.e = (-2.0 * c * my - b * mx) / (s * s) + e / s;
    q.f = (a * mx * mx + b * mx * my + c * my * my) / (s * s) - (d * mx + e * my) / s + f;
    return q;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    auto turn = [](Vec2 o, Vec2 a, Vec2 b) { return (a - o).cross(b - o); };
    for (const auto& p : pts) {
        while (k >= 2 && turn(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && turn(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

RotatedRect min_area_rect(std::span<const Vec2> points) {
    const auto hull = convex_hull(std::vector<Vec2>(points.begin(), points.end()));
    RotatedRect best;
    if (hull.empty()) return best;
    if (hull.size() == 1) {
        best.center = hull[0];
        return best;
    }
    double best_area = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Vec2 edge = hull[(i + 1) % hull.size()] - hull[i];
        if (edge.norm() == 0.0) continue;
        const Vec2 u = edge.normalized();
        const Vec2 v = u.perp();
        double umin = std::numeric_limits<double>::infinity(), umax = -umin;
        double vmin = umin, vmax = -umin;
        for (const auto& p : hull) {
            umin = std::min(umin, p.dot(u));
            umax = std::max(umax, p.dot(u));
            vmin = std::min(vmin, p.dot(v));
            vmax = std::max(vmax, p.dot(v));
        }
        const double lu = umax - umin;
        const double lv = vmax - vmin;
        const double area = lu * lv;
        if (area < best_area - 1e-9) {
            best_area = area;
            best.center = u * (0.5 * (umin + umax)) + v * (0.5 * (vmin + vmax));
            const Vec2 major = lu >= lv ? u : v;
            best.length = std::max(lu, lv);
            best.width = std::min(lu, lv);
            best.angle_deg = fold_axis_angle(rad2deg(std::atan2(major.y, major.x)));
        }
    }
    return best;
}

}  // namespace spermmorph
