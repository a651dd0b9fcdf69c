#pragma once

#include <optional>
#include <span>
#include <vector>

#include "spermmorph/raster.hpp"
#include "spermmorph/vec2.hpp"

namespace spermmorph {

/// Midpoints of the pixel edges separating set pixels from unset 4-neighbours.
/// These lie on the digitized boundary, half a pixel outside boundary pixel centres.
std::vector<Vec2> boundary_points(const BinaryMask& mask);

/// General conic A x^2 + B xy + C y^2 + D x + E y + F = 0.
struct Conic {
    double a, b, c, d, e, f;
};

struct EllipseParams {
    Vec2 center;
    double semi_major = 0.0;
    double semi_minor = 0.0;
    double angle_deg = 0.0;  ///< major-axis orientation in [0, 180)
};

/// Direct least-squares conic fit constrained to ellipses (numerically stable
/// Fitzgibbon variant). Empty when the points admit no ellipse (e.g. collinear).
std::optional<Conic> fit_ellipse_conic(std::span<const Vec2> points);
std::optional<EllipseParams> conic_to_ellipse(const Conic& conic);

struct RotatedRect {
    Vec2 center;
    double length = 0.0;  ///< longer side
    double width = 0.0;   ///< shorter side
    double angle_deg = 0.0;  ///< orientation of the longer side in [0, 180)
};

/// Andrew monotone chain, counter-clockwise in a y-up frame, no collinear points.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

/// Minimum-area enclosing rectangle by rotating calipers over hull edges.
RotatedRect min_area_rect(std::span<const Vec2> points);

/// Axis orientation folded into [0, 180).
double fold_axis_angle(double deg);

/// Acute angle between two undirected axes, in [0, 90].
double axis_angle_between(double a_deg, double b_deg);

}  // namespace spermmorph
