#pragma once

#include <optional>
#include <span>
#include <vector>

#include "spermmorph/config.hpp"
#include "spermmorph/derivatives.hpp"
#include "spermmorph/raster.hpp"
#include "spermmorph/vec2.hpp"

namespace spermmorph {

struct HessianNormal {
    Vec2 normal;       ///< unit, n_y > 0 (or n_x > 0 when n_y == 0)
    double eigenvalue;  ///< the eigenvalue of largest magnitude
};

/// Flips a unit vector into the canonical half-plane used for normals.
Vec2 canonical_normal(Vec2 n);

/// Eigen-analysis of [[rxx, rxy], [rxy, ryy]]; empty when both eigenvalues are
/// below `tolerance` in magnitude.
std::optional<HessianNormal> try_hessian_normal(double rxx, double rxy, double ryy,
                                                double tolerance = 1e-12);
/// Throws Error("no ridge direction") on a degenerate Hessian and
/// InvalidArgument outside the interior.
HessianNormal hessian_normal(const DerivativeFields& fields, Pixel pixel);

/// Edge points found on either side of a centre point along its normal.
struct EdgePair {
    Vec2 e1;  ///< on the +normal side
    Vec2 e2;  ///< on the -normal side
    Vec2 g1;  ///< gradient at e1
    Vec2 g2;  ///< gradient at e2
    double d1 = 0.0;  ///< |e1 - centre|
    double d2 = 0.0;  ///< |e2 - centre|
};

enum class PointSource { Detected, Reconstructed };

struct CenterPoint {
    Vec2 position;
    Vec2 normal;
    Vec2 gradient;
    double second_dir_deriv = 0.0;
    Pixel pixel;  ///< pixel the point was detected at (or walked through)
    PointSource source = PointSource::Detected;
    std::optional<EdgePair> edges;
    std::optional<double> width;  ///< px, bias-corrected

    /// Line response; larger is stronger for bright lines.
    [[nodiscard]] double strength() const { return -second_dir_deriv; }
};

struct Centerline {
    std::vector<CenterPoint> points;
    InstanceId instance = 0;
    bool closed = false;
};

/// Sub-pixel centre test at one pixel. Accepts when the offset along the normal
/// stays inside the pixel (|t n_x|, |t n_y| <= 0.5) and the eigenvalue is below
/// -strength_threshold.
std::optional<CenterPoint> subpixel_center(const DerivativeFields& fields, Pixel pixel,
                                           double strength_threshold);

/// All centre points over the image interior, optionally restricted to pixels
/// set in `gate`. Responses closer than `dedup_radius` to a stronger response
/// are dropped. Output is in canonical order (strength, then y, then x).
std::vector<CenterPoint> detect_center_points(const DerivativeFields& fields,
                                              double strength_threshold,
                                              const BinaryMask* gate = nullptr,
                                              double dedup_radius = 0.35);

struct LinkParams {
    double radius = 2.0;
    double max_angle_deg = 45.0;
    double gamma = 1.0;
    int min_points = 10;
};

LinkParams link_params(const StegerParams& p);

/// Greedy chain growth from the strongest unlinked point. Each step picks the
/// candidate ahead of the current end minimizing distance + gamma * normal
/// change. Candidates outside `mask` (when given) are ignored. Result is
/// independent of the input order and sorted by descending point count.
std::vector<Centerline> link_centerlines(std::span<const CenterPoint> candidates,
                                         const LinkParams& params,
                                         const BinaryMask* mask = nullptr);

/// Gradient-magnitude maxima along +-normal, sampled every quarter pixel up to
/// max_halfwidth with cubic interpolation and refined by a parabola.
std::optional<EdgePair> edge_pair(const DerivativeFields& fields, const CenterPoint& cp,
                                  double max_halfwidth, double edge_threshold = 0.005);

/// Half-width of the modelled line whose smoothed edge would appear at
/// `measured` px from the centre under smoothing scale sigma.
double unbias_halfwidth(double measured, double sigma, WidthProfile profile);

/// Apparent edge offset of a bar of half-width `halfwidth` smoothed by sigma.
double bar_edge_offset(double halfwidth, double sigma);

/// Fills edges and width for every point. Width = corrected d1 + corrected d2.
void measure_widths(Centerline& line, const DerivativeFields& fields, const StegerParams& params);

}  // namespace spermmorph
