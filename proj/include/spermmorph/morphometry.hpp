#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "spermmorph/config.hpp"
#include "spermmorph/derivatives.hpp"
#include "spermmorph/endpoint.hpp"
#include "spermmorph/geometry.hpp"
#include "spermmorph/raster.hpp"
#include "spermmorph/steger.hpp"

namespace spermmorph {

/// Polyline length of the sub-pixel points, in micrometres.
/// Throws InvalidArgument for fewer than two points.
double tail_length(const Centerline& line, const PixelScale& scale);
double polyline_length_px(const Centerline& line);

/// Mean width in px over points carrying a width. Throws Error when none does.
double tail_width(const Centerline& line);

struct CurvatureProfile {
    std::vector<double> curvature;  ///< rad/px per point, signed
    double angle_max_deg = 0.0;     ///< largest normal rotation across one window
    double mean_abs_curvature = 0.0;  ///< rad/px
};

/// Windowed curvature: for each point the unwrapped normal orientation change
/// across the arc-length window centred on it, divided by the arc length spanned.
/// angle_max and mean_abs_curvature prefer windows that lie fully on the line and
/// hold detected points only; they fall back to complete windows, then to all
/// points.
/// Throws InvalidArgument for fewer than 3 points and Error when all points coincide.
CurvatureProfile tail_curvature(const Centerline& line, double window_px);

struct EllipseFit {
    double length_um = 0.0;
    double width_um = 0.0;
    double ellipticity = 0.0;
    double major_axis_angle_deg = 0.0;
    EllipseParams ellipse;  ///< in pixels
};

struct RectangleFit {
    double length_um = 0.0;
    double width_um = 0.0;
    double angle_deg = 0.0;
    RotatedRect rect;  ///< in pixels
    bool degenerate = false;
};

/// Ellipse through the mask boundary. Empty when the fit is degenerate or the
/// mask has fewer than 6 boundary points.
std::optional<EllipseFit> fit_ellipse(const BinaryMask& mask, const PixelScale& scale);

/// Minimum-area rectangle around the mask boundary. A single pixel yields a
/// zero-size rectangle flagged degenerate. Throws InvalidArgument on an empty mask.
RectangleFit fit_rectangle(const BinaryMask& mask, const PixelScale& scale);

double head_midpiece_angle(double head_major_angle_deg, double midpiece_major_angle_deg);

struct VacuoleStats {
    int count = 0;
    std::optional<double> area_um2;  ///< absent when there is no vacuole
};

struct PartAreas {
    std::map<PartLabel, double> area_um2;  ///< every foreground part, zero when absent
    VacuoleStats vacuole;
};

PartAreas part_areas(const InstancePartMask& mask, InstanceId instance, const PixelScale& scale);

enum class QualityFlag {
    MissingPart,
    FragmentedTail,
    NonterminatingWalk,
    FitDegenerate,
    MidpieceAngleFallback,
};
std::string_view to_string(QualityFlag f);

struct HeadMeasures {
    double length_um, width_um, ellipticity;
};
struct SegmentMeasures {
    double length_um, width_um, angle_max_deg;
};

struct MorphReport {
    InstanceId instance = 0;
    std::optional<HeadMeasures> head;
    double acrosome_area_um2 = 0.0;
    double nucleus_area_um2 = 0.0;
    VacuoleStats vacuole;
    std::optional<double> head_midpiece_angle_deg;
    std::optional<SegmentMeasures> midpiece;
    std::optional<SegmentMeasures> tail;
    /// Mean |curvature| of the tail in rad/um; not a table column but reported in JSON.
    std::optional<double> tail_mean_curvature_per_um;
    std::set<QualityFlag> flags;
};

/// Intermediate geometry kept for overlays and debugging.
struct MeasurementDetail {
    std::optional<Centerline> tail_line;
    std::optional<Centerline> midpiece_line;
    std::optional<FilterResult> filter;
    std::optional<Reconstruction> head_walk;
    std::optional<Reconstruction> tip_walk;
    std::optional<EllipseFit> head_fit;
    std::optional<RectangleFit> midpiece_fit;
};

/// Fields prepared once per image and shared by all instances in it.
struct ImageContext {
    ScalarImage image;  ///< after polarity handling
    DerivativeFields fields;
};

ImageContext prepare_image(const ScalarImage& img, const MeasurementConfig& cfg);

/// Full parameter record of one sperm. Missing or degenerate parts set flags and
/// leave fields absent. Throws InvalidArgument for an unknown instance or a
/// dimension mismatch.
MorphReport measure_sperm(const ScalarImage& img, const InstancePartMask& mask, InstanceId instance,
                          const MeasurementConfig& cfg, MeasurementDetail* detail = nullptr);
MorphReport measure_sperm(const ImageContext& ctx, const InstancePartMask& mask, InstanceId instance,
                          const MeasurementConfig& cfg, MeasurementDetail* detail = nullptr);

/// Tail centerline extraction shared by measure_sperm and the centerline command:
/// detection, linking, trimming of end points outside the tail mask, endpoint
/// filtering and reconstruction (unless the config selects the plain Steger
/// arm), then widths.
struct TailTrace {
    std::optional<Centerline> line;
    std::optional<FilterResult> filter;
    std::optional<Reconstruction> head_walk;
    std::optional<Reconstruction> tip_walk;
    bool filter_failed = false;
    /// Points dropped from each end because they lie outside the tail mask
    /// (inside the gate margin) before filtering.
    std::size_t outside_head = 0;
    std::size_t outside_tip = 0;
};

/// `head_anchor`, when given, decides which end of the line is the head end.
TailTrace trace_tail(const DerivativeFields& fields, const BinaryMask& tail_mask,
                     const MeasurementConfig& cfg, std::optional<Vec2> head_anchor = std::nullopt);

/// Half-up rounding to two decimals, the presentation used in reports.
double round_half_up_2(double v);
std::string format_2dp(double v);

}  // namespace spermmorph
