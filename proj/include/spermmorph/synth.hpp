#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spermmorph/raster.hpp"
#include "spermmorph/vec2.hpp"

namespace spermmorph {

enum class CurveKind { Straight, Arc, Spline };
enum class IntensityProfile {
    Gaussian,      ///< exp(-d^2 / 2 s^2) with s = width / 2
    SmoothedStep,  ///< flat bar blurred by edge_sigma
};

/// A bright bar crossing the curve just beyond one end, perpendicular to it.
struct JunctionSpec {
    double length = 30.0;  ///< px along the curve normal
    double width = 4.0;    ///< px
    double gap = 0.0;      ///< px between the curve end and the near side of the bar
    double angle_deg = 90.0;  ///< bar axis against the outward curve tangent
};

struct CurveSpec {
    CurveKind kind = CurveKind::Straight;
    Vec2 start;  ///< straight
    Vec2 end;    ///< straight
    Vec2 center;  ///< arc
    double radius = 0.0;           ///< arc
    double start_angle_deg = 0.0;  ///< arc, position angle of the first point
    double sweep_deg = 0.0;        ///< arc, signed
    std::vector<Vec2> control;     ///< spline (Catmull-Rom through all points)
    double width_start = 4.0;  ///< px
    double width_end = 4.0;    ///< px; linear taper in arc length
    IntensityProfile profile = IntensityProfile::SmoothedStep;
    double edge_sigma = 0.5;  ///< px
    double intensity = 0.7;
    double background = 0.1;
    std::optional<JunctionSpec> junction_start;
    std::optional<JunctionSpec> junction_end;
};

struct CurveSample {
    Vec2 position;
    Vec2 tangent;  ///< unit
    double s = 0.0;          ///< arc length from the start
    double curvature = 0.0;  ///< signed, rad/px
    double width = 0.0;
};

struct GroundTruth {
    double length = 0.0;      ///< px
    double mean_width = 0.0;  ///< px, averaged over arc length
    double mean_abs_curvature = 0.0;  ///< rad/px
    std::optional<double> constant_curvature;  ///< straight and arc curves
    double angle_max_deg = 0.0;  ///< windowed normal rotation, see curvature_window
    Vec2 start, end;
    std::vector<CurveSample> samples;  ///< about 0.05 px apart
};

/// Dense samples of the curve. Throws InvalidArgument on non-finite or
/// degenerate geometry or non-positive widths.
std::vector<CurveSample> sample_curve(const CurveSpec& spec, double spacing = 0.05);

/// Ground truth from closed forms where available, dense samples otherwise.
GroundTruth curve_truth(const CurveSpec& spec, double curvature_window = 10.0);

struct RenderedCurve {
    ScalarImage image;
    BinaryMask mask;
    GroundTruth truth;
};

/// Renders the curve on a width x height canvas with additive Gaussian noise
/// clipped to [0, 1]. Throws InvalidArgument when the curve comes closer to the
/// border than `margin` px.
RenderedCurve render_curve(const CurveSpec& spec, int width, int height, double noise_sigma,
                           std::uint64_t seed, int margin = 6);

struct HeadSpec {
    Vec2 center;
    double semi_major = 25.0;
    double semi_minor = 13.0;
    double angle_deg = 0.0;  ///< direction from the head towards the midpiece
    double acrosome_fraction = 0.4;  ///< front share of the major axis
    struct Disc {
        Vec2 offset;  ///< in the head frame (x along the major axis), px
        double radius;
    };
    std::vector<Disc> vacuoles;
    double intensity = 0.8;
};

struct MidpieceSpec {
    double length = 35.0;
    double width = 7.0;
    double angle_offset_deg = 0.0;  ///< rotation of the midpiece axis against the head axis
    double intensity = 0.75;
};

struct PhantomSpec {
    int canvas_width = 1280;
    int canvas_height = 1024;
    HeadSpec head;
    MidpieceSpec midpiece;
    /// The tail should start at the midpiece end; random_phantom arranges this.
    CurveSpec tail;
    double noise_sigma = 0.02;
    double background = 0.1;
    std::uint64_t seed = 0;
};

struct PhantomTruth {
    double head_length = 0.0;  ///< px
    double head_width = 0.0;
    double ellipticity = 0.0;
    double head_angle_deg = 0.0;  ///< axis in [0, 180)
    double midpiece_length = 0.0;
    double midpiece_width = 0.0;
    double midpiece_angle_deg = 0.0;
    double head_midpiece_angle_deg = 0.0;
    Vec2 midpiece_center;
    Vec2 midpiece_end;  ///< far end, where the tail starts
    std::size_t acrosome_px = 0;
    std::size_t nucleus_px = 0;
    std::size_t vacuole_px = 0;
    std::size_t midpiece_px = 0;
    std::size_t tail_px = 0;
    int vacuole_count = 0;
    GroundTruth tail;
};

struct Phantom {
    ScalarImage image;
    InstancePartMask mask;  ///< single instance with ID 1
    PhantomTruth truth;
};

/// Composite head, midpiece and tail phantom. The midpiece extends from the head
/// boundary along the head axis. Throws InvalidArgument when a part leaves the
/// canvas or the tail overlaps the head.
Phantom render_sperm_phantom(const PhantomSpec& spec);

/// Parameter ranges for randomized phantoms.
struct PhantomRanges {
    int canvas_width = 1280;
    int canvas_height = 1024;
    double noise_sigma = 0.02;
    double tail_length_min = 200.0, tail_length_max = 450.0;
    double tail_width_min = 3.0, tail_width_max = 7.0;
    double tail_radius_min = 120.0, tail_radius_max = 400.0;
    double head_a_min = 22.0, head_a_max = 28.0;
    double head_b_min = 12.0, head_b_max = 15.0;
    double mid_length_min = 30.0, mid_length_max = 40.0;
    double mid_width_min = 6.0, mid_width_max = 8.0;
    int max_vacuoles = 2;
};

/// Phantom number `index` of the batch seeded with `seed`; independent of the
/// other batch members.
PhantomSpec random_phantom_spec(std::uint64_t seed, std::size_t index, const PhantomRanges& ranges = {});

std::vector<Phantom> phantom_batch(std::uint64_t seed, std::size_t count, const PhantomRanges& ranges = {});

}  // namespace spermmorph
