#pragma once

#include <array>
#include <optional>
#include <vector>

#include "spermmorph/config.hpp"
#include "spermmorph/derivatives.hpp"
#include "spermmorph/steger.hpp"

namespace spermmorph {

/// Normalized dot product of two gradients. Throws Error("undefined angle")
/// when either has zero magnitude.
double cos_alpha(Vec2 g1, Vec2 g2);

struct EndpointVerdict {
    CenterPoint point;
    std::optional<double> cos_alpha;  ///< absent when the edge pair is missing
    bool kept = false;
};

struct FilterResult {
    Centerline line;
    std::vector<EndpointVerdict> head_verdicts;  ///< from the front end inward
    std::vector<EndpointVerdict> tip_verdicts;   ///< from the back end inward
    [[nodiscard]] std::size_t trimmed_head() const {
        return head_verdicts.empty() ? 0 : head_verdicts.size() - 1;
    }
    [[nodiscard]] std::size_t trimmed_tip() const {
        return tip_verdicts.empty() ? 0 : tip_verdicts.size() - 1;
    }
};

/// Trims mislocated points from both ends: from each end inward, every point is
/// dropped until the first one whose opposite edge gradients satisfy
/// |cos alpha| >= cos_threshold. Interior points are never examined.
/// Throws InvalidArgument when the line has fewer than min_points points and
/// Error("no valid center points") when no point passes.
FilterResult filter_endpoints(const Centerline& line, const DerivativeFields& fields,
                              const MeasurementConfig& cfg);

/// The two neighbours bracketing a gradient direction: the diagonal and the axis
/// neighbour of its 45-degree sector. Even sectors [k*45, (k+1)*45] are closed,
/// odd sectors open, so exact diagonals and axes resolve like [0, 45].
/// Throws InvalidArgument for a non-finite angle.
std::array<Pixel, 2> candidate_pixels(Pixel current, double gradient_angle_deg);

/// g' = alpha * g_current + (1 - alpha) * g_next
Vec2 momentum_update(double alpha, Vec2 g_current, Vec2 g_next);

enum class LineEnd { Head, Tip };  ///< front (index 0) and back of a centerline

struct WalkCandidate {
    Pixel pixel;
    double distance = 0.0;  ///< to the ray along the momentum gradient, px
    double beta = 0.0;      ///< gradient angle difference, rad
    double score = 0.0;
    bool inside = false;
};

struct WalkStep {
    int step = 0;
    Pixel current;
    Vec2 momentum;  ///< momentum gradient before the step
    std::array<WalkCandidate, 2> candidates;
    int selected = 0;
};

struct Reconstruction {
    std::vector<CenterPoint> points;  ///< in walking order, outward
    std::vector<Vec2> momenta;        ///< walk gradient after each appended point
    std::vector<WalkStep> trace;
    bool terminated = true;  ///< false when max_steps was hit inside the mask
    bool fallback_direction = false;  ///< start gradient replaced by the line direction
};

/// Walks outward from one end of a filtered line, one pixel per step, choosing
/// between the two candidate pixels by w1 * d + w2 * beta and smoothing the walk
/// gradient with momentum. Stops when the chosen pixel leaves tail_mask. The
/// walk starts along the line direction instead of the image gradient when that
/// is zero or more than 45 degrees off the outward line direction.
Reconstruction reconstruct_endpoint(const Centerline& line, LineEnd end,
                                    const DerivativeFields& fields, const BinaryMask& tail_mask,
                                    const MeasurementConfig& cfg);

/// Appends both reconstructions to the line in order (head points reversed in front).
void attach_reconstruction(Centerline& line, const Reconstruction& head, const Reconstruction& tip);

}  // namespace spermmorph
