#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "spermmorph/derivatives.hpp"
#include "spermmorph/raster.hpp"

namespace spermmorph {

/// Cross-section model used to undo the smoothing bias of edge-to-edge widths.
enum class WidthProfile {
    None,      ///< raw distance between the two gradient maxima
    Bar,       ///< flat-topped line with sharp edges
    Gaussian,  ///< Gaussian cross-section; width is inflection-to-inflection
};

struct StegerParams {
    double strength_threshold = 0.01;  ///< minimum |eigenvalue| for a centre point
    double link_radius = 2.0;          ///< px
    double link_max_angle_deg = 45.0;  ///< max normal change between linked points
    double link_gamma = 1.0;           ///< px per radian of normal change in the link cost
    int min_points = 10;
    double max_halfwidth = 6.0;    ///< px searched on each side for edges
    double edge_threshold = 0.005;  ///< minimum gradient magnitude of an edge
    int mask_margin = 2;            ///< dilation of the tail mask used for gating
    double dedup_radius = 0.35;     ///< duplicate responses closer than this are merged
    WidthProfile width_profile = WidthProfile::Bar;
    bool dark_lines = false;
};

struct EndpointParams {
    double w1 = 0.5;  ///< weight of the ray distance, 1/px
    double w2 = 0.5;  ///< weight of the gradient angle, 1/rad
    double momentum_alpha = 0.9;
    double cos_threshold = 0.9;
    int max_steps = 200;
};

/// Every tunable of the measurement pipeline.
struct MeasurementConfig {
    GaussianSpec gaussian{1.8};
    PixelScale scale{0.1};
    StegerParams steger;
    EndpointParams endpoint;
    double curvature_window = 10.0;  ///< px of arc length
    /// Plain Steger comparison arm: no mask gating, no endpoint filtering or
    /// reconstruction.
    bool steger_baseline = false;
    /// eval-parsing: unmatched ground-truth instances count as zero in PCP.
    bool pcp_unmatched_zero = true;

    /// Throws InvalidArgument naming the offending key.
    void validate() const;
};

/// Sets one dotted key, e.g. "steger.sigma" = "1.8". Throws InvalidArgument for
/// unknown keys or unparsable values.
void apply_config_value(MeasurementConfig& cfg, std::string_view key, std::string_view value);

/// Parses `key = value` lines; '#' starts a comment. Throws InvalidArgument with
/// the line number on failure.
void apply_config_text(MeasurementConfig& cfg, std::string_view text);
MeasurementConfig load_config(const std::string& path);

struct ConfigEntry {
    std::string key;
    std::string value;
    std::string description;
};

/// All keys with their current values, in documentation order.
std::vector<ConfigEntry> config_entries(const MeasurementConfig& cfg);
std::string to_config_text(const MeasurementConfig& cfg);

std::string_view to_string(WidthProfile p);

}  // namespace spermmorph
