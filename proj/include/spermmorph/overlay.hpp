#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spermmorph/morphometry.hpp"

namespace spermmorph {

struct OverlayItem {
    MorphReport report;
    MeasurementDetail detail;
};

struct OverlayOptions {
    int normal_every = 5;         ///< draw a normal tick at every n-th centerline point
    double normal_length = 4.0;   ///< px
    bool embed_image = true;
};

/// SVG with the image embedded as a PNG, centerlines, normal ticks, detected
/// and reconstructed points in distinct styles, trimmed endpoints and the head
/// and midpiece fits. Coordinates are pixel centres.
std::string render_overlay_svg(const ScalarImage& img, const std::vector<OverlayItem>& items,
                               const OverlayOptions& options = {});

std::string base64_encode(std::span<const std::uint8_t> data);

}  // namespace spermmorph
