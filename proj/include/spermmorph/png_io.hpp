#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spermmorph/raster.hpp"

namespace spermmorph {

/// Decoded single-channel PNG samples, before any normalization.
struct GrayPng {
    int width = 0;
    int height = 0;
    int bit_depth = 8;  ///< 8 or 16
    std::vector<std::uint16_t> samples;
};

/// Reads an 8- or 16-bit single-channel PNG. Throws IoError on unreadable or
/// multi-channel input and on zero-sized images.
GrayPng read_gray_png(const std::filesystem::path& path);
void write_gray_png(const std::filesystem::path& path, const GrayPng& png);
/// In-memory encoding, used for embedding images in SVG overlays.
std::vector<std::uint8_t> encode_gray_png(const GrayPng& png);

/// Intensities are rescaled linearly by the bit-depth maximum (255 or 65535).
ScalarImage load_image(const std::filesystem::path& path);
/// Quantizes to the requested bit depth with round-to-nearest.
void save_image(const std::filesystem::path& path, const ScalarImage& img, int bit_depth = 8);

/// Part file: 8-bit codes 0..5. Instance file: 16-bit IDs.
InstancePartMask load_mask(const std::filesystem::path& part_path,
                           const std::filesystem::path& instance_path);
void save_mask(const std::filesystem::path& part_path, const std::filesystem::path& instance_path,
               const InstancePartMask& mask);

/// Code table for `--print-labels` and the README.
std::string part_code_table();

}  // namespace spermmorph
