#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spermmorph/vec2.hpp"

namespace spermmorph {

/// Part classes of the instance-aware part segmentation. The numeric codes are
/// the values stored in part-code PNG files.
enum class PartLabel : std::uint8_t {
    Background = 0,
    Acrosome = 1,
    Vacuole = 2,
    Nucleus = 3,
    Midpiece = 4,
    Tail = 5,
};

inline constexpr int kPartLabelCount = 6;
inline constexpr PartLabel kForegroundParts[] = {PartLabel::Acrosome, PartLabel::Vacuole,
                                                 PartLabel::Nucleus, PartLabel::Midpiece,
                                                 PartLabel::Tail};

std::string_view part_name(PartLabel part);
std::optional<PartLabel> part_from_code(int code);

using InstanceId = std::uint16_t;

/// Grayscale raster with intensities in [0, 1], row-major.
class ScalarImage {
public:
    ScalarImage() = default;
    /// Throws InvalidArgument when the size does not match or a value is outside [0, 1].
    ScalarImage(int width, int height, std::vector<double> values);
    /// Constant image.
    ScalarImage(int width, int height, double fill = 0.0);

    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }
    [[nodiscard]] bool empty() const { return values_.empty(); }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] double at(int x, int y) const { return values_[index(x, y)]; }
    [[nodiscard]] bool contains(int x, int y) const {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    /// 1 - v for every pixel.
    [[nodiscard]] ScalarImage inverted() const;

private:
    [[nodiscard]] std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false);
    BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }
    [[nodiscard]] bool contains(int x, int y) const {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }
    /// Out-of-range coordinates read as false.
    [[nodiscard]] bool test(int x, int y) const {
        return contains(x, y) && bits_[index(x, y)] != 0;
    }
    [[nodiscard]] bool test(Pixel p) const { return test(p.x, p.y); }
    void set(int x, int y, bool v = true) { bits_[index(x, y)] = v ? 1 : 0; }

    [[nodiscard]] std::size_t count() const;
    [[nodiscard]] bool any() const;
    [[nodiscard]] std::span<const std::uint8_t> bits() const { return bits_; }

    BinaryMask& operator|=(const BinaryMask& other);
    bool operator==(const BinaryMask&) const = default;

private:
    [[nodiscard]] std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Per-pixel (instance, part) labelling. Background pixels carry instance 0 and
/// every non-background pixel carries a nonzero instance.
class InstancePartMask {
public:
    InstancePartMask() = default;
    /// All-background mask.
    InstancePartMask(int width, int height);
    /// Validates the background/instance invariant; the error names the first
    /// offending pixel.
    InstancePartMask(int width, int height, std::vector<PartLabel> parts,
                     std::vector<InstanceId> instances);

    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }
    [[nodiscard]] PartLabel part(int x, int y) const { return parts_[index(x, y)]; }
    [[nodiscard]] InstanceId instance(int x, int y) const { return instances_[index(x, y)]; }
    [[nodiscard]] std::span<const PartLabel> parts() const { return parts_; }
    [[nodiscard]] std::span<const InstanceId> instances() const { return instances_; }

    /// Sets both labels at once; Background forces instance 0 and vice versa is checked.
    void set(int x, int y, InstanceId instance, PartLabel part);

    /// Sorted, unique, nonzero instance IDs.
    [[nodiscard]] std::vector<InstanceId> instance_ids() const;
    [[nodiscard]] bool has_instance(InstanceId id) const;

    bool operator==(const InstancePartMask&) const = default;

private:
    [[nodiscard]] std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<PartLabel> parts_;
    std::vector<InstanceId> instances_;
};

/// Physical size of one pixel edge.
class PixelScale {
public:
    explicit PixelScale(double microns_per_pixel = 0.1);
    [[nodiscard]] double microns_per_pixel() const { return um_per_px_; }
    [[nodiscard]] double length(double px) const { return px * um_per_px_; }
    [[nodiscard]] double area(double px2) const { return px2 * um_per_px_ * um_per_px_; }

private:
    double um_per_px_;
};

/// Bits set exactly where both the instance and the part label match.
/// Throws InvalidArgument for an instance that does not occur in the mask.
BinaryMask instance_part_mask(const InstancePartMask& mask, InstanceId instance, PartLabel part);

/// Union over several parts of one instance.
BinaryMask instance_parts_mask(const InstancePartMask& mask, InstanceId instance,
                               std::span<const PartLabel> parts);

struct Component {
    BinaryMask mask;
    std::size_t area = 0;
    Vec2 centroid;
    Pixel top_left;  ///< first pixel in row-major scan order
};

/// 8-connected components, largest first; ties broken by the row-major position
/// of each component's first pixel.
std::vector<Component> connected_components(const BinaryMask& mask);

/// Chebyshev-ball (square) dilation by `radius` pixels.
BinaryMask dilate(const BinaryMask& mask, int radius);

/// Rotate a raster by 90 degrees clockwise on screen: (x, y) -> (h - 1 - y, x).
ScalarImage rotate90(const ScalarImage& img);
InstancePartMask rotate90(const InstancePartMask& mask);

}  // namespace spermmorph
