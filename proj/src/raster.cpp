#include "spermmorph/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "spermmorph/error.hpp"

namespace spermmorph {

std::string_view part_name(PartLabel part) {
    switch (part) {
        case PartLabel::Background: return "background";
        case PartLabel::Acrosome: return "acrosome";
        case PartLabel::Vacuole: return "vacuole";
        case PartLabel::Nucleus: return "nucleus";
        case PartLabel::Midpiece: return "midpiece";
        case PartLabel::Tail: return "tail";
    }
    return "unknown";
}

std::optional<PartLabel> part_from_code(int code) {
    if (code < 0 || code >= kPartLabelCount) return std::nullopt;
    return static_cast<PartLabel>(code);
}

namespace {

void check_dimensions(int width, int height) {
    if (width < 0 || height < 0) throw InvalidArgument("negative raster dimensions");
}

std::size_t area_of(int width, int height) {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

}  // namespace

ScalarImage::ScalarImage(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    check_dimensions(width, height);
    if (values_.size() != area_of(width, height)) {
        throw InvalidArgument("image has " + std::to_string(values_.size()) + " values, expected " +
                              std::to_string(area_of(width, height)));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvalidArgument("image intensity outside [0,1] at index " + std::to_string(i));
        }
    }
}

ScalarImage::ScalarImage(int width, int height, double fill)
    : width_(width), height_(height) {
    check_dimensions(width, height);
    if (!(fill >= 0.0 && fill <= 1.0)) throw InvalidArgument("fill intensity outside [0,1]");
    values_.assign(area_of(width, height), fill);
}

ScalarImage ScalarImage::inverted() const {
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), [](double v) { return 1.0 - v; });
    return ScalarImage(width_, height_, std::move(out));
}

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
    check_dimensions(width, height);
    bits_.assign(area_of(width, height), fill ? 1 : 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
    check_dimensions(width, height);
    if (bits_.size() != area_of(width, height)) throw InvalidArgument("mask size mismatch");
    for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool BinaryMask::any() const {
    return std::any_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; });
}

BinaryMask& BinaryMask::operator|=(const BinaryMask& other) {
    if (other.width_ != width_ || other.height_ != height_) {
        throw InvalidArgument("mask union: dimension mismatch");
    }
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
    return *this;
}

InstancePartMask::InstancePartMask(int width, int height)
    : width_(width),
      height_(height),
      parts_(area_of(width, height), PartLabel::Background),
      instances_(area_of(width, height), 0) {
    check_dimensions(width, height);
}

InstancePartMask::InstancePartMask(int width, int height, std::vector<PartLabel> parts,
                                   std::vector<InstanceId> instances)
    : width_(width), height_(height), parts_(std::move(parts)), instances_(std::move(instances)) {
    check_dimensions(width, height);
    const std::size_t n = area_of(width, height);
    if (parts_.size() != n || instances_.size() != n) {
        throw InvalidArgument("part/instance rasters do not match the mask dimensions");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const bool background = parts_[i] == PartLabel::Background;
        if (background != (instances_[i] == 0)) {
            const auto x = std::to_string(i % static_cast<std::size_t>(width));
            const auto y = std::to_string(i / static_cast<std::size_t>(width));
            throw InvalidArgument(std::string(background ? "background with nonzero instance"
                                                         : "foreground part without instance") +
                                  " at pixel (" + x + ", " + y + ")");
        }
    }
}

void InstancePartMask::set(int x, int y, InstanceId instance, PartLabel part) {
    if ((part == PartLabel::Background) != (instance == 0)) {
        throw InvalidArgument("background and instance 0 must coincide");
    }
    parts_[index(x, y)] = part;
    instances_[index(x, y)] = instance;
}

std::vector<InstanceId> InstancePartMask::instance_ids() const {
    std::vector<std::uint8_t> seen(65536, 0);
    for (InstanceId id : instances_) seen[id] = 1;
    std::vector<InstanceId> ids;
    for (std::size_t id = 1; id < seen.size(); ++id) {
        if (seen[id]) ids.push_back(static_cast<InstanceId>(id));
    }
    return ids;
}

bool InstancePartMask::has_instance(InstanceId id) const {
    return id != 0 && std::find(instances_.begin(), instances_.end(), id) != instances_.end();
}

PixelScale::PixelScale(double microns_per_pixel) : um_per_px_(microns_per_pixel) {
    if (!std::isfinite(microns_per_pixel) || microns_per_pixel <= 0.0) {
        throw InvalidArgument("pixel scale must be finite and > 0");
    }
}

BinaryMask instance_parts_mask(const InstancePartMask& mask, InstanceId instance,
                               std::span<const PartLabel> parts) {
    if (!mask.has_instance(instance)) {
        throw InvalidArgument("unknown instance ID " + std::to_string(instance));
    }
    std::array<bool, kPartLabelCount> wanted{};
    for (PartLabel p : parts) wanted[static_cast<std::size_t>(p)] = true;
    std::vector<std::uint8_t> bits(area_of(mask.width(), mask.height()), 0);
    const auto ps = mask.parts();
    const auto is = mask.instances();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bits[i] = (is[i] == instance && wanted[static_cast<std::size_t>(ps[i])]) ? 1 : 0;
    }
    return BinaryMask(mask.width(), mask.height(), std::move(bits));
}

BinaryMask instance_part_mask(const InstancePartMask& mask, InstanceId instance, PartLabel part) {
    const PartLabel parts[] = {part};
    return instance_parts_mask(mask, instance, parts);
}

std::vector<Component> connected_components(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<int> label(area_of(w, h), -1);
    std::vector<Component> comps;
    std::vector<Pixel> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto idx = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                             static_cast<std::size_t>(x);
            if (!mask.test(x, y) || label[idx] >= 0) continue;
            const int id = static_cast<int>(comps.size());
            Component c{BinaryMask(w, h), 0, {}, {x, y}};
            double sx = 0.0;
            double sy = 0.0;
            label[idx] = id;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const Pixel p = stack.back();
                stack.pop_back();
                c.mask.set(p.x, p.y);
                ++c.area;
                sx += p.x;
                sy += p.y;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = p.x + dx;
                        const int ny = p.y + dy;
                        if (!mask.test(nx, ny)) continue;
                        const auto nidx = static_cast<std::size_t>(ny) * static_cast<std::size_t>(w) +
                                          static_cast<std::size_t>(nx);
                        if (label[nidx] >= 0) continue;
                        label[nidx] = id;
                        stack.push_back({nx, ny});
                    }
                }
            }
            c.centroid = {sx / static_cast<double>(c.area), sy / static_cast<double>(c.area)};
            comps.push_back(std::move(c));
        }
    }
    // Components are discovered in scan order, so a stable sort on area keeps
    // the top-left-most first among equal areas.
    std::stable_sort(comps.begin(), comps.end(),
                     [](const Component& a, const Component& b) { return a.area > b.area; });
    return comps;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
    if (radius < 0) throw InvalidArgument("dilation radius must be >= 0");
    if (radius == 0) return mask;
    const int w = mask.width();
    const int h = mask.height();
    // Separable max filter: rows then columns.
    BinaryMask rows(w, h);
    for (int y = 0; y < h; ++y) {
        int last = -1'000'000;
        std::vector<int> next_set(static_cast<std::size_t>(w) + 1, 1'000'000);
        for (int x = w - 1; x >= 0; --x) {
            next_set[static_cast<std::size_t>(x)] =
                mask.test(x, y) ? x : next_set[static_cast<std::size_t>(x) + 1];
        }
        for (int x = 0; x < w; ++x) {
            if (mask.test(x, y)) last = x;
            if (x - last <= radius || next_set[static_cast<std::size_t>(x)] - x <= radius) {
                rows.set(x, y);
            }
        }
    }
    BinaryMask out(w, h);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) {
            const int y0 = std::max(0, y - radius);
            const int y1 = std::min(h - 1, y + radius);
            for (int yy = y0; yy <= y1; ++yy) {
                if (rows.test(x, yy)) {
                    out.set(x, y);
                    break;
                }
            }
        }
    }
    return out;
}

ScalarImage rotate90(const ScalarImage& img) {
    const int w = img.width();
    const int h = img.height();
    std::vector<double> out(area_of(w, h));
    // New image is h wide and w tall; new(x', y') = old(y', h - 1 - x').
    for (int yn = 0; yn < w; ++yn) {
        for (int xn = 0; xn < h; ++xn) {
            out[static_cast<std::size_t>(yn) * static_cast<std::size_t>(h) +
                static_cast<std::size_t>(xn)] = img.at(yn, h - 1 - xn);
        }
    }
    return ScalarImage(h, w, std::move(out));
}

InstancePartMask rotate90(const InstancePartMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<PartLabel> parts(area_of(w, h));
    std::vector<InstanceId> ids(area_of(w, h));
    for (int yn = 0; yn < w; ++yn) {
        for (int xn = 0; xn < h; ++xn) {
            const auto i = static_cast<std::size_t>(yn) * static_cast<std::size_t>(h) +
                           static_cast<std::size_t>(xn);
            parts[i] = mask.part(yn, h - 1 - xn);
            ids[i] = mask.instance(yn, h - 1 - xn);
        }
    }
    return InstancePartMask(h, w, std::move(parts), std::move(ids));
}

}  // namespace spermmorph
