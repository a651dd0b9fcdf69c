#pragma once

#include <span>
#include <vector>

#include "spermmorph/raster.hpp"
#include "spermmorph/vec2.hpp"

namespace spermmorph {

/// Smoothing scale and kernel half-width, in pixels.
class GaussianSpec {
public:
    /// radius defaults to ceil(3 sigma). Throws InvalidArgument for sigma <= 0
    /// or a radius below ceil(3 sigma).
    explicit GaussianSpec(double sigma = 1.8, int radius = 0);

    [[nodiscard]] double sigma() const { return sigma_; }
    [[nodiscard]] int radius() const { return radius_; }
    [[nodiscard]] int size() const { return 2 * radius_ + 1; }

private:
    double sigma_;
    int radius_;
};

/// Closed-form value of the order-th derivative of the unit-area Gaussian at x.
double gaussian_derivative(double x, double sigma, int order);

/// Sampled kernel of length 2*radius+1, index i holding offset i - radius.
/// Order 0 is renormalized to unit sum; order 1 is the raw odd-symmetric sample;
/// order 2 has its mean removed so that it sums to zero.
std::vector<double> gaussian_kernel_1d(const GaussianSpec& spec, int order);

/// Real-valued raster used for derivative fields.
class Field {
public:
    Field() = default;
    Field(int width, int height) : width_(width), height_(height), data_(area(width, height), 0.0) {}

    [[nodiscard]] int width() const { return width_; }
    [[nodiscard]] int height() const { return height_; }
    [[nodiscard]] double at(int x, int y) const { return data_[index(x, y)]; }
    double& at(int x, int y) { return data_[index(x, y)]; }
    [[nodiscard]] std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    /// Bilinear interpolation; coordinates are clamped to the raster.
    [[nodiscard]] double sample(double x, double y) const;
    [[nodiscard]] double sample(Vec2 p) const { return sample(p.x, p.y); }
    /// Cubic convolution (Keys, a = -0.5) over the 4x4 neighbourhood, clamped at
    /// the border. Smooth enough to locate maxima between pixels.
    [[nodiscard]] double sample_cubic(double x, double y) const;
    [[nodiscard]] double sample_cubic(Vec2 p) const { return sample_cubic(p.x, p.y); }

private:
    static std::size_t area(int w, int h) {
        return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    }
    [[nodiscard]] std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Smoothed first and second partial derivatives of an image.
struct DerivativeFields {
    Field rx, ry, rxx, rxy, ryy;
    GaussianSpec spec;

    [[nodiscard]] int width() const { return rx.width(); }
    [[nodiscard]] int height() const { return rx.height(); }
    /// True when (x, y) is at least one kernel radius away from every border.
    [[nodiscard]] bool interior(int x, int y) const {
        const int r = spec.radius();
        return x >= r && y >= r && x < width() - r && y < height() - r;
    }
    [[nodiscard]] Vec2 gradient(int x, int y) const { return {rx.at(x, y), ry.at(x, y)}; }
    [[nodiscard]] Vec2 gradient(Vec2 p) const { return {rx.sample(p), ry.sample(p)}; }
    [[nodiscard]] Vec2 gradient_cubic(Vec2 p) const { return {rx.sample_cubic(p), ry.sample_cubic(p)}; }
};

/// Separable convolution with the order-(1,0), (0,1), (2,0), (1,1), (0,2)
/// Gaussian derivative kernels, mirror-reflected borders. Throws
/// InvalidArgument when the image is smaller than the kernel.
DerivativeFields derivative_fields(const ScalarImage& img, const GaussianSpec& spec);

/// Same, for a raw real raster (no [0,1] constraint). Used by tests and fields of
/// linear combinations of images.
DerivativeFields derivative_fields(const Field& img, const GaussianSpec& spec);

}  // namespace spermmorph
