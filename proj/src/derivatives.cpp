#include "spermmorph/derivatives.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "spermmorph/error.hpp"
#include "spermmorph/parallel.hpp"

namespace spermmorph {

GaussianSpec::GaussianSpec(double sigma, int radius) : sigma_(sigma), radius_(radius) {
    if (!std::isfinite(sigma) || sigma <= 0.0) throw InvalidArgument("sigma must be > 0");
    const int min_radius = static_cast<int>(std::ceil(3.0 * sigma));
    if (radius_ == 0) radius_ = min_radius;
    if (radius_ < min_radius) {
        throw InvalidArgument("kernel radius " + std::to_string(radius) + " below ceil(3 sigma) = " +
                              std::to_string(min_radius));
    }
}

double gaussian_derivative(double x, double sigma, int order) {
    const double s2 = sigma * sigma;
    const double g = std::exp(-x * x / (2.0 * s2)) / (std::sqrt(2.0 * kPi) * sigma);
    switch (order) {
        case 0: return g;
        case 1: return -x / s2 * g;
        case 2: return (x * x - s2) / (s2 * s2) * g;
        default: throw InvalidArgument("derivative order must be 0, 1 or 2");
    }
}

std::vector<double> gaussian_kernel_1d(const GaussianSpec& spec, int order) {
    if (order < 0 || order > 2) throw InvalidArgument("derivative order must be 0, 1 or 2");
    const int r = spec.radius();
    std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
    for (int i = -r; i <= r; ++i) {
        k[static_cast<std::size_t>(i + r)] = gaussian_derivative(i, spec.sigma(), order);
    }
    if (order == 0) {
        const double sum = std::accumulate(k.begin(), k.end(), 0.0);
        for (double& v : k) v /= sum;
    } else if (order == 1) {
        // Exact odd symmetry; evaluation already gives it, this pins the centre.
        k[static_cast<std::size_t>(r)] = 0.0;
        for (int i = 1; i <= r; ++i) {
            k[static_cast<std::size_t>(r - i)] = -k[static_cast<std::size_t>(r + i)];
        }
    } else {
        const double mean = std::accumulate(k.begin(), k.end(), 0.0) / static_cast<double>(k.size());
        for (double& v : k) v -= mean;
    }
    return k;
}

double Field::sample(double x, double y) const {
    x = std::clamp(x, 0.0, static_cast<double>(width_ - 1));
    y = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
    const int x0 = std::min(static_cast<int>(x), width_ - 1);
    const int y0 = std::min(static_cast<int>(y), height_ - 1);
    const int x1 = std::min(x0 + 1, width_ - 1);
    const int y1 = std::min(y0 + 1, height_ - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
    const double bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
    return top * (1.0 - fy) + bottom * fy;
}

namespace {

// Keys cubic convolution weights (a = -0.5) for the four taps around t in [0, 1).
std::array<double, 4> cubic_weights(double t) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    return {-0.5 * t3 + t2 - 0.5 * t, 1.5 * t3 - 2.5 * t2 + 1.0, -1.5 * t3 + 2.0 * t2 + 0.5 * t,
            0.5 * t3 - 0.5 * t2};
}

}  // namespace

double Field::sample_cubic(double x, double y) const {
    x = std::clamp(x, 0.0, static_cast<double>(width_ - 1));
    y = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
    const int x0 = std::min(static_cast<int>(x), width_ - 1);
    const int y0 = std::min(static_cast<int>(y), height_ - 1);
    const auto wx = cubic_weights(x - x0);
    const auto wy = cubic_weights(y - y0);
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) {
        const int yy = std::clamp(y0 - 1 + j, 0, height_ - 1);
        double row = 0.0;
        for (int i = 0; i < 4; ++i) row += wx[static_cast<std::size_t>(i)] * at(std::clamp(x0 - 1 + i, 0, width_ - 1), yy);
        sum += wy[static_cast<std::size_t>(j)] * row;
    }
    return sum;
}

namespace {

int reflect(int i, int n) {
    if (i < 0) return -i - 1;
    if (i >= n) return 2 * n - i - 1;
    return i;
}

// out(x, y) = sum_u in(x - u, y) k(u)
void convolve_rows(const Field& in, std::span<const double> k, Field& out, int threads) {
    const int w = in.width();
    const int r = static_cast<int>(k.size() / 2);
    parallel_for(static_cast<std::size_t>(in.height()), threads, [&](std::size_t row) {
        const int y = static_cast<int>(row);
        std::vector<double> padded(static_cast<std::size_t>(w + 2 * r));
        for (int i = -r; i < w + r; ++i) padded[static_cast<std::size_t>(i + r)] = in.at(reflect(i, w), y);
        for (int x = 0; x < w; ++x) {
            // padded[x + r - u] holds in(x - u)
            const double* base = padded.data() + x + 2 * r;
            double acc = 0.0;
            for (int j = 0; j <= 2 * r; ++j) acc += base[-j] * k[static_cast<std::size_t>(j)];
            out.at(x, y) = acc;
        }
    });
}

void convolve_cols(const Field& in, std::span<const double> k, Field& out, int threads) {
    const int w = in.width();
    const int h = in.height();
    const int r = static_cast<int>(k.size() / 2);
    const std::span<const double> src = in.data();
    const std::span<double> dst = out.data();
    parallel_for(static_cast<std::size_t>(h), threads, [&](std::size_t row) {
        const int y = static_cast<int>(row);
        double* o = dst.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
        std::fill(o, o + w, 0.0);
        for (int u = -r; u <= r; ++u) {
            const double kv = k[static_cast<std::size_t>(u + r)];
            const double* line = src.data() + static_cast<std::size_t>(reflect(y - u, h)) * static_cast<std::size_t>(w);
            for (int x = 0; x < w; ++x) o[x] += line[x] * kv;
        }
    });
}

}  // namespace

DerivativeFields derivative_fields(const Field& img, const GaussianSpec& spec) {
    if (img.width() < spec.size() || img.height() < spec.size()) {
        throw InvalidArgument("image " + std::to_string(img.width()) + "x" +
                              std::to_string(img.height()) + " is smaller than the " +
                              std::to_string(spec.size()) + "-tap kernel");
    }
    const auto k0 = gaussian_kernel_1d(spec, 0);
    const auto k1 = gaussian_kernel_1d(spec, 1);
    const auto k2 = gaussian_kernel_1d(spec, 2);
    const int threads = thread_count();
    const int w = img.width();
    const int h = img.height();

    Field row0(w, h), row1(w, h), row2(w, h);
    convolve_rows(img, k0, row0, threads);
    convolve_rows(img, k1, row1, threads);
    convolve_rows(img, k2, row2, threads);

    DerivativeFields f{Field(w, h), Field(w, h), Field(w, h), Field(w, h), Field(w, h), spec};
    convolve_cols(row1, k0, f.rx, threads);
    convolve_cols(row0, k1, f.ry, threads);
    convolve_cols(row2, k0, f.rxx, threads);
    convolve_cols(row1, k1, f.rxy, threads);
    convolve_cols(row0, k2, f.ryy, threads);
    return f;
}

DerivativeFields derivative_fields(const ScalarImage& img, const GaussianSpec& spec) {
    Field raw(img.width(), img.height());
    std::copy(img.values().begin(), img.values().end(), raw.data().begin());
    return derivative_fields(raw, spec);
}

}  // namespace spermmorph
