#pragma once

// Minimal float image plus the resampling kernels shared by disturbances and
// tensor transfer: inverse-mapped bilinear warps and bicubic resizing.

#include <cstddef>
#include <vector>

#include "bali/core_types.hpp"

namespace bali {

/// Interleaved channels, values nominally in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<float> data;

    Image() = default;
    Image(int w, int h, int c = 3, float fill = 0.0f)
        : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

    float& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
    float at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }

    friend bool operator==(const Image&, const Image&) = default;
};

/// Bilinear sample at (u, v); neighbours outside the plane count as zero.
double sample_bilinear(const Plane& plane, double u, double v);

/// out(p) = in(forward^-1(p)), bilinear, zero fill.
Plane warp_plane(const Plane& plane, const AffineTransform& forward);
Image warp_image(const Image& image, const AffineTransform& forward);

/// Bicubic (a = -0.5) resize with the kernel widened when shrinking, edge
/// pixels replicated, results clamped to [0, 1].
Image resize_bicubic(const Image& image, int width, int height);

/// Peak signal-to-noise ratio for [0, 1] images; +inf when identical.
double psnr(const Image& a, const Image& b);

} // namespace bali
