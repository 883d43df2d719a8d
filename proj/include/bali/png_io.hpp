#pragma once

// 8-bit RGB PNG files via libpng, plus conversion to and from float images.

#include <cstdint>
#include <string>
#include <vector>

#include "bali/image.hpp"

namespace bali {

struct Rgb8Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb; ///< row-major, 3 bytes per pixel

    Rgb8Image() = default;
    Rgb8Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t* pixel(int x, int y) { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }
    const std::uint8_t* pixel(int x, int y) const { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }

    friend bool operator==(const Rgb8Image&, const Rgb8Image&) = default;
};

/// Throws IoError naming `path` on any failure.
void write_png(const std::string& path, const Rgb8Image& image);
/// Grey, palette and alpha inputs are converted to RGB; 16-bit is reduced to 8.
Rgb8Image read_png(const std::string& path);

/// Values are rounded from [0, 1] after clamping. Grey images are replicated.
Rgb8Image to_rgb8(const Image& image);
Image to_float(const Rgb8Image& image);

} // namespace bali
