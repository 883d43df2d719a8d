#include "bali/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bali {

double sample_bilinear(const Plane& plane, double u, double v) {
    const double fu = std::floor(u);
    const double fv = std::floor(v);
    if (fu < -1.0 || fv < -1.0 || fu >= plane.width() || fv >= plane.height()) return 0.0;
    const int i0 = static_cast<int>(fu);
    const int j0 = static_cast<int>(fv);
    const double a = u - fu;
    const double b = v - fv;
    auto value = [&](int i, int j) -> double { return plane.grid().contains(i, j) ? plane.at(i, j) : 0.0; };
    double out = 0.0;
    if (a < 1.0 && b < 1.0) out += (1.0 - a) * (1.0 - b) * value(i0, j0);
    if (a > 0.0 && b < 1.0) out += a * (1.0 - b) * value(i0 + 1, j0);
    if (a < 1.0 && b > 0.0) out += (1.0 - a) * b * value(i0, j0 + 1);
    if (a > 0.0 && b > 0.0) out += a * b * value(i0 + 1, j0 + 1);
    return out;
}

Plane warp_plane(const Plane& plane, const AffineTransform& forward) {
    const AffineTransform inverse = forward.inverse();
    Plane out(plane.grid());
    for (int j = 0; j < plane.height(); ++j) {
        for (int i = 0; i < plane.width(); ++i) {
            const Point2 src = inverse.apply({static_cast<double>(i), static_cast<double>(j)});
            out.at(i, j) = static_cast<float>(sample_bilinear(plane, src.u, src.v));
        }
    }
    return out;
}

Image warp_image(const Image& image, const AffineTransform& forward) {
    const AffineTransform inverse = forward.inverse();
    Image out(image.width, image.height, image.channels);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const Point2 src = inverse.apply({static_cast<double>(x), static_cast<double>(y)});
            const double fu = std::floor(src.u);
            const double fv = std::floor(src.v);
            if (fu < -1.0 || fv < -1.0 || fu >= image.width || fv >= image.height) continue;
            const int x0 = static_cast<int>(fu);
            const int y0 = static_cast<int>(fv);
            const double a = src.u - fu;
            const double b = src.v - fv;
            const double w[4] = {(1 - a) * (1 - b), a * (1 - b), (1 - a) * b, a * b};
            const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
            const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
            for (int c = 0; c < image.channels; ++c) {
                double acc = 0.0;
                for (int k = 0; k < 4; ++k) {
                    if (w[k] == 0.0 || xs[k] < 0 || ys[k] < 0 || xs[k] >= image.width || ys[k] >= image.height) {
                        continue;
                    }
                    acc += w[k] * image.at(xs[k], ys[k], c);
                }
                out.at(x, y, c) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

namespace {

double cubic(double x) {
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

struct Taps {
    std::vector<int> first;
    std::vector<std::vector<double>> weights;
};

Taps resize_taps(int in, int out) {
    const double scale = static_cast<double>(out) / in;
    const double support = scale < 1.0 ? 2.0 / scale : 2.0;
    Taps taps;
    taps.first.resize(static_cast<std::size_t>(out));
    taps.weights.resize(static_cast<std::size_t>(out));
    for (int o = 0; o < out; ++o) {
        const double center = (o + 0.5) / scale - 0.5;
        const int lo = static_cast<int>(std::floor(center - support));
        const int hi = static_cast<int>(std::ceil(center + support));
        std::vector<double> w;
        double total = 0.0;
        for (int k = lo; k <= hi; ++k) {
            const double d = center - k;
            const double value = scale < 1.0 ? cubic(d * scale) : cubic(d);
            w.push_back(value);
            total += value;
        }
        for (double& x : w) x /= total;
        taps.first[static_cast<std::size_t>(o)] = lo;
        taps.weights[static_cast<std::size_t>(o)] = std::move(w);
    }
    return taps;
}

} // namespace

Image resize_bicubic(const Image& image, int width, int height) {
    if (width <= 0 || height <= 0) throw ValidationError("resize target must be positive");
    const Taps tx = resize_taps(image.width, width);
    const Taps ty = resize_taps(image.height, height);
    // horizontal pass
    std::vector<double> mid(static_cast<std::size_t>(width) * image.height * image.channels);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < width; ++x) {
            const auto& w = tx.weights[static_cast<std::size_t>(x)];
            for (int c = 0; c < image.channels; ++c) {
                double acc = 0.0;
                for (std::size_t k = 0; k < w.size(); ++k) {
                    const int sx = std::clamp(tx.first[static_cast<std::size_t>(x)] + static_cast<int>(k), 0,
                                              image.width - 1);
                    acc += w[k] * image.at(sx, y, c);
                }
                mid[(static_cast<std::size_t>(y) * width + x) * image.channels + c] = acc;
            }
        }
    }
    Image out(width, height, image.channels);
    for (int y = 0; y < height; ++y) {
        const auto& w = ty.weights[static_cast<std::size_t>(y)];
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < image.channels; ++c) {
                double acc = 0.0;
                for (std::size_t k = 0; k < w.size(); ++k) {
                    const int sy = std::clamp(ty.first[static_cast<std::size_t>(y)] + static_cast<int>(k), 0,
                                              image.height - 1);
                    acc += w[k] * mid[(static_cast<std::size_t>(sy) * width + x) * image.channels + c];
                }
                out.at(x, y, c) = static_cast<float>(std::clamp(acc, 0.0, 1.0));
            }
        }
    }
    return out;
}

double psnr(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
        throw ValidationError("psnr: image shapes differ");
    }
    double mse = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) {
        const double d = static_cast<double>(a.data[k]) - b.data[k];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

} // namespace bali
