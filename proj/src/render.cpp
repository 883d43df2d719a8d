#include "bali/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bali/tables.hpp"

namespace bali {

void RenderStyle::validate() const {
    if (scale < 1 || scale > 64) throw ValidationError("render scale must be in [1, 64]");
    if (!std::isfinite(offset_range)) throw ValidationError("offset range must be finite");
    if (arrow_stride < 1) throw ValidationError("arrow stride must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("blend alpha must be in [0, 1]");
}

Plane max_composite(const HeatmapStack& stack) {
    Plane out(stack.grid());
    for (const Plane& p : stack.channels()) {
        for (std::size_t k = 0; k < out.values().size(); ++k) out.values()[k] = std::max(out.values()[k], p.values()[k]);
    }
    return out;
}

namespace {

int colour_index(double t) {
    return static_cast<int>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
}

Rgb8Image paint(GridSpec grid, int scale, const auto& colour_of) {
    Rgb8Image out(grid.width() * scale, grid.height() * scale);
    for (int j = 0; j < grid.height(); ++j) {
        for (int i = 0; i < grid.width(); ++i) {
            const Rgb c = colour_of(i, j);
            for (int y = j * scale; y < (j + 1) * scale; ++y) {
                for (int x = i * scale; x < (i + 1) * scale; ++x) std::copy(c.begin(), c.end(), out.pixel(x, y));
            }
        }
    }
    return out;
}

void draw_line(Rgb8Image& img, double x0, double y0, double x1, double y1, const Rgb& colour) {
    const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))));
    for (int s = 0; s <= steps; ++s) {
        const double t = static_cast<double>(s) / steps;
        const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
        const int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
        if (x >= 0 && y >= 0 && x < img.width && y < img.height) std::copy(colour.begin(), colour.end(), img.pixel(x, y));
    }
}

void draw_arrow(Rgb8Image& img, int scale, double i, double j, double du, double dv) {
    const Rgb black{0, 0, 0};
    auto px = [scale](double c) { return (c + 0.5) * scale - 0.5; };
    const double x0 = px(i), y0 = px(j), x1 = px(i + du), y1 = px(j + dv);
    draw_line(img, x0, y0, x1, y1, black);
    const double len = std::hypot(x1 - x0, y1 - y0);
    if (len < 1.0) return;
    const double head = std::min(0.35 * len, 1.5 * scale);
    const double ux = (x1 - x0) / len, uy = (y1 - y0) / len;
    for (double side : {-1.0, 1.0}) {
        const double c = std::cos(0.5), s = std::sin(0.5) * side;
        draw_line(img, x1, y1, x1 - head * (c * ux - s * uy), y1 - head * (s * ux + c * uy), black);
    }
}

double resolve_range(const BaliField& field, const RenderStyle& style) {
    return style.offset_range > 0.0 ? style.offset_range : field.radius() + 0.5;
}

Rgb8Image offsets_image(const BaliField& field, const RenderStyle& style, OffsetAxis axis,
                        const std::vector<int>& channels) {
    style.validate();
    const GridSpec grid = field.grid();
    const double range = resolve_range(field, style);
    const Colormap& map = diverging_colormap();
    // per cell: chosen channel or -1
    std::vector<int> owner(grid.cells(), -1);
    std::vector<double> best(grid.cells(), std::numeric_limits<double>::infinity());
    for (int c : channels) {
        for (std::size_t k = 0; k < grid.cells(); ++k) {
            if (!field.support(c).cells[k]) continue;
            const double n = std::hypot(field.u(c).values()[k], field.v(c).values()[k]);
            if (n < best[k]) {
                best[k] = n;
                owner[k] = c;
            }
        }
    }
    auto value = [&](std::size_t k) {
        const int c = owner[k];
        if (c < 0) return 0.0;
        return static_cast<double>(axis == OffsetAxis::U ? field.u(c).values()[k] : field.v(c).values()[k]);
    };
    Rgb8Image img = paint(grid, style.scale, [&](int i, int j) {
        return map[static_cast<std::size_t>(colour_index(0.5 + 0.5 * value(grid.index(i, j)) / range))];
    });
    if (style.arrows) {
        for (int j = 0; j < grid.height(); j += style.arrow_stride) {
            for (int i = 0; i < grid.width(); i += style.arrow_stride) {
                const int c = owner[grid.index(i, j)];
                if (c < 0) continue;
                draw_arrow(img, style.scale, i, j, field.u(c).at(i, j), field.v(c).at(i, j));
            }
        }
    }
    return img;
}

} // namespace

Rgb8Image render_confidence(const Plane& plane, const RenderStyle& style) {
    style.validate();
    double peak = 1.0;
    if (style.normalize) {
        const auto it = std::max_element(plane.values().begin(), plane.values().end());
        peak = (it == plane.values().end() || *it <= 0.0f) ? 1.0 : *it;
    }
    const Colormap& map = sequential_colormap();
    return paint(plane.grid(), style.scale, [&](int i, int j) {
        return map[static_cast<std::size_t>(colour_index(plane.at(i, j) / peak))];
    });
}

Rgb8Image render_offsets(const BaliField& field, int channel, OffsetAxis axis, const RenderStyle& style) {
    if (channel < 0 || channel >= field.channel_count()) throw ValidationError("offset channel out of range");
    return offsets_image(field, style, axis, {channel});
}

Rgb8Image render_offsets_composite(const BaliField& field, OffsetAxis axis, const RenderStyle& style) {
    std::vector<int> all(static_cast<std::size_t>(field.channel_count()));
    for (int c = 0; c < field.channel_count(); ++c) all[static_cast<std::size_t>(c)] = c;
    return offsets_image(field, style, axis, all);
}

Rgb8Image blend_onto(const Rgb8Image& overlay, const Image& background, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("blend alpha must be in [0, 1]");
    Image bg = background;
    if (bg.width != overlay.width || bg.height != overlay.height) bg = resize_bicubic(bg, overlay.width, overlay.height);
    const Rgb8Image base = to_rgb8(bg);
    Rgb8Image out(overlay.width, overlay.height);
    for (std::size_t k = 0; k < out.rgb.size(); ++k) {
        out.rgb[k] = static_cast<std::uint8_t>(std::lround(alpha * overlay.rgb[k] + (1.0 - alpha) * base.rgb[k]));
    }
    return out;
}

} // namespace bali
