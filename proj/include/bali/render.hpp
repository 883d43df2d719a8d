#pragma once

// Colour-mapped views of heatmaps and offset fields. Confidences use the
// sequential map, signed offsets the diverging map centred on zero.

#include <optional>

#include "bali/field.hpp"
#include "bali/heatmap.hpp"
#include "bali/png_io.hpp"

namespace bali {

struct RenderStyle {
    /// Output pixels per grid cell (nearest-neighbour upscaling).
    int scale = 1;
    /// Stretch each confidence map so its maximum hits the top colour.
    bool normalize = true;
    /// Offset magnitude mapped to the ends of the diverging map; <= 0 means R + 0.5.
    double offset_range = 0.0;
    /// Draw cell -> landmark arrows on offset maps every `arrow_stride` cells.
    bool arrows = false;
    int arrow_stride = 2;
    /// Weight of the colour map when blending onto a background.
    double alpha = 0.6;
    void validate() const;
};

/// Elementwise maximum over channels.
Plane max_composite(const HeatmapStack& stack);

Rgb8Image render_confidence(const Plane& plane, const RenderStyle& style = {});

enum class OffsetAxis { U, V };

/// One landmark's offset plane; cells outside its support take the neutral colour.
Rgb8Image render_offsets(const BaliField& field, int channel, OffsetAxis axis, const RenderStyle& style = {});
/// All landmarks at once: each cell shows the shortest offset among the
/// channels that support it.
Rgb8Image render_offsets_composite(const BaliField& field, OffsetAxis axis, const RenderStyle& style = {});

/// alpha * overlay + (1 - alpha) * background, the background resized to the overlay.
Rgb8Image blend_onto(const Rgb8Image& overlay, const Image& background, double alpha);

} // namespace bali
