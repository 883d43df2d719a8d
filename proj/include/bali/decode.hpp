#pragma once

// Sub-pixel landmark recovery: coarse argmax on the landmark heatmap, a
// (2r+1)^2 crop around it, then a heatmap-weighted mean of cell + offset.

#include <optional>
#include <string>
#include <vector>

#include "bali/core_types.hpp"
#include "bali/field.hpp"
#include "bali/heatmap.hpp"

namespace bali {

enum class DecodeMode {
    FieldWeighted,     ///< cells vote for cell + offset
    HeatmapSoftArgmax, ///< offsets ignored (heatmap-only baseline)
};

struct DecodeConfig {
    int crop_radius = 3;
    DecodeMode mode = DecodeMode::FieldWeighted;
};

struct Cell {
    int i = 0;
    int j = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Inclusive cell rectangle.
struct CellRect {
    int i0 = 0, i1 = -1, j0 = 0, j1 = -1;

    int cell_count() const noexcept { return (i1 < i0 || j1 < j0) ? 0 : (i1 - i0 + 1) * (j1 - j0 + 1); }
};

/// Maximal cell, first in row-major order on ties. Empty when the channel has
/// no positive value.
std::optional<Cell> coarse_argmax(const Plane& heatmap);

CellRect crop_region(Cell peak, int radius, GridSpec grid);

/// Thrown when the crop carries no heatmap mass.
class NoMassError : public ValidationError {
public:
    explicit NoMassError(int channel)
        : ValidationError("no heatmap mass in the decode crop of channel " + std::to_string(channel)),
          channel_(channel) {}
    int channel() const noexcept { return channel_; }

private:
    int channel_;
};

/// Weighted mean over the crop. `u`/`v` may be null in HeatmapSoftArgmax mode.
/// Throws ValidationError when no peak exists and NoMassError when the crop
/// weight is <= 1e-12.
Point2 decode_landmark(const Plane& heatmap, const Plane* u, const Plane* v, const DecodeConfig& config,
                       int channel = 0);

enum class DecodeWarningKind { NoPeak, NoMass, CropExceedsField };

struct DecodeWarning {
    int channel = 0;
    DecodeWarningKind kind = DecodeWarningKind::NoPeak;
};

struct DecodeResult {
    LandmarkSet landmarks;
    std::vector<DecodeWarning> warnings;

    int count(DecodeWarningKind kind) const;
};

/// Decodes every channel; a channel that cannot be decoded falls back to the
/// grid centre and contributes a warning instead of aborting the set.
DecodeResult decode_all(const HeatmapStack& heatmaps, const BaliField& field, const DecodeConfig& config,
                        Scheme scheme = Scheme::Custom);
/// Heatmap-only variant (mode must be HeatmapSoftArgmax).
DecodeResult decode_all(const HeatmapStack& heatmaps, const DecodeConfig& config, Scheme scheme = Scheme::Custom);

} // namespace bali
