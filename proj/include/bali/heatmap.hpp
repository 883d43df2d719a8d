#pragma once

// Ground-truth landmark heatmaps (radial kernels peaked at each landmark) and
// boundary heatmaps built from the distance transform of rasterised
// boundary curves.

#include <cstdint>
#include <vector>

#include "bali/core_types.hpp"

namespace bali {

enum class KernelFamily { Gaussian, GeneralizedError, StudentT };

/// Peak-normalised radial kernel. Parameters are validated on construction.
class KernelSpec {
public:
    KernelSpec() = default;

    static KernelSpec gaussian(double sigma);
    /// Generalised error distribution; `shape` = 0 is the Gaussian.
    static KernelSpec generalized_error(double shape, double sigma);
    /// Student-t with `dof` degrees of freedom; tends to the Gaussian as dof grows.
    static KernelSpec student_t(double dof, double sigma);

    KernelFamily family() const noexcept { return family_; }
    double sigma() const noexcept { return sigma_; }
    /// GED shape d or Student-t degrees of freedom; unused for Gaussian.
    double parameter() const noexcept { return parameter_; }

private:
    KernelSpec(KernelFamily family, double parameter, double sigma);

    KernelFamily family_ = KernelFamily::Gaussian;
    double parameter_ = 0.0;
    double sigma_ = 1.5;
};

/// Kernel value at squared radius `r2` (px^2); 1 at r2 = 0.
double kernel_value(double r2, const KernelSpec& spec);

enum class HeatmapKind { Landmark, Boundary };

class HeatmapStack {
public:
    HeatmapStack() = default;
    /// Channels must share `grid` and hold finite, non-negative values.
    HeatmapStack(HeatmapKind kind, GridSpec grid, std::vector<Plane> channels);

    HeatmapKind kind() const noexcept { return kind_; }
    const GridSpec& grid() const noexcept { return grid_; }
    int channel_count() const noexcept { return static_cast<int>(channels_.size()); }
    const Plane& channel(int c) const { return channels_[static_cast<std::size_t>(c)]; }
    Plane& channel(int c) { return channels_[static_cast<std::size_t>(c)]; }
    const std::vector<Plane>& channels() const noexcept { return channels_; }

    /// Per-channel flag: the channel could not be rendered (degenerate boundary).
    const std::vector<bool>& degenerate() const noexcept { return degenerate_; }
    bool any_degenerate() const noexcept;
    void mark_degenerate(int c) { degenerate_[static_cast<std::size_t>(c)] = true; }

    friend bool operator==(const HeatmapStack&, const HeatmapStack&) = default;

private:
    HeatmapKind kind_ = HeatmapKind::Landmark;
    GridSpec grid_;
    std::vector<Plane> channels_;
    std::vector<bool> degenerate_;
};

/// Kernel values below this are stored as exact zeros.
inline constexpr double kHeatmapCutoff = 1e-4;

HeatmapStack render_landmark_heatmaps(const LandmarkSet& landmarks, const KernelSpec& spec, GridSpec grid);

/// Uniformly resampled (by arc length) chain through the boundary's landmarks.
/// Consecutive vertices are at most `step` apart. Returns an empty polyline
/// when fewer than two of the referenced landmarks are finite.
std::vector<Point2> interpolate_boundary(const LandmarkSet& landmarks, const std::vector<int>& boundary,
                                         double step);

struct BinaryMap {
    GridSpec grid;
    std::vector<std::uint8_t> cells;

    explicit BinaryMap(GridSpec g) : grid(g), cells(g.cells(), 0) {}
    bool test(int i, int j) const { return cells[grid.index(i, j)] != 0; }
    void set(int i, int j) { cells[grid.index(i, j)] = 1; }
    std::size_t count() const;
};

/// Marks the cell nearest to every vertex (round half up per axis) that
/// falls inside the grid.
BinaryMap rasterize_polyline(const std::vector<Point2>& polyline, GridSpec grid);

struct DistanceMap {
    GridSpec grid;
    std::vector<double> values;

    double at(int i, int j) const { return values[grid.index(i, j)]; }
};

/// Exact Euclidean distance from every cell to the nearest set cell
/// (separable lower-envelope transform). Throws ValidationError on an empty raster.
DistanceMap distance_transform(const BinaryMap& raster);

enum class BoundaryExponent { Linear, Squared };

struct BoundaryOptions {
    double sigma = 1.5;
    double xi = 0.0;
    BoundaryExponent exponent = BoundaryExponent::Linear;
    double step = 0.5;

    /// Throws unless sigma > 0, step in (0, 0.5] and 0 <= xi < in-band minimum.
    void validate() const;
};

/// Boundary confidence from distance `dist`: exp(-dist / (2 sigma^2)) inside the
/// 2 sigma band (dist^2 with the Squared exponent), xi outside.
double boundary_value(double dist, const BoundaryOptions& options);

HeatmapStack render_boundary_heatmaps(const LandmarkSet& landmarks, const BoundaryScheme& scheme,
                                      const BoundaryOptions& options, GridSpec grid);

} // namespace bali
