#pragma once

// Per-landmark offset fields: inside a (2R+1)^2 square around each
// landmark every cell stores the displacement from itself to the landmark,
// so cell + offset reproduces the landmark exactly.

#include <cmath>
#include <utility>
#include <vector>

#include "bali/core_types.hpp"
#include "bali/heatmap.hpp"

namespace bali {

class BaliField {
public:
    BaliField() = default;
    BaliField(GridSpec grid, int radius, std::vector<Plane> u_offsets, std::vector<Plane> v_offsets,
              std::vector<BinaryMap> support);

    const GridSpec& grid() const noexcept { return grid_; }
    int radius() const noexcept { return radius_; }
    int channel_count() const noexcept { return static_cast<int>(u_.size()); }

    const Plane& u(int c) const { return u_[static_cast<std::size_t>(c)]; }
    const Plane& v(int c) const { return v_[static_cast<std::size_t>(c)]; }
    const BinaryMap& support(int c) const { return support_[static_cast<std::size_t>(c)]; }
    Plane& u(int c) { return u_[static_cast<std::size_t>(c)]; }
    Plane& v(int c) { return v_[static_cast<std::size_t>(c)]; }

    const std::vector<Plane>& u_planes() const noexcept { return u_; }
    const std::vector<Plane>& v_planes() const noexcept { return v_; }
    const std::vector<BinaryMap>& supports() const noexcept { return support_; }

    /// Channel whose landmark lies too far off-grid to own any cell.
    bool empty_support(int c) const { return support(c).count() == 0; }

    friend bool operator==(const BaliField& a, const BaliField& b) {
        if (a.grid_ != b.grid_ || a.radius_ != b.radius_ || a.u_ != b.u_ || a.v_ != b.v_) return false;
        for (std::size_t c = 0; c < a.support_.size(); ++c) {
            if (a.support_[c].cells != b.support_[c].cells) return false;
        }
        return a.support_.size() == b.support_.size();
    }

private:
    GridSpec grid_;
    int radius_ = 5;
    std::vector<Plane> u_;
    std::vector<Plane> v_;
    std::vector<BinaryMap> support_;
};

/// Boundary confidences plus offset field on a shared grid.
struct BaliComposite {
    HeatmapStack boundary;
    BaliField field;
};

/// Grid cell nearest to `p`, rounding halves up on each axis.
inline std::pair<int, int> nearest_cell(Point2 p) {
    return {static_cast<int>(std::floor(p.u + 0.5)), static_cast<int>(std::floor(p.v + 0.5))};
}

BaliField encode_field(const LandmarkSet& landmarks, int radius, GridSpec grid);

struct EncodeOptions {
    GridSpec grid;
    KernelSpec kernel;
    BoundaryOptions boundary;
    int field_radius = 5;
};

struct EncodedSample {
    HeatmapStack landmarks;
    BaliComposite composite;

    /// landmark + boundary + 2 * offset planes
    int plane_count() const noexcept {
        return landmarks.channel_count() + composite.boundary.channel_count() + 2 * composite.field.channel_count();
    }
};

EncodedSample encode_composite(const LandmarkSet& landmarks, const BoundaryScheme& scheme,
                               const EncodeOptions& options);

} // namespace bali
