#include "bali/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bali {

BaliField::BaliField(GridSpec grid, int radius, std::vector<Plane> u_offsets, std::vector<Plane> v_offsets,
                     std::vector<BinaryMap> support)
    : grid_(grid), radius_(radius), u_(std::move(u_offsets)), v_(std::move(v_offsets)), support_(std::move(support)) {
    if (radius_ < 1) throw ValidationError("field radius must be >= 1");
    if (u_.size() != v_.size() || u_.size() != support_.size()) {
        throw ValidationError("field u/v/support channel counts differ");
    }
    for (std::size_t c = 0; c < u_.size(); ++c) {
        if (u_[c].grid() != grid_ || v_[c].grid() != grid_ || support_[c].grid != grid_) {
            throw ValidationError("field channel " + std::to_string(c) + " does not match the field grid");
        }
    }
}

BaliField encode_field(const LandmarkSet& landmarks, int radius, GridSpec grid) {
    if (radius < 1) throw ValidationError("field radius must be >= 1, got " + std::to_string(radius));
    std::vector<Plane> us, vs;
    std::vector<BinaryMap> supports;
    us.reserve(landmarks.points().size());
    vs.reserve(landmarks.points().size());
    supports.reserve(landmarks.points().size());
    for (const Point2& p : landmarks.points()) {
        Plane u(grid), v(grid);
        BinaryMap support(grid);
        const auto [ci, cj] = nearest_cell(p);
        const int i0 = std::max(0, ci - radius);
        const int i1 = std::min(grid.width() - 1, ci + radius);
        const int j0 = std::max(0, cj - radius);
        const int j1 = std::min(grid.height() - 1, cj + radius);
        for (int j = j0; j <= j1; ++j) {
            for (int i = i0; i <= i1; ++i) {
                u.at(i, j) = static_cast<float>(p.u - i);
                v.at(i, j) = static_cast<float>(p.v - j);
                support.set(i, j);
            }
        }
        us.push_back(std::move(u));
        vs.push_back(std::move(v));
        supports.push_back(std::move(support));
    }
    return BaliField(grid, radius, std::move(us), std::move(vs), std::move(supports));
}

EncodedSample encode_composite(const LandmarkSet& landmarks, const BoundaryScheme& scheme,
                               const EncodeOptions& options) {
    if (landmarks.grid() != options.grid) {
        throw ValidationError("landmark set grid does not match the encode grid");
    }
    return EncodedSample{
        render_landmark_heatmaps(landmarks, options.kernel, options.grid),
        BaliComposite{render_boundary_heatmaps(landmarks, scheme, options.boundary, options.grid),
                      encode_field(landmarks, options.field_radius, options.grid)},
    };
}

} // namespace bali
