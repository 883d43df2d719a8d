#include "bali/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace bali {

GridSpec::GridSpec(int width, int height) : width_(width), height_(height) {
    if (width < kMinSide || height < kMinSide) {
        throw ValidationError("grid must be at least " + std::to_string(kMinSide) + "x" +
                              std::to_string(kMinSide) + ", got " + std::to_string(width) + "x" +
                              std::to_string(height));
    }
}

Plane::Plane(GridSpec grid, std::vector<float> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.cells()) {
        throw ValidationError("plane has " + std::to_string(values_.size()) + " values, grid needs " +
                              std::to_string(grid_.cells()));
    }
}

int scheme_size(Scheme scheme) noexcept {
    switch (scheme) {
    case Scheme::IBUG68: return 68;
    case Scheme::WFLW98: return 98;
    case Scheme::AFLW19: return 19;
    case Scheme::Custom: return 0;
    }
    return 0;
}

std::string scheme_name(Scheme scheme) {
    switch (scheme) {
    case Scheme::IBUG68: return "IBUG68";
    case Scheme::WFLW98: return "WFLW98";
    case Scheme::AFLW19: return "AFLW19";
    case Scheme::Custom: return "CUSTOM";
    }
    return "CUSTOM";
}

Scheme scheme_for_count(int count) noexcept {
    for (Scheme s : {Scheme::IBUG68, Scheme::WFLW98, Scheme::AFLW19}) {
        if (scheme_size(s) == count) return s;
    }
    return Scheme::Custom;
}

LandmarkSet::LandmarkSet(Scheme scheme, std::vector<Point2> points, GridSpec grid)
    : scheme_(scheme), points_(std::move(points)), grid_(grid) {
    const int expected = scheme_size(scheme);
    if (scheme != Scheme::Custom && static_cast<int>(points_.size()) != expected) {
        throw ValidationError(scheme_name(scheme) + " needs " + std::to_string(expected) + " points, got " +
                              std::to_string(points_.size()));
    }
    for (std::size_t k = 0; k < points_.size(); ++k) {
        if (!std::isfinite(points_[k].u) || !std::isfinite(points_[k].v)) {
            throw ValidationError("landmark " + std::to_string(k) + " has a non-finite coordinate");
        }
    }
}

void BoundaryScheme::validate(int num_landmarks) const {
    std::vector<bool> covered(static_cast<std::size_t>(std::max(num_landmarks, 0)), false);
    for (std::size_t b = 0; b < boundaries.size(); ++b) {
        if (boundaries[b].size() < 2) {
            throw ValidationError("boundary " + std::to_string(b) + " has fewer than 2 landmarks");
        }
        for (int idx : boundaries[b]) {
            if (idx < 0 || idx >= num_landmarks) {
                throw ValidationError("boundary " + std::to_string(b) + " references landmark " +
                                      std::to_string(idx) + " outside [0, " + std::to_string(num_landmarks) + ")");
            }
            covered[static_cast<std::size_t>(idx)] = true;
        }
    }
    if (boundaries.empty()) return;
    for (std::size_t k = 0; k < covered.size(); ++k) {
        if (!covered[k]) throw ValidationError("landmark " + std::to_string(k) + " belongs to no boundary");
    }
}

AffineTransform::AffineTransform(const std::array<double, 6>& m) : m_(m) {
    for (double x : m_) {
        if (!std::isfinite(x)) throw ValidationError("affine transform has a non-finite entry");
    }
}

AffineTransform AffineTransform::rotation(double degrees, Point2 center) {
    const double rad = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    // p' = R (p - center) + center
    return AffineTransform({c, -s, center.u - c * center.u + s * center.v,
                            s, c, center.v - s * center.u - c * center.v});
}

AffineTransform AffineTransform::scaling(double factor, Point2 center) {
    return AffineTransform({factor, 0.0, center.u * (1.0 - factor),
                            0.0, factor, center.v * (1.0 - factor)});
}

AffineTransform AffineTransform::translation(double du, double dv) {
    return AffineTransform({1.0, 0.0, du, 0.0, 1.0, dv});
}

AffineTransform AffineTransform::horizontal_flip(int width) {
    return AffineTransform({-1.0, 0.0, static_cast<double>(width - 1), 0.0, 1.0, 0.0});
}

bool AffineTransform::invertible() const noexcept {
    const double det = determinant();
    return std::isfinite(det) && std::abs(det) > 1e-12;
}

Point2 AffineTransform::apply(Point2 p) const noexcept {
    return {m_[0] * p.u + m_[1] * p.v + m_[2], m_[3] * p.u + m_[4] * p.v + m_[5]};
}

Point2 AffineTransform::apply_vector(Point2 d) const noexcept {
    return {m_[0] * d.u + m_[1] * d.v, m_[3] * d.u + m_[4] * d.v};
}

AffineTransform AffineTransform::inverse() const {
    if (!invertible()) throw ValidationError("affine transform is not invertible");
    const double det = determinant();
    const double a = m_[4] / det;
    const double b = -m_[1] / det;
    const double d = -m_[3] / det;
    const double e = m_[0] / det;
    return AffineTransform({a, b, -(a * m_[2] + b * m_[5]), d, e, -(d * m_[2] + e * m_[5])});
}

AffineTransform AffineTransform::then(const AffineTransform& other) const noexcept {
    const auto& o = other.m_;
    AffineTransform out;
    out.m_ = {o[0] * m_[0] + o[1] * m_[3], o[0] * m_[1] + o[1] * m_[4], o[0] * m_[2] + o[1] * m_[5] + o[2],
              o[3] * m_[0] + o[4] * m_[3], o[3] * m_[1] + o[4] * m_[4], o[3] * m_[2] + o[4] * m_[5] + o[5]};
    return out;
}

FlipPermutation::FlipPermutation(std::vector<int> perm) : perm_(std::move(perm)) {
    const int n = static_cast<int>(perm_.size());
    for (int i = 0; i < n; ++i) {
        const int j = perm_[static_cast<std::size_t>(i)];
        if (j < 0 || j >= n) {
            throw ValidationError("flip permutation entry " + std::to_string(i) + " out of range");
        }
        if (perm_[static_cast<std::size_t>(j)] != i) {
            throw ValidationError("flip permutation is not an involution at index " + std::to_string(i));
        }
    }
}

FlipPermutation FlipPermutation::identity(int size) {
    std::vector<int> perm(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) perm[static_cast<std::size_t>(i)] = i;
    return FlipPermutation(std::move(perm));
}

LandmarkSet apply_affine(const AffineTransform& t, const LandmarkSet& landmarks) {
    if (!t.invertible()) throw ValidationError("apply_affine: transform is not invertible");
    std::vector<Point2> out;
    out.reserve(landmarks.points().size());
    for (const Point2& p : landmarks.points()) out.push_back(t.apply(p));
    return LandmarkSet(landmarks.scheme(), std::move(out), landmarks.grid());
}

LandmarkSet flip_landmarks(const LandmarkSet& landmarks, const FlipPermutation& perm, GridSpec grid) {
    if (perm.size() != landmarks.size()) {
        throw ValidationError("flip permutation has " + std::to_string(perm.size()) + " entries for " +
                              std::to_string(landmarks.size()) + " landmarks");
    }
    const double mirror = grid.width() - 1;
    std::vector<Point2> out(landmarks.points().size());
    for (int i = 0; i < landmarks.size(); ++i) {
        const Point2& src = landmarks[perm[i]];
        out[static_cast<std::size_t>(i)] = {mirror - src.u, src.v};
    }
    return LandmarkSet(landmarks.scheme(), std::move(out), grid);
}

LandmarkSet rescale_landmarks(const LandmarkSet& landmarks, GridSpec target) {
    const double su = static_cast<double>(target.width()) / landmarks.grid().width();
    const double sv = static_cast<double>(target.height()) / landmarks.grid().height();
    std::vector<Point2> out;
    out.reserve(landmarks.points().size());
    for (const Point2& p : landmarks.points()) out.push_back({(p.u + 0.5) * su - 0.5, (p.v + 0.5) * sv - 0.5});
    return LandmarkSet(landmarks.scheme(), std::move(out), target);
}

BoundaryScheme default_boundary_scheme(Scheme scheme) {
    if (scheme != Scheme::IBUG68) {
        throw ValidationError("no default boundary scheme for " + scheme_name(scheme) +
                              "; supported schemes: IBUG68");
    }
    auto range = [](int first, int last) {
        std::vector<int> out;
        for (int k = first; k <= last; ++k) out.push_back(k);
        return out;
    };
    BoundaryScheme b;
    b.boundaries = {
        range(0, 16),                      // contour
        range(17, 21),                     // left eyebrow
        range(22, 26),                     // right eyebrow
        range(27, 30),                     // nose bridge
        range(31, 35),                     // nose bottom
        {36, 37, 38, 39},                  // left upper eyelid
        {36, 41, 40, 39},                  // left lower eyelid
        {42, 43, 44, 45},                  // right upper eyelid
        {42, 47, 46, 45},                  // right lower eyelid
        range(48, 54),                     // upper lip, top
        {48, 60, 61, 62, 63, 64, 54},      // upper lip, bottom
        {60, 67, 66, 65, 64},              // lower lip, top
        {48, 59, 58, 57, 56, 55, 54},      // lower lip, bottom
    };
    return b;
}

FlipPermutation default_boundary_flip(Scheme scheme) {
    if (scheme != Scheme::IBUG68) {
        throw ValidationError("no default boundary scheme for " + scheme_name(scheme) +
                              "; supported schemes: IBUG68");
    }
    // Eyebrows and eyelids swap sides; contour, nose and lips are symmetric.
    return FlipPermutation({0, 2, 1, 3, 4, 7, 8, 5, 6, 9, 10, 11, 12});
}

} // namespace bali
