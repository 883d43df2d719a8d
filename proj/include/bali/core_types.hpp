#pragma once

// Shared geometric vocabulary: output grids, landmark sets, boundary
// partitions, affine maps and left/right flip permutations.
//
// Coordinates are (u, v) = (column, row) with the origin at the centre of
// pixel (0, 0). A grid cell (i, j) is addressed as (column, row).

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "bali/errors.hpp"

namespace bali {

class GridSpec {
public:
    static constexpr int kMinSide = 8;

    GridSpec() = default;
    GridSpec(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t cells() const noexcept { return static_cast<std::size_t>(width_) * height_; }

    bool contains(int i, int j) const noexcept { return i >= 0 && j >= 0 && i < width_ && j < height_; }
    std::size_t index(int i, int j) const noexcept { return static_cast<std::size_t>(j) * width_ + i; }

    double center_u() const noexcept { return 0.5 * (width_ - 1); }
    double center_v() const noexcept { return 0.5 * (height_ - 1); }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    int width_ = 128;
    int height_ = 128;
};

/// Single-channel H x W float map indexed (column, row).
class Plane {
public:
    Plane() = default;
    explicit Plane(GridSpec grid, float fill = 0.0f) : grid_(grid), values_(grid.cells(), fill) {}
    Plane(GridSpec grid, std::vector<float> values);

    const GridSpec& grid() const noexcept { return grid_; }
    int width() const noexcept { return grid_.width(); }
    int height() const noexcept { return grid_.height(); }

    float& at(int i, int j) { return values_[grid_.index(i, j)]; }
    float at(int i, int j) const { return values_[grid_.index(i, j)]; }

    std::vector<float>& values() noexcept { return values_; }
    const std::vector<float>& values() const noexcept { return values_; }

    friend bool operator==(const Plane&, const Plane&) = default;

private:
    GridSpec grid_;
    std::vector<float> values_;
};

struct Point2 {
    double u = 0.0;
    double v = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

enum class Scheme { IBUG68, WFLW98, AFLW19, Custom };

/// Landmark count of a named scheme; 0 for Custom.
int scheme_size(Scheme scheme) noexcept;
std::string scheme_name(Scheme scheme);
/// Named scheme whose size is `count`, else Custom.
Scheme scheme_for_count(int count) noexcept;

class LandmarkSet {
public:
    LandmarkSet() = default;
    LandmarkSet(Scheme scheme, std::vector<Point2> points, GridSpec grid);

    Scheme scheme() const noexcept { return scheme_; }
    const std::vector<Point2>& points() const noexcept { return points_; }
    const GridSpec& grid() const noexcept { return grid_; }
    int size() const noexcept { return static_cast<int>(points_.size()); }
    const Point2& operator[](int index) const { return points_[static_cast<std::size_t>(index)]; }

    friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;

private:
    Scheme scheme_ = Scheme::Custom;
    std::vector<Point2> points_;
    GridSpec grid_;
};

/// Ordered landmark chains, one per facial boundary curve.
struct BoundaryScheme {
    std::vector<std::vector<int>> boundaries;

    int count() const noexcept { return static_cast<int>(boundaries.size()); }
    /// Throws ValidationError unless every index is < num_landmarks, every
    /// boundary has at least two indices and every landmark is covered. An
    /// empty scheme (no boundary channels) is always valid.
    void validate(int num_landmarks) const;
};

/// Maps (u, v, 1) to (a*u + b*v + c, d*u + e*v + f).
class AffineTransform {
public:
    AffineTransform() = default;
    explicit AffineTransform(const std::array<double, 6>& m);

    static AffineTransform identity() { return AffineTransform(); }
    /// Counter-clockwise in (u, v) axes about `center`; appears clockwise on
    /// screen because v grows downward.
    static AffineTransform rotation(double degrees, Point2 center);
    static AffineTransform scaling(double factor, Point2 center);
    static AffineTransform translation(double du, double dv);
    /// u -> (width - 1) - u.
    static AffineTransform horizontal_flip(int width);

    const std::array<double, 6>& matrix() const noexcept { return m_; }
    double determinant() const noexcept { return m_[0] * m_[4] - m_[1] * m_[3]; }
    bool invertible() const noexcept;

    Point2 apply(Point2 p) const noexcept;
    /// Linear part only (for displacement vectors).
    Point2 apply_vector(Point2 d) const noexcept;
    AffineTransform inverse() const;
    /// `other` applied after `*this`.
    AffineTransform then(const AffineTransform& other) const noexcept;

private:
    std::array<double, 6> m_{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};
};

/// Index permutation pairing mirrored landmarks; always an involution.
class FlipPermutation {
public:
    FlipPermutation() = default;
    explicit FlipPermutation(std::vector<int> perm);

    static FlipPermutation identity(int size);

    const std::vector<int>& perm() const noexcept { return perm_; }
    int size() const noexcept { return static_cast<int>(perm_.size()); }
    int operator[](int index) const { return perm_[static_cast<std::size_t>(index)]; }

private:
    std::vector<int> perm_;
};

LandmarkSet apply_affine(const AffineTransform& t, const LandmarkSet& landmarks);

/// Mirrors u about the vertical centre line of `grid`, then reorders points
/// so that point i of the result is mirrored point perm[i] of the input.
LandmarkSet flip_landmarks(const LandmarkSet& landmarks, const FlipPermutation& perm, GridSpec grid);

/// Maps points to another grid covering the same field of view
/// (u' = (u + 0.5) * W'/W - 0.5, likewise for v).
LandmarkSet rescale_landmarks(const LandmarkSet& landmarks, GridSpec target);

/// 13-boundary partition for IBUG68; throws ValidationError for other schemes.
BoundaryScheme default_boundary_scheme(Scheme scheme);

/// Channel permutation of default_boundary_scheme() under a mirror flip.
FlipPermutation default_boundary_flip(Scheme scheme);

} // namespace bali
