#include "bali/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bali {

namespace {

// Radius beyond which kernel_value() < kHeatmapCutoff (all families are
// monotone in r2, so nothing outside this radius survives the flush).
double support_radius(const KernelSpec& spec) {
    const double log_cut = -std::log(kHeatmapCutoff);
    const double s = spec.sigma();
    switch (spec.family()) {
    case KernelFamily::Gaussian:
        return s * std::sqrt(2.0 * log_cut);
    case KernelFamily::GeneralizedError:
        return s * std::pow(2.0 * log_cut, 0.5 * (1.0 + spec.parameter()));
    case KernelFamily::StudentT: {
        const double df = spec.parameter();
        return s * std::sqrt(df * (std::exp(2.0 * log_cut / (df + 1.0)) - 1.0));
    }
    }
    return std::numeric_limits<double>::infinity();
}

} // namespace

KernelSpec::KernelSpec(KernelFamily family, double parameter, double sigma)
    : family_(family), parameter_(parameter), sigma_(sigma) {
    if (!std::isfinite(sigma) || sigma <= 0.0) throw ValidationError("kernel sigma must be > 0");
    if (!std::isfinite(parameter)) throw ValidationError("kernel parameter must be finite");
    if (family == KernelFamily::GeneralizedError && parameter <= -1.0) {
        throw ValidationError("GED shape parameter must be > -1");
    }
    if (family == KernelFamily::StudentT && parameter <= 0.0) {
        throw ValidationError("Student-t degrees of freedom must be > 0");
    }
}

KernelSpec KernelSpec::gaussian(double sigma) { return KernelSpec(KernelFamily::Gaussian, 0.0, sigma); }

KernelSpec KernelSpec::generalized_error(double shape, double sigma) {
    return KernelSpec(KernelFamily::GeneralizedError, shape, sigma);
}

KernelSpec KernelSpec::student_t(double dof, double sigma) {
    return KernelSpec(KernelFamily::StudentT, dof, sigma);
}

double kernel_value(double r2, const KernelSpec& spec) {
    const double s2 = spec.sigma() * spec.sigma();
    switch (spec.family()) {
    case KernelFamily::Gaussian:
        return std::exp(-r2 / (2.0 * s2));
    case KernelFamily::GeneralizedError:
        return std::exp(-0.5 * std::pow(r2 / s2, 1.0 / (1.0 + spec.parameter())));
    case KernelFamily::StudentT: {
        const double df = spec.parameter();
        return std::pow(1.0 + r2 / (df * s2), -0.5 * (df + 1.0));
    }
    }
    return 0.0;
}

HeatmapStack::HeatmapStack(HeatmapKind kind, GridSpec grid, std::vector<Plane> channels)
    : kind_(kind), grid_(grid), channels_(std::move(channels)), degenerate_(channels_.size(), false) {
    for (std::size_t c = 0; c < channels_.size(); ++c) {
        if (channels_[c].grid() != grid_) {
            throw ValidationError("heatmap channel " + std::to_string(c) + " does not match the stack grid");
        }
        for (float x : channels_[c].values()) {
            if (!std::isfinite(x) || x < 0.0f) {
                throw ValidationError("heatmap channel " + std::to_string(c) + " has a negative or non-finite value");
            }
        }
    }
}

bool HeatmapStack::any_degenerate() const noexcept {
    return std::find(degenerate_.begin(), degenerate_.end(), true) != degenerate_.end();
}

HeatmapStack render_landmark_heatmaps(const LandmarkSet& landmarks, const KernelSpec& spec, GridSpec grid) {
    const double radius = support_radius(spec) + 1.0;
    std::vector<Plane> channels;
    channels.reserve(landmarks.points().size());
    for (const Point2& p : landmarks.points()) {
        Plane plane(grid);
        const int i0 = std::max(0, static_cast<int>(std::floor(std::max(p.u - radius, -1.0))));
        const int j0 = std::max(0, static_cast<int>(std::floor(std::max(p.v - radius, -1.0))));
        const double i_hi = std::min(p.u + radius, static_cast<double>(grid.width() - 1));
        const double j_hi = std::min(p.v + radius, static_cast<double>(grid.height() - 1));
        if (i_hi >= 0.0 && j_hi >= 0.0) {
            const int i1 = static_cast<int>(std::ceil(i_hi));
            const int j1 = static_cast<int>(std::ceil(j_hi));
            for (int j = j0; j <= j1 && j < grid.height(); ++j) {
                for (int i = i0; i <= i1 && i < grid.width(); ++i) {
                    const double du = i - p.u;
                    const double dv = j - p.v;
                    const double value = kernel_value(du * du + dv * dv, spec);
                    if (value >= kHeatmapCutoff) plane.at(i, j) = static_cast<float>(value);
                }
            }
        }
        channels.push_back(std::move(plane));
    }
    return HeatmapStack(HeatmapKind::Landmark, grid, std::move(channels));
}

std::vector<Point2> interpolate_boundary(const LandmarkSet& landmarks, const std::vector<int>& boundary,
                                         double step) {
    if (!(step > 0.0) || step > 0.5) throw ValidationError("boundary interpolation step must be in (0, 0.5]");
    std::vector<Point2> chain;
    for (int idx : boundary) {
        if (idx < 0 || idx >= landmarks.size()) continue;
        const Point2& p = landmarks[idx];
        if (std::isfinite(p.u) && std::isfinite(p.v)) chain.push_back(p);
    }
    if (chain.size() < 2) return {};

    std::vector<double> cumulative(chain.size(), 0.0);
    for (std::size_t k = 1; k < chain.size(); ++k) {
        cumulative[k] = cumulative[k - 1] + std::hypot(chain[k].u - chain[k - 1].u, chain[k].v - chain[k - 1].v);
    }
    const double total = cumulative.back();
    if (total <= 0.0) return {chain.front()};

    const auto segments = static_cast<std::size_t>(std::ceil(total / step - 1e-9));
    std::vector<Point2> out;
    out.reserve(segments + 1);
    std::size_t seg = 1;
    for (std::size_t k = 0; k <= segments; ++k) {
        const double s = (k == segments) ? total : total * static_cast<double>(k) / static_cast<double>(segments);
        while (seg + 1 < chain.size() && cumulative[seg] < s) ++seg;
        const double len = cumulative[seg] - cumulative[seg - 1];
        const double t = len > 0.0 ? std::clamp((s - cumulative[seg - 1]) / len, 0.0, 1.0) : 0.0;
        const Point2& a = chain[seg - 1];
        const Point2& b = chain[seg];
        out.push_back({a.u + t * (b.u - a.u), a.v + t * (b.v - a.v)});
    }
    return out;
}

std::size_t BinaryMap::count() const {
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

BinaryMap rasterize_polyline(const std::vector<Point2>& polyline, GridSpec grid) {
    BinaryMap raster(grid);
    for (const Point2& p : polyline) {
        const double fi = std::floor(p.u + 0.5);
        const double fj = std::floor(p.v + 0.5);
        if (fi < 0.0 || fj < 0.0 || fi >= grid.width() || fj >= grid.height()) continue;
        raster.set(static_cast<int>(fi), static_cast<int>(fj));
    }
    return raster;
}

namespace {

// 1-D squared distance transform of a sampled function (lower envelope of
// parabolas rooted at each sample).
void squared_distance_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                         std::vector<double>& z) {
    const auto n = static_cast<int>(f.size());
    constexpr double inf = std::numeric_limits<double>::infinity();
    auto at = [](auto& vec, int idx) -> auto& { return vec[static_cast<std::size_t>(idx)]; };
    auto intersect = [&](int q, int p) {
        return ((at(f, q) + double(q) * q) - (at(f, p) + double(p) * p)) / (2.0 * (q - p));
    };

    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (at(f, q) == inf) continue;
        if (k < 0) {
            k = 0;
            at(v, 0) = q;
            at(z, 0) = -inf;
            at(z, 1) = inf;
            continue;
        }
        double s = intersect(q, at(v, k));
        while (s <= at(z, k)) {
            --k;
            s = intersect(q, at(v, k));
        }
        ++k;
        at(v, k) = q;
        at(z, k) = s;
        at(z, k + 1) = inf;
    }
    if (k < 0) {
        std::fill(d.begin(), d.end(), inf);
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (at(z, j + 1) < q) ++j;
        const int p = at(v, j);
        at(d, q) = double(q - p) * (q - p) + at(f, p);
    }
}

} // namespace

DistanceMap distance_transform(const BinaryMap& raster) {
    if (raster.count() == 0) throw ValidationError("distance transform of an empty raster (boundary absent)");
    const int w = raster.grid.width();
    const int h = raster.grid.height();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> sq(raster.grid.cells(), inf);
    for (std::size_t k = 0; k < sq.size(); ++k) {
        if (raster.cells[k]) sq[k] = 0.0;
    }

    const int longest = std::max(w, h);
    std::vector<double> f(static_cast<std::size_t>(longest)), d(static_cast<std::size_t>(longest));
    std::vector<int> v(static_cast<std::size_t>(longest));
    std::vector<double> z(static_cast<std::size_t>(longest) + 1);

    // columns
    f.resize(static_cast<std::size_t>(h));
    d.resize(static_cast<std::size_t>(h));
    for (int i = 0; i < w; ++i) {
        for (int j = 0; j < h; ++j) f[static_cast<std::size_t>(j)] = sq[raster.grid.index(i, j)];
        squared_distance_1d(f, d, v, z);
        for (int j = 0; j < h; ++j) sq[raster.grid.index(i, j)] = d[static_cast<std::size_t>(j)];
    }
    // rows
    f.resize(static_cast<std::size_t>(w));
    d.resize(static_cast<std::size_t>(w));
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) f[static_cast<std::size_t>(i)] = sq[raster.grid.index(i, j)];
        squared_distance_1d(f, d, v, z);
        for (int i = 0; i < w; ++i) sq[raster.grid.index(i, j)] = d[static_cast<std::size_t>(i)];
    }

    DistanceMap out{raster.grid, std::move(sq)};
    for (double& x : out.values) x = std::sqrt(x);
    return out;
}

void BoundaryOptions::validate() const {
    if (!std::isfinite(sigma) || sigma <= 0.0) throw ValidationError("boundary sigma must be > 0");
    if (!(step > 0.0) || step > 0.5) throw ValidationError("boundary interpolation step must be in (0, 0.5]");
    const double band = 2.0 * sigma;
    const double in_band_min = exponent == BoundaryExponent::Linear ? std::exp(-band / (2.0 * sigma * sigma))
                                                                    : std::exp(-band * band / (2.0 * sigma * sigma));
    if (!std::isfinite(xi) || xi < 0.0 || xi >= in_band_min) {
        throw ValidationError("boundary floor xi must lie in [0, " + std::to_string(in_band_min) + ")");
    }
}

double boundary_value(double dist, const BoundaryOptions& options) {
    if (!(dist < 2.0 * options.sigma)) return options.xi;
    const double e = options.exponent == BoundaryExponent::Linear ? dist : dist * dist;
    return std::exp(-e / (2.0 * options.sigma * options.sigma));
}

HeatmapStack render_boundary_heatmaps(const LandmarkSet& landmarks, const BoundaryScheme& scheme,
                                      const BoundaryOptions& options, GridSpec grid) {
    options.validate();
    scheme.validate(landmarks.size());
    std::vector<Plane> channels;
    std::vector<int> degenerate;
    channels.reserve(scheme.boundaries.size());
    for (std::size_t b = 0; b < scheme.boundaries.size(); ++b) {
        const auto polyline = interpolate_boundary(landmarks, scheme.boundaries[b], options.step);
        const BinaryMap raster = rasterize_polyline(polyline, grid);
        Plane plane(grid, static_cast<float>(options.xi));
        if (raster.count() == 0) {
            degenerate.push_back(static_cast<int>(b));
        } else {
            const DistanceMap dist = distance_transform(raster);
            for (std::size_t k = 0; k < dist.values.size(); ++k) {
                plane.values()[k] = static_cast<float>(boundary_value(dist.values[k], options));
            }
        }
        channels.push_back(std::move(plane));
    }
    HeatmapStack stack(HeatmapKind::Boundary, grid, std::move(channels));
    for (int b : degenerate) stack.mark_degenerate(b);
    return stack;
}

} // namespace bali
