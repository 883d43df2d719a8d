#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <queue>
#include <random>

#include "bali/heatmap.hpp"

using namespace bali;

namespace {

double brute_distance(const BinaryMap& raster, int i, int j) {
    double best = std::numeric_limits<double>::infinity();
    for (int y = 0; y < raster.grid.height(); ++y) {
        for (int x = 0; x < raster.grid.width(); ++x) {
            if (raster.test(x, y)) best = std::min(best, std::hypot(double(x - i), double(y - j)));
        }
    }
    return best;
}

LandmarkSet single(Point2 p, GridSpec grid = GridSpec{}) { return LandmarkSet(Scheme::Custom, {p}, grid); }

} // namespace

TEST(KernelSpec, RejectsInvalidParameters) {
    EXPECT_THROW(KernelSpec::gaussian(0.0), ValidationError);
    EXPECT_THROW(KernelSpec::gaussian(-1.0), ValidationError);
    EXPECT_THROW(KernelSpec::generalized_error(-1.0, 1.5), ValidationError);
    EXPECT_NO_THROW(KernelSpec::generalized_error(-0.1, 1.5));
    EXPECT_THROW(KernelSpec::student_t(0.0, 1.5), ValidationError);
    EXPECT_NO_THROW(KernelSpec::student_t(1.0, 1.5));
}

TEST(KernelValue, PeakIsOneForEveryFamily) {
    for (const auto& spec : {KernelSpec::gaussian(1.5), KernelSpec::generalized_error(0.2, 1.5),
                             KernelSpec::generalized_error(-0.1, 2.0), KernelSpec::student_t(3.0, 1.5)}) {
        EXPECT_EQ(kernel_value(0.0, spec), 1.0);
    }
}

TEST(KernelValue, GaussianAtOneSigma) {
    EXPECT_NEAR(kernel_value(2.25, KernelSpec::gaussian(1.5)), 0.60653, 1e-5);
    EXPECT_DOUBLE_EQ(kernel_value(2.25, KernelSpec::gaussian(1.5)), std::exp(-0.5));
}

TEST(KernelValue, ClosedFormsMatchHandEvaluation) {
    const double s2 = 1.5 * 1.5;
    EXPECT_NEAR(kernel_value(4.0, KernelSpec::generalized_error(0.2, 1.5)),
                std::exp(-0.5 * std::pow(4.0 / s2, 1.0 / 1.2)), 1e-15);
    EXPECT_NEAR(kernel_value(4.0, KernelSpec::student_t(3.0, 1.5)), std::pow(1.0 + 4.0 / (3.0 * s2), -2.0), 1e-15);
}

TEST(KernelValue, GedWithZeroShapeIsTheGaussian) {
    const auto ged = KernelSpec::generalized_error(0.0, 1.5);
    const auto gauss = KernelSpec::gaussian(1.5);
    for (double r2 = 0.0; r2 <= 100.0; r2 += 0.37) EXPECT_NEAR(kernel_value(r2, ged), kernel_value(r2, gauss), 1e-12);
}

TEST(KernelValue, GedConvergesToGaussianForTinyShape) {
    const auto ged = KernelSpec::generalized_error(1e-8, 1.5);
    const auto gauss = KernelSpec::gaussian(1.5);
    double gap = 0.0;
    for (double r2 = 0.0; r2 <= 36.0; r2 += 0.01) gap = std::max(gap, std::abs(kernel_value(r2, ged) - kernel_value(r2, gauss)));
    EXPECT_LT(gap, 1e-6);
}

TEST(KernelValue, FamiliesAreMonotoneAndBounded) {
    for (const auto& spec : {KernelSpec::gaussian(1.5), KernelSpec::generalized_error(0.1, 1.5),
                             KernelSpec::generalized_error(-0.1, 1.5), KernelSpec::student_t(1.0, 1.5)}) {
        double prev = 1.0;
        for (double r2 = 0.0; r2 <= 50.0; r2 += 0.25) {
            const double k = kernel_value(r2, spec);
            EXPECT_LE(k, prev);
            EXPECT_GT(k, 0.0);
            EXPECT_LE(k, 1.0);
            prev = k;
        }
    }
}

TEST(RenderLandmarkHeatmaps, IntegerLandmarkPeaksAtItsCell) {
    const GridSpec g;
    const HeatmapStack h = render_landmark_heatmaps(single({30.0, 52.0}), KernelSpec::gaussian(1.5), g);
    ASSERT_EQ(h.channel_count(), 1);
    EXPECT_EQ(h.kind(), HeatmapKind::Landmark);
    EXPECT_EQ(h.channel(0).at(30, 52), 1.0f);
    for (float x : h.channel(0).values()) EXPECT_LE(x, 1.0f);
}

TEST(RenderLandmarkHeatmaps, SubpixelArgmaxIsTheNearestCell) {
    const HeatmapStack h = render_landmark_heatmaps(single({30.4, 52.7}), KernelSpec::gaussian(1.5), GridSpec{});
    int bi = -1, bj = -1;
    float best = -1.0f;
    for (int j = 0; j < 128; ++j) {
        for (int i = 0; i < 128; ++i) {
            if (h.channel(0).at(i, j) > best) {
                best = h.channel(0).at(i, j);
                bi = i;
                bj = j;
            }
        }
    }
    EXPECT_EQ(bi, 30);
    EXPECT_EQ(bj, 53);
}

TEST(RenderLandmarkHeatmaps, ValuesFollowTheKernelWithCutoff) {
    const auto spec = KernelSpec::student_t(3.0, 1.5);
    const HeatmapStack h = render_landmark_heatmaps(single({40.25, 70.5}), spec, GridSpec{});
    for (int j = 0; j < 128; ++j) {
        for (int i = 0; i < 128; ++i) {
            const double k = kernel_value((i - 40.25) * (i - 40.25) + (j - 70.5) * (j - 70.5), spec);
            const float expected = k < kHeatmapCutoff ? 0.0f : static_cast<float>(k);
            ASSERT_EQ(h.channel(0).at(i, j), expected) << i << "," << j;
        }
    }
}

TEST(RenderLandmarkHeatmaps, DeterministicAndOffGridIsZero) {
    const auto spec = KernelSpec::gaussian(1.5);
    const LandmarkSet l(Scheme::Custom, {{12.3, 99.9}, {-200.0, 40.0}}, GridSpec{});
    const HeatmapStack a = render_landmark_heatmaps(l, spec, GridSpec{});
    EXPECT_EQ(a, render_landmark_heatmaps(l, spec, GridSpec{}));
    for (float x : a.channel(1).values()) EXPECT_EQ(x, 0.0f);
}

TEST(RenderLandmarkHeatmaps, ArgmaxIsNearestCellForRandomInteriorLandmarks) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> coord(1.0, 126.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Point2 p{coord(rng), coord(rng)};
        const HeatmapStack h = render_landmark_heatmaps(single(p), KernelSpec::gaussian(1.5), GridSpec{});
        const int ni = static_cast<int>(std::floor(p.u + 0.5)), nj = static_cast<int>(std::floor(p.v + 0.5));
        const float peak = h.channel(0).at(ni, nj);
        for (float x : h.channel(0).values()) ASSERT_LE(x, peak);
    }
}

TEST(HeatmapStack, RejectsNegativeOrNonFiniteValues) {
    const GridSpec g(8, 8);
    Plane p(g);
    p.at(1, 1) = -0.5f;
    EXPECT_THROW(HeatmapStack(HeatmapKind::Landmark, g, {p}), ValidationError);
    p.at(1, 1) = std::numeric_limits<float>::quiet_NaN();
    EXPECT_THROW(HeatmapStack(HeatmapKind::Landmark, g, {p}), ValidationError);
    EXPECT_THROW(HeatmapStack(HeatmapKind::Landmark, g, {Plane(GridSpec(16, 8))}), ValidationError);
}

TEST(InterpolateBoundary, TwoPointsTenPixelsApart) {
    const LandmarkSet l(Scheme::Custom, {{0.0, 0.0}, {10.0, 0.0}}, GridSpec{});
    const auto poly = interpolate_boundary(l, {0, 1}, 0.5);
    ASSERT_EQ(poly.size(), 21u);
    for (std::size_t k = 0; k < poly.size(); ++k) {
        EXPECT_NEAR(poly[k].u, 0.5 * k, 1e-12);
        EXPECT_EQ(poly[k].v, 0.0);
    }
}

TEST(InterpolateBoundary, CollinearMidpointChangesNothing) {
    const LandmarkSet l(Scheme::Custom, {{3.0, 4.0}, {9.0, 12.0}, {15.0, 20.0}}, GridSpec{});
    const auto three = interpolate_boundary(l, {0, 1, 2}, 0.5);
    const auto two = interpolate_boundary(l, {0, 2}, 0.5);
    ASSERT_EQ(three.size(), two.size());
    for (std::size_t k = 0; k < two.size(); ++k) {
        EXPECT_NEAR(three[k].u, two[k].u, 1e-9);
        EXPECT_NEAR(three[k].v, two[k].v, 1e-9);
    }
}

TEST(InterpolateBoundary, ConsecutiveVerticesRespectTheStep) {
    const LandmarkSet l(Scheme::Custom, {{3.0, 4.0}, {40.7, 12.1}, {41.0, 80.0}, {10.0, 90.0}}, GridSpec{});
    const auto poly = interpolate_boundary(l, {0, 1, 2, 3}, 0.4);
    for (std::size_t k = 1; k < poly.size(); ++k) {
        EXPECT_LE(std::hypot(poly[k].u - poly[k - 1].u, poly[k].v - poly[k - 1].v), 0.4 + 1e-9);
    }
    EXPECT_EQ(poly.front(), (Point2{3.0, 4.0}));
    EXPECT_NEAR(poly.back().u, 10.0, 1e-9);
}

TEST(InterpolateBoundary, FewerThanTwoValidPointsIsEmpty) {
    const LandmarkSet l(Scheme::Custom, {{3.0, 4.0}}, GridSpec{});
    EXPECT_TRUE(interpolate_boundary(l, {0}, 0.5).empty());
}

TEST(RasterizePolyline, EyeRingIsConnected) {
    // closed eye contour from the upper and lower lids sharing both corners
    std::vector<Point2> points(68, Point2{64.0, 64.0});
    points[36] = {40.0, 50.0};
    points[37] = {44.0, 47.0};
    points[38] = {49.0, 47.0};
    points[39] = {53.0, 50.0};
    points[40] = {49.0, 53.0};
    points[41] = {44.0, 53.0};
    const LandmarkSet l(Scheme::IBUG68, points, GridSpec{});
    BinaryMap ring(GridSpec{});
    for (const auto& chain : {std::vector<int>{36, 37, 38, 39}, std::vector<int>{36, 41, 40, 39}}) {
        const BinaryMap part = rasterize_polyline(interpolate_boundary(l, chain, 0.5), GridSpec{});
        for (std::size_t c = 0; c < part.cells.size(); ++c) ring.cells[c] |= part.cells[c];
    }
    // flood fill over 8-neighbours from one set cell must reach every set cell
    std::vector<std::uint8_t> seen(ring.cells.size(), 0);
    std::queue<std::pair<int, int>> todo;
    todo.push({40, 50});
    ASSERT_TRUE(ring.test(40, 50));
    seen[ring.grid.index(40, 50)] = 1;
    std::size_t reached = 0;
    while (!todo.empty()) {
        auto [i, j] = todo.front();
        todo.pop();
        ++reached;
        for (int dj = -1; dj <= 1; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                const int x = i + di, y = j + dj;
                if (!ring.grid.contains(x, y) || !ring.test(x, y) || seen[ring.grid.index(x, y)]) continue;
                seen[ring.grid.index(x, y)] = 1;
                todo.push({x, y});
            }
        }
    }
    EXPECT_EQ(reached, ring.count());
    // a ring has an enclosed interior: the eye centre is not on the curve
    EXPECT_FALSE(ring.test(46, 50));
}

TEST(DistanceTransform, ThreeFourFive) {
    BinaryMap r(GridSpec(16, 16));
    r.set(5, 5);
    const DistanceMap d = distance_transform(r);
    EXPECT_DOUBLE_EQ(d.at(8, 9), 5.0);
    EXPECT_EQ(d.at(5, 5), 0.0);
}

TEST(DistanceTransform, EmptyRasterIsRejected) {
    EXPECT_THROW(distance_transform(BinaryMap(GridSpec(8, 8))), ValidationError);
}

TEST(DistanceTransform, MatchesBruteForceOnRandomRasters) {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 40; ++trial) {
        const int w = 8 + static_cast<int>(rng() % 25), h = 8 + static_cast<int>(rng() % 25);
        BinaryMap r(GridSpec(w, h));
        const double density = (trial % 4 + 1) * 0.02;
        std::bernoulli_distribution on(density);
        for (int j = 0; j < h; ++j)
            for (int i = 0; i < w; ++i)
                if (on(rng)) r.set(i, j);
        if (r.count() == 0) r.set(static_cast<int>(rng() % w), static_cast<int>(rng() % h));
        const DistanceMap d = distance_transform(r);
        for (int j = 0; j < h; ++j) {
            for (int i = 0; i < w; ++i) {
                const double expected = brute_distance(r, i, j);
                ASSERT_NEAR(d.at(i, j), expected, 1e-12) << w << "x" << h << " at " << i << "," << j;
                if (r.test(i, j)) ASSERT_EQ(d.at(i, j), 0.0);
            }
        }
    }
}

TEST(BoundaryValue, BandAndFloor) {
    BoundaryOptions o;
    o.sigma = 1.5;
    o.xi = 0.01;
    EXPECT_EQ(boundary_value(0.0, o), 1.0);
    EXPECT_NEAR(boundary_value(1.0, o), 0.80074, 1e-5);
    EXPECT_DOUBLE_EQ(boundary_value(1.0, o), std::exp(-1.0 / 4.5));
    EXPECT_EQ(boundary_value(3.0, o), 0.01);
    EXPECT_GT(boundary_value(std::nextafter(3.0, 0.0), o), 0.01);
    o.exponent = BoundaryExponent::Squared;
    EXPECT_DOUBLE_EQ(boundary_value(2.0, o), std::exp(-4.0 / 4.5));
}

TEST(BoundaryOptions, ValidationBounds) {
    BoundaryOptions o;
    EXPECT_NO_THROW(o.validate());
    o.step = 0.6;
    EXPECT_THROW(o.validate(), ValidationError);
    o = {};
    o.xi = -0.1;
    EXPECT_THROW(o.validate(), ValidationError);
    o.xi = 0.6; // above exp(-3/4.5) = 0.513
    EXPECT_THROW(o.validate(), ValidationError);
    o = {};
    o.sigma = 0.0;
    EXPECT_THROW(o.validate(), ValidationError);
}

TEST(RenderBoundaryHeatmaps, RecomputesFromBruteForceDistances) {
    const GridSpec g(48, 48);
    const LandmarkSet l(Scheme::Custom, {{5.0, 10.0}, {20.3, 14.8}, {40.0, 30.2}, {10.0, 40.0}}, g);
    const BoundaryScheme scheme{{{0, 1, 2}, {2, 3}}};
    BoundaryOptions o;
    o.xi = 0.02;
    const HeatmapStack h = render_boundary_heatmaps(l, scheme, o, g);
    ASSERT_EQ(h.channel_count(), 2);
    EXPECT_EQ(h.kind(), HeatmapKind::Boundary);
    EXPECT_FALSE(h.any_degenerate());
    for (int k = 0; k < 2; ++k) {
        const BinaryMap raster = rasterize_polyline(interpolate_boundary(l, scheme.boundaries[k], o.step), g);
        for (int j = 0; j < 48; ++j) {
            for (int i = 0; i < 48; ++i) {
                const double dist = brute_distance(raster, i, j);
                const double expected = dist < 2 * o.sigma ? std::exp(-dist / (2 * o.sigma * o.sigma)) : o.xi;
                ASSERT_NEAR(h.channel(k).at(i, j), expected, 1e-6);
                if (raster.test(i, j)) ASSERT_EQ(h.channel(k).at(i, j), 1.0f);
            }
        }
    }
}

TEST(RenderBoundaryHeatmaps, DegenerateBoundaryIsFlaggedAndFlat) {
    const GridSpec g(32, 32);
    std::vector<Point2> pts{{5.0, 5.0}, {-500.0, -500.0}, {-600.0, -500.0}};
    const LandmarkSet l(Scheme::Custom, pts, g);
    BoundaryOptions o;
    o.xi = 0.05;
    const HeatmapStack h = render_boundary_heatmaps(l, BoundaryScheme{{{1, 2}, {0, 1}}}, o, g);
    ASSERT_TRUE(h.any_degenerate());
    EXPECT_TRUE(h.degenerate()[0]);
    for (float x : h.channel(0).values()) EXPECT_FLOAT_EQ(x, 0.05f);
}
