#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bali/decode.hpp"
#include "bali/field.hpp"
#include "bali/metrics.hpp"

using namespace bali;

namespace {

LandmarkSet synthetic_face(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coord(20.0, 108.0);
    std::vector<Point2> pts(68);
    for (auto& p : pts) p = {coord(rng), coord(rng)};
    pts[36] = {39.0, 50.0};
    pts[45] = {89.0, 50.0}; // outer corners 50 px apart
    return LandmarkSet(Scheme::IBUG68, pts, GridSpec{});
}

LandmarkSet shifted(const LandmarkSet& l, double du, double dv) {
    std::vector<Point2> pts = l.points();
    for (auto& p : pts) p = {p.u + du, p.v + dv};
    return LandmarkSet(l.scheme(), pts, l.grid());
}

double riemann_auc(const std::vector<double>& errors, double tau, int n) {
    double area = 0.0;
    for (int k = 0; k < n; ++k) {
        const double x = (k + 0.5) * tau / n;
        int below = 0;
        for (double e : errors) below += e <= x ? 1 : 0;
        area += static_cast<double>(below) / errors.size();
    }
    return area / n;
}

const Normalization kInterocular{NormalizationKind::Interocular, std::nullopt};

} // namespace

TEST(Nme, IdenticalIsZero) {
    std::mt19937_64 rng(1);
    const LandmarkSet gt = synthetic_face(rng);
    EXPECT_EQ(nme(gt, gt, kInterocular), 0.0);
}

TEST(Nme, EveryLandmarkOffByTheNormaliser) {
    const GridSpec g;
    const LandmarkSet gt(Scheme::Custom, {{10.0, 10.0}, {30.0, 40.0}}, g);
    const LandmarkSet pred(Scheme::Custom, {{10.0 + 5.0 * 0.6, 10.0 + 5.0 * 0.8}, {30.0, 35.0}}, g);
    const Normalization box{NormalizationKind::BoxGeomean, BoundingBox{0, 0, 5.0, 5.0}};
    EXPECT_NEAR(nme(pred, gt, box), 1.0, 1e-12);
}

TEST(Nme, ThreeFourShiftOverFifty) {
    std::mt19937_64 rng(2);
    const LandmarkSet gt = synthetic_face(rng);
    EXPECT_NEAR(normalization_distance(gt, kInterocular), 50.0, 1e-12);
    EXPECT_NEAR(nme(shifted(gt, 3.0, 4.0), gt, kInterocular), 0.1, 1e-12);
}

TEST(Nme, FourNormalisers) {
    std::mt19937_64 rng(3);
    const LandmarkSet gt = synthetic_face(rng);
    Point2 left{0, 0}, right{0, 0};
    for (int k = 36; k < 42; ++k) left = {left.u + gt[k].u / 6, left.v + gt[k].v / 6};
    for (int k = 42; k < 48; ++k) right = {right.u + gt[k].u / 6, right.v + gt[k].v / 6};
    EXPECT_NEAR(normalization_distance(gt, {NormalizationKind::Interpupil, std::nullopt}),
                std::hypot(left.u - right.u, left.v - right.v), 1e-9);
    const BoundingBox b{3.0, 4.0, 60.0, 80.0};
    EXPECT_NEAR(normalization_distance(gt, {NormalizationKind::BoxGeomean, b}), std::sqrt(4800.0), 1e-12);
    EXPECT_NEAR(normalization_distance(gt, {NormalizationKind::BoxDiagonal, b}), 100.0, 1e-12);
}

TEST(Nme, Rejections) {
    std::mt19937_64 rng(4);
    const LandmarkSet gt = synthetic_face(rng);
    EXPECT_THROW(normalization_distance(gt, {NormalizationKind::BoxGeomean, std::nullopt}), ValidationError);
    EXPECT_THROW(normalization_distance(gt, {NormalizationKind::BoxDiagonal, BoundingBox{0, 0, 0, 0}}), ValidationError);
    std::vector<Point2> pts = gt.points();
    pts[45] = pts[36];
    EXPECT_THROW(nme(gt, LandmarkSet(Scheme::IBUG68, pts, gt.grid()), kInterocular), ValidationError);
    const LandmarkSet custom(Scheme::Custom, {{1.0, 1.0}, {5.0, 5.0}}, GridSpec{});
    EXPECT_THROW(nme(custom, custom, kInterocular), ValidationError);
    EXPECT_THROW(nme(LandmarkSet(Scheme::AFLW19, std::vector<Point2>(19), GridSpec{}), gt, kInterocular),
                 ValidationError);
}

TEST(Nme, SimilarityInvariance) {
    std::mt19937_64 rng(5);
    const LandmarkSet gt = synthetic_face(rng);
    std::normal_distribution<double> noise(0.0, 2.0);
    std::vector<Point2> pp = gt.points();
    for (auto& p : pp) p = {p.u + noise(rng), p.v + noise(rng)};
    const LandmarkSet pred(Scheme::IBUG68, pp, gt.grid());
    const AffineTransform t =
        AffineTransform::rotation(33.0, {60.0, 70.0}).then(AffineTransform::scaling(1.7, {0.0, 0.0})).then(
            AffineTransform::translation(-12.0, 5.5));
    for (auto kind : {NormalizationKind::Interocular, NormalizationKind::Interpupil}) {
        const double a = nme(pred, gt, {kind, std::nullopt});
        const double b = nme(apply_affine(t, pred), apply_affine(t, gt), {kind, std::nullopt});
        EXPECT_LT(std::abs(a - b) / a, 1e-9);
    }
    // box kinds: scale the box with the face
    const BoundingBox box{10, 10, 80, 90};
    const double a = nme(pred, gt, {NormalizationKind::BoxDiagonal, box});
    const BoundingBox scaled{0, 0, 80 * 1.7, 90 * 1.7};
    const double b = nme(apply_affine(t, pred), apply_affine(t, gt), {NormalizationKind::BoxDiagonal, scaled});
    EXPECT_LT(std::abs(a - b) / a, 1e-9);
}

TEST(Auc, HandValues) {
    const std::vector<double> zeros{0.0, 0.0, 0.0};
    EXPECT_EQ(auc(zeros, 0.08), 1.0);
    const std::vector<double> big{0.09, 0.5};
    EXPECT_EQ(auc(big, 0.08), 0.0);
    const std::vector<double> two{0.02, 0.06};
    EXPECT_NEAR(auc(two, 0.08), 0.5, 1e-15);
    EXPECT_NEAR(riemann_auc(two, 0.08, 1000000), 0.5, 1e-5);
    EXPECT_THROW(auc(std::vector<double>{}, 0.08), ValidationError);
    EXPECT_THROW(auc(two, 0.0), ValidationError);
}

TEST(Auc, MatchesRiemannOracleOnRandomLists) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> e(0.0, 0.15);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> errors(20);
        for (double& x : errors) x = e(rng);
        EXPECT_NEAR(auc(errors, 0.1), riemann_auc(errors, 0.1, 1000000), 1e-5);
    }
}

TEST(Auc, MonotoneInEachError) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> e(0.0, 0.12);
    std::vector<double> errors(30);
    for (double& x : errors) x = e(rng);
    double prev_auc = auc(errors, 0.1), prev_fr = failure_rate(errors, 0.1);
    for (int step = 0; step < 50; ++step) {
        errors[static_cast<std::size_t>(step % 30)] += 0.01;
        const double a = auc(errors, 0.1), f = failure_rate(errors, 0.1);
        EXPECT_LE(a, prev_auc);
        EXPECT_GE(f, prev_fr);
        prev_auc = a;
        prev_fr = f;
    }
}

TEST(FailureRate, StrictThreshold) {
    const std::vector<double> zeros{0.0, 0.0};
    EXPECT_EQ(failure_rate(zeros, 0.1), 0.0);
    const std::vector<double> three{0.03, 0.05, 0.12};
    EXPECT_NEAR(failure_rate(three, 0.10), 1.0 / 3.0, 1e-15);
    const std::vector<double> at{0.1};
    EXPECT_EQ(failure_rate(at, 0.1), 0.0);
    EXPECT_THROW(failure_rate(std::vector<double>{}, 0.1), ValidationError);
}

TEST(Evaluate, ReportIsConsistent) {
    std::mt19937_64 rng(8);
    std::vector<LandmarkSet> gts, preds;
    std::normal_distribution<double> noise(0.0, 3.0);
    for (int k = 0; k < 25; ++k) {
        gts.push_back(synthetic_face(rng));
        std::vector<Point2> pp = gts.back().points();
        for (auto& p : pp) p = {p.u + noise(rng), p.v + noise(rng)};
        preds.emplace_back(Scheme::IBUG68, pp, GridSpec{});
    }
    const EvalReport r = evaluate(preds, gts, {kInterocular}, 0.08);
    ASSERT_EQ(r.per_sample_nme.size(), 25u);
    double mean = 0.0;
    for (std::size_t k = 0; k < 25; ++k) {
        EXPECT_EQ(r.per_sample_nme[k], nme(preds[k], gts[k], kInterocular));
        mean += r.per_sample_nme[k];
    }
    EXPECT_NEAR(r.mean_nme, mean / 25, 1e-15);
    EXPECT_EQ(r.auc, auc(r.per_sample_nme, 0.08));
    EXPECT_EQ(r.fr, failure_rate(r.per_sample_nme, 0.08));
    EXPECT_EQ(r.tau, 0.08);

    const EvalReport same = evaluate(gts, gts, {kInterocular}, 0.08);
    EXPECT_EQ(same.mean_nme, 0.0);
    EXPECT_DOUBLE_EQ(same.auc, 1.0);
    EXPECT_EQ(same.fr, 0.0);

    EXPECT_THROW(evaluate(preds, {gts[0]}, {kInterocular}, 0.08), ValidationError);
    EXPECT_THROW(evaluate({}, {}, {kInterocular}, 0.08), ValidationError);
}

TEST(Evaluate, RoundTripSuiteIsNearPerfect) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> coord(8.0, 119.0);
    std::vector<LandmarkSet> gts, preds;
    for (int k = 0; k < 500; ++k) {
        std::vector<Point2> pts(68);
        for (auto& p : pts) p = {coord(rng), coord(rng)};
        pts[36] = {35.0 + coord(rng) / 20, 50.0};
        pts[45] = {90.0 + coord(rng) / 20, 52.0};
        gts.emplace_back(Scheme::IBUG68, pts, GridSpec{});
        EncodeOptions o;
        const EncodedSample s = encode_composite(gts.back(), BoundaryScheme{}, o);
        preds.push_back(decode_all(s.landmarks, s.composite.field, DecodeConfig{}, Scheme::IBUG68).landmarks);
    }
    EXPECT_LT(evaluate(preds, gts, {kInterocular}, 0.08).mean_nme, 1e-5);
}
