#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "bali/losses.hpp"

using namespace bali;

namespace {

// JS written from the KL definition with explicit mixture.
double reference_js(const std::vector<double>& p, const std::vector<double>& q) {
    double a = 0.0, b = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double m = 0.5 * (p[k] + q[k]);
        if (p[k] > 0) a += p[k] * std::log(p[k] / m);
        if (q[k] > 0) b += q[k] * std::log(q[k] / m);
    }
    return 0.5 * a + 0.5 * b;
}

ProbMap random_prob(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> val(0.0, 1.0);
    std::vector<double> raw(n);
    for (double& x : raw) x = val(rng);
    return normalize(std::span<const double>(raw));
}

struct Toy {
    GridSpec grid{32, 32};
    GridSpec inter{16, 16};
    BoundaryScheme scheme{{{0, 1}}};
    EncodeOptions options;
    LandmarkSet alpha, beta;
    Disturbance d;
    ChannelFlips flips{FlipPermutation::identity(2), FlipPermutation::identity(1)};

    Toy() : d(Disturbance::rotate(20.0)) {
        options.grid = grid;
        alpha = LandmarkSet(Scheme::Custom, {{12.3, 14.6}, {19.8, 17.1}}, grid);
        beta = transfer_landmarks(d, alpha, flips.landmarks);
    }
    StageOutputs truth_of(const LandmarkSet& l, int stages = 4) const {
        return make_ground_truth(l, scheme, options, stages, inter);
    }
    PairTruth truth(int stages = 4) const { return {{truth_of(alpha, stages), alpha}, {truth_of(beta, stages), beta}}; }
};

StageOutputs transfer_outputs(const Disturbance& d, const StageOutputs& s, const ChannelFlips& flips) {
    StageOutputs out;
    for (const auto& h : s.landmarks) out.landmarks.push_back(transfer_heatmap(d, h, flips));
    for (const auto& h : s.boundaries) out.boundaries.push_back(transfer_heatmap(d, h, flips));
    if (s.field) out.field = transfer_field(d, *s.field, flips.landmarks);
    return out;
}

void bump(HeatmapStack& h, int channel, int i, int j, float amount) { h.channel(channel).at(i, j) += amount; }

} // namespace

TEST(Normalize, ProbabilityFloorAndScaleInvariance) {
    const std::vector<double> already{0.25, 0.25, 0.5};
    const ProbMap p = normalize(std::span<const double>(already));
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(p.p[k], already[k], 1e-7);
    const std::vector<float> zeros(64, 0.0f);
    for (double x : normalize(std::span<const float>(zeros)).p) EXPECT_NEAR(x, 1.0 / 64, 1e-15);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    std::vector<double> v(100), v10(100);
    for (std::size_t k = 0; k < 100; ++k) {
        v[k] = val(rng);
        v10[k] = 10.0 * v[k];
    }
    const ProbMap a = normalize(std::span<const double>(v)), b = normalize(std::span<const double>(v10));
    for (std::size_t k = 0; k < 100; ++k) EXPECT_NEAR(a.p[k], b.p[k], 1e-9);
    EXPECT_NEAR(std::accumulate(a.p.begin(), a.p.end(), 0.0), 1.0, 1e-12);
}

TEST(JsDivergence, HandValues) {
    const ProbMap p{{1.0, 0.0}}, q{{0.5, 0.5}};
    const double expected = 0.5 * std::log(4.0 / 3.0) + 0.5 * (0.5 * std::log(2.0 / 3.0) + 0.5 * std::log(2.0));
    EXPECT_NEAR(expected, 0.21576, 1e-5);
    EXPECT_NEAR(js_divergence(p, q), expected, 1e-12);
    EXPECT_NEAR(js_divergence(ProbMap{{1.0, 0.0, 0.0}}, ProbMap{{0.0, 0.5, 0.5}}), std::log(2.0), 1e-12);
    EXPECT_EQ(js_divergence(q, q), 0.0);
    EXPECT_THROW(js_divergence(p, ProbMap{{1.0}}), ValidationError);
}

TEST(JsDivergence, MatchesReferenceAndIsBoundedAndSymmetric) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const ProbMap p = random_prob(rng, 64), q = random_prob(rng, 64);
        const double js = js_divergence(p, q);
        EXPECT_NEAR(js, reference_js(p.p, q.p), 1e-12);
        EXPECT_NEAR(js, js_divergence(q, p), 1e-15);
        EXPECT_GE(js, 0.0);
        EXPECT_LE(js, std::log(2.0));
        EXPECT_LT(js_divergence(p, p), 1e-12);
    }
}

TEST(LossWeights, DefaultWeights) {
    const LossWeights w;
    EXPECT_EQ(w.lambda1, 1.0);
    EXPECT_EQ(w.lambda2, 16.0);
    EXPECT_EQ(w.gamma, 40.0);
    EXPECT_EQ(w.eta, 4.0);
    LossWeights bad;
    bad.gamma = -1.0;
    EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(MakeGroundTruth, StageGrids) {
    const Toy toy;
    const StageOutputs s = toy.truth_of(toy.alpha);
    ASSERT_EQ(s.stage_count(), 4);
    for (int t = 0; t < 3; ++t) EXPECT_EQ(s.landmarks[static_cast<std::size_t>(t)].grid(), toy.inter);
    EXPECT_EQ(s.final_landmarks().grid(), toy.grid);
    EXPECT_EQ(s.final_boundaries().channel_count(), 1);
    ASSERT_TRUE(s.field.has_value());
}

TEST(LossOrg, ZeroOnExactMatch) {
    const Toy toy;
    const PairTruth truth = toy.truth();
    const PairOutputs pred{truth.alpha.targets, truth.beta.targets};
    EXPECT_EQ(loss_org(pred, truth, LossWeights{}), 0.0);
}

TEST(LossOrg, SingleChannelPerturbationStrictlyIncreases) {
    const Toy toy;
    const PairTruth truth = toy.truth();
    PairOutputs pred{truth.alpha.targets, truth.beta.targets};
    const double base = loss_org(pred, truth, LossWeights{});
    bump(pred.alpha.landmarks.back(), 0, 5, 5, 0.5f);
    const double once = loss_org(pred, truth, LossWeights{});
    EXPECT_GT(once, base);
    bump(pred.alpha.landmarks.back(), 0, 25, 7, 0.5f);
    EXPECT_GT(loss_org(pred, truth, LossWeights{}), once);
}

TEST(LossOrg, PositiveUnderRandomSmallPerturbations) {
    const Toy toy;
    const PairTruth truth = toy.truth();
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> cell(0, 31), chan(0, 1), which(0, 2);
    std::uniform_real_distribution<float> mag(1e-3f, 0.5f);
    for (int trial = 0; trial < 100; ++trial) {
        PairOutputs pred{truth.alpha.targets, truth.beta.targets};
        const int c = chan(rng);
        switch (which(rng)) {
        case 0: bump(pred.alpha.landmarks.back(), c, cell(rng), cell(rng), mag(rng)); break;
        case 1: bump(pred.beta.boundaries.back(), 0, cell(rng), cell(rng), mag(rng)); break;
        default: bump(pred.beta.landmarks[1], c, cell(rng) / 2, cell(rng) / 2, mag(rng)); break;
        }
        const double loss = loss_org(pred, truth, LossWeights{});
        ASSERT_GT(loss, 0.0);
        ASSERT_TRUE(std::isfinite(loss));
    }
}

TEST(LossOrg, FieldCropTermReactsToOffsets) {
    const Toy toy;
    const PairTruth truth = toy.truth(1);
    PairOutputs pred{truth.alpha.targets, truth.beta.targets};
    EXPECT_EQ(org_terms(pred, truth).field, 0.0);
    pred.alpha.field->u(1).at(20, 17) += 0.75f;
    const OrgTerms t = org_terms(pred, truth);
    EXPECT_GT(t.field, 0.0);
    EXPECT_EQ(t.final_stage, 0.0);
    EXPECT_EQ(t.intermediate, 0.0);
}

TEST(LossOrg, MissingFieldIsRejected) {
    const Toy toy;
    const PairTruth truth = toy.truth();
    PairOutputs pred{truth.alpha.targets, truth.beta.targets};
    pred.beta.field.reset();
    EXPECT_THROW(loss_org(pred, truth, LossWeights{}), ValidationError);
}

TEST(LossScl, ZeroWhenBetaIsTheTransferOfAlpha) {
    const Toy toy;
    const StageOutputs alpha = toy.truth_of(toy.alpha);
    const StageOutputs beta = transfer_outputs(toy.d, alpha, toy.flips);
    EXPECT_LT(loss_scl(alpha, beta, toy.d, toy.flips), 1e-6);
}

TEST(LossScl, CrossModuleConsistencyOnAFullFace) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> coord(20.0, 107.0);
    std::vector<Point2> pts(68);
    for (auto& p : pts) p = {coord(rng), coord(rng)};
    const LandmarkSet l(Scheme::IBUG68, pts, GridSpec{});
    const ChannelFlips flips = ChannelFlips::for_scheme(Scheme::IBUG68);
    const Disturbance d = Disturbance::compose({Disturbance::flip(), Disturbance::rotate(-25.0)});
    const StageOutputs alpha = make_ground_truth(l, default_boundary_scheme(Scheme::IBUG68), EncodeOptions{}, 2,
                                                 GridSpec(64, 64));
    EXPECT_LT(loss_scl(alpha, transfer_outputs(d, alpha, flips), d, flips), 1e-6);
}

TEST(LossScl, TextureDisturbanceWithIdenticalTensorsIsZero) {
    const Toy toy;
    const StageOutputs alpha = toy.truth_of(toy.alpha);
    EXPECT_EQ(loss_scl(alpha, alpha, Disturbance::blur(4), toy.flips), 0.0);
    EXPECT_EQ(loss_scl(alpha, alpha, Disturbance::occlude_black({0, 0, 10, 10}), toy.flips), 0.0);
}

TEST(LossScl, ExtraRotationOfBetaIncreasesTheLoss) {
    const Toy toy;
    const StageOutputs alpha = toy.truth_of(toy.alpha);
    const StageOutputs beta = transfer_outputs(toy.d, alpha, toy.flips);
    const StageOutputs skewed = transfer_outputs(Disturbance::rotate(10.0), beta, toy.flips);
    EXPECT_GT(loss_scl(alpha, skewed, toy.d, toy.flips), loss_scl(alpha, beta, toy.d, toy.flips));
}

TEST(LossScl, StageSelection) {
    const Toy toy;
    const StageOutputs alpha = toy.truth_of(toy.alpha);
    StageOutputs beta = transfer_outputs(toy.d, alpha, toy.flips);
    bump(beta.landmarks.back(), 0, 3, 3, 0.9f);
    EXPECT_LT(loss_scl(alpha, beta, toy.d, toy.flips, SclStages::Intermediate), 1e-6);
    EXPECT_GT(loss_scl(alpha, beta, toy.d, toy.flips, SclStages::All), 1e-3);
}

TEST(LossCoor, HandValuesAndHomogeneity) {
    const GridSpec g(11, 11); // normalised units are px / 10
    const LandmarkSet gt(Scheme::Custom, {{2.0, 3.0}, {5.0, 5.0}}, g);
    EXPECT_EQ(loss_coor(gt, gt, gt, gt), 0.0);
    const LandmarkSet off(Scheme::Custom, {{3.0, 3.0}, {5.0, 5.0}}, g);
    EXPECT_NEAR(loss_coor(off, gt, gt, gt), 0.01, 1e-15);
    const LandmarkSet e1(Scheme::Custom, {{2.5, 3.7}, {4.2, 5.1}}, g);
    const LandmarkSet e2(Scheme::Custom, {{3.0, 4.4}, {3.4, 5.2}}, g);
    EXPECT_NEAR(loss_coor(e2, e2, gt, gt), 4.0 * loss_coor(e1, e1, gt, gt), 1e-12);
    EXPECT_THROW(loss_coor(LandmarkSet(Scheme::Custom, {{1.0, 1.0}}, g), gt, gt, gt), ValidationError);
}

TEST(Combine, BreakdownSumsAndScalesLinearly) {
    LossComponents c;
    c.org = {0.3, 0.2, 0.05};
    c.coord = 0.001;
    c.scl = 0.07;
    const LossWeights w;
    const LossBreakdown b = combine(c, w);
    double sum = 0.0;
    for (const LossTerm& t : b.terms) sum += t.value;
    EXPECT_NEAR(sum, b.total, 1e-9);
    EXPECT_NEAR(b.term("final_heatmaps"), 0.3, 1e-15);
    EXPECT_NEAR(b.term("intermediate_heatmaps"), 0.8, 1e-15);
    EXPECT_NEAR(b.term("field_crops"), 0.8, 1e-15);
    EXPECT_NEAR(b.term("coordinates"), 0.04, 1e-15);
    EXPECT_NEAR(b.term("self_calibrated"), 0.28, 1e-15);
    LossWeights doubled = w;
    doubled.lambda2 *= 2;
    EXPECT_NEAR(combine(c, doubled).term("field_crops"), 2 * b.term("field_crops"), 1e-15);
    EXPECT_EQ(combine(LossComponents{}, w).total, 0.0);
}

TEST(LossOverall, ZeroForPerfectPredictionsAndConsistentPair) {
    const Toy toy;
    PairTruth truth = toy.truth();
    // make beta targets exactly the transfer of alpha so self-calibration is exact
    truth.beta.targets = transfer_outputs(toy.d, truth.alpha.targets, toy.flips);
    const PairOutputs pred{truth.alpha.targets, truth.beta.targets};
    const LossBreakdown b = loss_overall(pred, truth, toy.d, toy.flips, LossWeights{});
    EXPECT_EQ(b.term("final_heatmaps"), 0.0);
    EXPECT_EQ(b.term("field_crops"), 0.0);
    EXPECT_LT(b.term("self_calibrated"), 1e-6);
    EXPECT_LT(b.term("coordinates"), 1e-6);
    EXPECT_LT(b.total, 1e-5);
}

TEST(LossOverall, BreakdownSumsToTotal) {
    const Toy toy;
    const PairTruth truth = toy.truth();
    PairOutputs pred{truth.alpha.targets, truth.beta.targets};
    bump(pred.alpha.landmarks.back(), 1, 22, 18, 0.4f);
    bump(pred.beta.boundaries[0], 0, 2, 2, 0.4f);
    const LossBreakdown b = loss_overall(pred, truth, toy.d, toy.flips, LossWeights{});
    double sum = 0.0;
    for (const LossTerm& t : b.terms) {
        sum += t.value;
        EXPECT_NEAR(t.value, t.weight * t.raw, 1e-15);
    }
    EXPECT_NEAR(sum, b.total, 1e-9);
    EXPECT_GT(b.total, 0.0);
}

TEST(LossSemi, EmptyConsistentAndAdditive) {
    const Toy toy;
    LossBreakdown labeled;
    labeled.terms = {{"final_heatmaps", 1.0, 0.25, 0.25}};
    labeled.total = 0.25;
    EXPECT_EQ(loss_semi(labeled, {}, toy.flips).total, labeled.total);

    const StageOutputs a = toy.truth_of(toy.alpha);
    const UnlabeledPair consistent{a, transfer_outputs(toy.d, a, toy.flips), toy.d};
    EXPECT_LT(loss_semi(labeled, {consistent}, toy.flips).unlabeled, 1e-6);

    StageOutputs off = transfer_outputs(toy.d, a, toy.flips);
    bump(off.landmarks[0], 0, 2, 2, 0.3f);
    const UnlabeledPair p1{a, off, toy.d};
    StageOutputs off2 = transfer_outputs(toy.d, a, toy.flips);
    bump(off2.boundaries[1], 0, 9, 4, 0.6f);
    const UnlabeledPair p2{a, off2, toy.d};
    const double s1 = loss_semi(labeled, {p1}, toy.flips).unlabeled;
    const double s2 = loss_semi(labeled, {p2}, toy.flips).unlabeled;
    const SemiLoss both = loss_semi(labeled, {p1, p2}, toy.flips);
    EXPECT_GT(s1, 0.0);
    EXPECT_NEAR(both.unlabeled, s1 + s2, 1e-12);
    EXPECT_NEAR(both.total, 0.25 + s1 + s2, 1e-12);
}

TEST(L2Losses, ArithmeticAndWeighting) {
    const std::vector<float> a{0.0f, 0.5f, 1.0f, 0.25f}, b{0.5f, 1.0f, 0.5f, 0.75f};
    EXPECT_DOUBLE_EQ(squared_frobenius(a, b), 1.0);
    EXPECT_EQ(squared_frobenius(a, a), 0.0);
    EXPECT_THROW(squared_frobenius(a, std::vector<float>(3)), ValidationError);

    const Toy toy;
    const PairTruth truth = toy.truth(1);
    PairOutputs pred{truth.alpha.targets, truth.beta.targets};
    const L2Losses exact = l2_losses(pred, truth, toy.d, toy.flips, 1.0, 4.0);
    EXPECT_EQ(exact.org, 0.0);
    bump(pred.alpha.landmarks.back(), 0, 1, 1, 0.5f);
    const L2Losses l = l2_losses(pred, truth, toy.d, toy.flips, 1.0, 4.0);
    EXPECT_NEAR(l.org, 0.25, 1e-9);
    EXPECT_NEAR(l.scm, 4.0 * l.scl + l.org, 1e-12);
    // with lambda = 0 the ground truth no longer matters
    PairTruth scrambled = truth;
    bump(scrambled.alpha.targets.landmarks.back(), 1, 9, 9, 0.8f);
    EXPECT_EQ(l2_losses(pred, truth, toy.d, toy.flips, 0.0, 4.0).scm,
              l2_losses(pred, scrambled, toy.d, toy.flips, 0.0, 4.0).scm);
    EXPECT_NE(l2_losses(pred, truth, toy.d, toy.flips, 1.0, 4.0).scm,
              l2_losses(pred, scrambled, toy.d, toy.flips, 1.0, 4.0).scm);
}

TEST(AttentionGate, LimitsAndBounds) {
    const std::vector<float> q{0.0f, 0.3f, 1.0f, 2.5f};
    const std::vector<float> low(4, -1e9f), mid(4, 0.0f), high(4, 1e9f);
    const auto p_low = attention_gate(q, low), p_mid = attention_gate(q, mid), p_high = attention_gate(q, high);
    for (std::size_t k = 0; k < q.size(); ++k) {
        EXPECT_NEAR(p_low[k], q[k], 1e-6);
        EXPECT_NEAR(p_mid[k], 1.5f * q[k], 1e-6);
        EXPECT_NEAR(p_high[k], 2.0f * q[k], 1e-6);
    }
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<float> val(0.0f, 3.0f), logit(-20.0f, 20.0f);
    std::vector<float> qs(500), ls(500);
    for (std::size_t k = 0; k < 500; ++k) {
        qs[k] = val(rng);
        ls[k] = logit(rng);
    }
    const auto p = attention_gate(qs, ls);
    for (std::size_t k = 0; k < 500; ++k) {
        EXPECT_GE(p[k], qs[k]);
        EXPECT_LE(p[k], 2.0f * qs[k]);
    }
    EXPECT_THROW(attention_gate(q, std::vector<float>(3)), ValidationError);
}
