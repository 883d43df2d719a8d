#pragma once

// Training objective over caller-supplied tensors: Jensen-Shannon terms on
// per-channel heatmap distributions, offset-crop terms, the coordinate
// term, self-calibration between a sample and its disturbed twin, the
// squared-Frobenius variants and the pose-attention gate.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bali/core_types.hpp"
#include "bali/decode.hpp"
#include "bali/disturb.hpp"
#include "bali/field.hpp"
#include "bali/heatmap.hpp"

namespace bali {

inline constexpr double kProbabilityFloor = 1e-8;

/// Non-negative values summing to one.
struct ProbMap {
    std::vector<double> p;
};

/// (h + eps) / sum(h + eps).
ProbMap normalize(std::span<const float> values);
ProbMap normalize(std::span<const double> values);
inline ProbMap normalize(const Plane& plane) { return normalize(std::span<const float>(plane.values())); }

/// Jensen-Shannon divergence in nats; 0 * ln(0 / x) counts as 0.
double js_divergence(const ProbMap& p, const ProbMap& q);

/// Sum over channels of JS between the per-channel distributions.
double stack_js(const HeatmapStack& a, const HeatmapStack& b);

struct LossWeights {
    double lambda1 = 1.0;  ///< final-stage heatmaps
    double lambda2 = 16.0; ///< offset crops
    double gamma = 40.0;   ///< coordinates
    double eta = 4.0;      ///< intermediate stages and self-calibration

    void validate() const;
};

/// Per-stage network outputs; the last stage is final and carries the field.
struct StageOutputs {
    std::vector<HeatmapStack> landmarks;
    std::vector<HeatmapStack> boundaries;
    std::optional<BaliField> field;

    int stage_count() const noexcept { return static_cast<int>(landmarks.size()); }
    const HeatmapStack& final_landmarks() const { return landmarks.back(); }
    const HeatmapStack& final_boundaries() const { return boundaries.back(); }
    void validate() const;
};

/// Ground-truth targets for one image: final stage on `options.grid`,
/// the `stages - 1` intermediate stages on `intermediate_grid`.
StageOutputs make_ground_truth(const LandmarkSet& landmarks, const BoundaryScheme& scheme,
                               const EncodeOptions& options, int stages, GridSpec intermediate_grid);

struct PairOutputs {
    StageOutputs alpha;
    StageOutputs beta;
};

struct Truth {
    StageOutputs targets;
    LandmarkSet landmarks;
};

struct PairTruth {
    Truth alpha;
    Truth beta;
};

/// Unweighted components of the supervised loss for one sample pair.
struct OrgTerms {
    double final_stage = 0.0;
    double intermediate = 0.0;
    double field = 0.0;

    double weighted(const LossWeights& w) const {
        return w.lambda1 * final_stage + w.eta * intermediate + w.lambda2 * field;
    }
};

/// JS between crops of predicted and target offset planes, each crop a
/// (2r+1)^2 square at the target landmark, shifted to be non-negative and
/// normalised. Summed over landmarks and both axes.
double field_crop_js(const BaliField& pred, const BaliField& target, const LandmarkSet& landmarks,
                     int crop_radius);

OrgTerms org_terms(const PairOutputs& pred, const PairTruth& truth, int crop_radius = 3);
double loss_org(const PairOutputs& pred, const PairTruth& truth, const LossWeights& weights, int crop_radius = 3);

enum class SclStages {
    All,          ///< t = 1..T
    Intermediate, ///< t = 1..T-1
};

/// Sum over the selected stages of JS(D(alpha) || beta) for landmark and
/// boundary channels. Texture disturbances use D = identity.
double loss_scl(const StageOutputs& alpha, const StageOutputs& beta, const Disturbance& d,
                const ChannelFlips& flips, SclStages stages = SclStages::All);

/// Squared distances summed over both pair members and all landmarks, with
/// coordinates divided by (W - 1, H - 1) of their grid first.
double loss_coor(const LandmarkSet& pred_alpha, const LandmarkSet& pred_beta, const LandmarkSet& gt_alpha,
                 const LandmarkSet& gt_beta);

struct LossComponents {
    OrgTerms org;
    double coord = 0.0;
    double scl = 0.0;
};

struct LossTerm {
    std::string label;
    double weight = 0.0;
    double raw = 0.0;
    double value = 0.0;
};

struct LossBreakdown {
    std::vector<LossTerm> terms;
    double total = 0.0;

    double term(const std::string& label) const;
    LossBreakdown& operator+=(const LossBreakdown& other);
};

LossBreakdown combine(const LossComponents& components, const LossWeights& weights);

struct LossOptions {
    int crop_radius = 3;
    SclStages overall_scl_stages = SclStages::Intermediate;
    DecodeConfig decode;
};

/// Full objective for one labelled sample pair. Predicted coordinates come
/// from decoding the final predicted stage.
LossBreakdown loss_overall(const PairOutputs& pred, const PairTruth& truth, const Disturbance& d,
                           const ChannelFlips& flips, const LossWeights& weights, const LossOptions& options = {});

struct UnlabeledPair {
    StageOutputs alpha;
    StageOutputs beta;
    Disturbance disturbance;
};

struct SemiLoss {
    double labeled = 0.0;
    double unlabeled = 0.0;
    double total = 0.0;
};

/// Labelled objective plus intermediate-stage self-calibration of every
/// unlabelled pair.
SemiLoss loss_semi(const LossBreakdown& labeled, const std::vector<UnlabeledPair>& unlabeled,
                   const ChannelFlips& flips);

double squared_frobenius(std::span<const float> a, std::span<const float> b);

struct L2Losses {
    double org = 0.0;
    double scl = 0.0;
    double scm = 0.0;
};

/// Squared-Frobenius counterparts on the final stage, combined as
/// eta * scl + lambda * org.
L2Losses l2_losses(const PairOutputs& pred, const PairTruth& truth, const Disturbance& d, const ChannelFlips& flips,
                   double lambda, double eta);

/// sigmoid(logits) * q + q, elementwise.
std::vector<float> attention_gate(std::span<const float> q, std::span<const float> logits);

} // namespace bali
