#include "bali/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bali {

namespace {

template <typename T>
ProbMap normalize_impl(std::span<const T> values) {
    ProbMap out;
    out.p.resize(values.size());
    double total = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        out.p[k] = static_cast<double>(values[k]) + kProbabilityFloor;
        total += out.p[k];
    }
    for (double& x : out.p) x /= total;
    return out;
}

double kl_to_mixture(const std::vector<double>& p, const std::vector<double>& m) {
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] > 0.0) acc += p[k] * std::log(p[k] / m[k]);
    }
    return acc;
}

void check_stack_pair(const HeatmapStack& a, const HeatmapStack& b) {
    if (a.grid() != b.grid() || a.channel_count() != b.channel_count()) {
        throw ValidationError("heatmap stacks differ in grid or channel count");
    }
}

} // namespace

ProbMap normalize(std::span<const float> values) { return normalize_impl(values); }
ProbMap normalize(std::span<const double> values) { return normalize_impl(values); }

double js_divergence(const ProbMap& p, const ProbMap& q) {
    if (p.p.size() != q.p.size()) throw ValidationError("js_divergence: distributions differ in size");
    std::vector<double> m(p.p.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = 0.5 * (p.p[k] + q.p[k]);
    return 0.5 * kl_to_mixture(p.p, m) + 0.5 * kl_to_mixture(q.p, m);
}

double stack_js(const HeatmapStack& a, const HeatmapStack& b) {
    check_stack_pair(a, b);
    double acc = 0.0;
    for (int c = 0; c < a.channel_count(); ++c) acc += js_divergence(normalize(a.channel(c)), normalize(b.channel(c)));
    return acc;
}

void LossWeights::validate() const {
    for (double w : {lambda1, lambda2, gamma, eta}) {
        if (!std::isfinite(w) || w < 0.0) throw ValidationError("loss weights must be finite and >= 0");
    }
}

void StageOutputs::validate() const {
    if (landmarks.empty()) throw ValidationError("stage outputs need at least one stage");
    if (landmarks.size() != boundaries.size()) {
        throw ValidationError("landmark and boundary stage counts differ");
    }
    for (std::size_t t = 0; t < landmarks.size(); ++t) {
        if (landmarks[t].grid() != boundaries[t].grid()) {
            throw ValidationError("stage " + std::to_string(t + 1) + " landmark and boundary grids differ");
        }
    }
    if (field && field->grid() != landmarks.back().grid()) {
        throw ValidationError("field grid differs from the final stage grid");
    }
}

StageOutputs make_ground_truth(const LandmarkSet& landmarks, const BoundaryScheme& scheme,
                               const EncodeOptions& options, int stages, GridSpec intermediate_grid) {
    if (stages < 1) throw ValidationError("stage count must be >= 1");
    StageOutputs out;
    const LandmarkSet coarse = rescale_landmarks(landmarks, intermediate_grid);
    for (int t = 1; t < stages; ++t) {
        out.landmarks.push_back(render_landmark_heatmaps(coarse, options.kernel, intermediate_grid));
        out.boundaries.push_back(render_boundary_heatmaps(coarse, scheme, options.boundary, intermediate_grid));
    }
    EncodedSample final_stage = encode_composite(landmarks, scheme, options);
    out.landmarks.push_back(std::move(final_stage.landmarks));
    out.boundaries.push_back(std::move(final_stage.composite.boundary));
    out.field = std::move(final_stage.composite.field);
    return out;
}

double field_crop_js(const BaliField& pred, const BaliField& target, const LandmarkSet& landmarks,
                     int crop_radius) {
    if (pred.grid() != target.grid() || pred.channel_count() != target.channel_count()) {
        throw ValidationError("predicted and target fields differ in grid or channel count");
    }
    if (landmarks.size() != target.channel_count()) {
        throw ValidationError("field channel count differs from the landmark count");
    }
    auto shifted = [](std::vector<double> values) {
        const double lo = *std::min_element(values.begin(), values.end());
        for (double& x : values) x -= lo;
        return normalize(std::span<const double>(values));
    };
    double acc = 0.0;
    for (int c = 0; c < landmarks.size(); ++c) {
        const auto [ci, cj] = nearest_cell(landmarks[c]);
        const CellRect rect = crop_region({ci, cj}, crop_radius, target.grid());
        if (rect.cell_count() == 0) continue;
        for (int axis = 0; axis < 2; ++axis) {
            const Plane& p = axis == 0 ? pred.u(c) : pred.v(c);
            const Plane& t = axis == 0 ? target.u(c) : target.v(c);
            std::vector<double> pv, tv;
            for (int j = rect.j0; j <= rect.j1; ++j) {
                for (int i = rect.i0; i <= rect.i1; ++i) {
                    pv.push_back(p.at(i, j));
                    tv.push_back(t.at(i, j));
                }
            }
            acc += js_divergence(shifted(std::move(pv)), shifted(std::move(tv)));
        }
    }
    return acc;
}

OrgTerms org_terms(const PairOutputs& pred, const PairTruth& truth, int crop_radius) {
    OrgTerms terms;
    auto accumulate = [&](const StageOutputs& p, const Truth& t) {
        p.validate();
        t.targets.validate();
        if (p.stage_count() != t.targets.stage_count()) {
            throw ValidationError("prediction and ground truth have different stage counts");
        }
        if (!t.targets.field) throw ValidationError("ground truth lacks an offset field");
        if (!p.field) throw ValidationError("prediction lacks an offset field");
        const int last = p.stage_count() - 1;
        terms.final_stage += stack_js(p.landmarks[static_cast<std::size_t>(last)],
                                      t.targets.landmarks[static_cast<std::size_t>(last)]) +
                             stack_js(p.boundaries[static_cast<std::size_t>(last)],
                                      t.targets.boundaries[static_cast<std::size_t>(last)]);
        for (int s = 0; s < last; ++s) {
            terms.intermediate += stack_js(p.landmarks[static_cast<std::size_t>(s)],
                                           t.targets.landmarks[static_cast<std::size_t>(s)]) +
                                  stack_js(p.boundaries[static_cast<std::size_t>(s)],
                                           t.targets.boundaries[static_cast<std::size_t>(s)]);
        }
        terms.field += field_crop_js(*p.field, *t.targets.field, t.landmarks, crop_radius);
    };
    accumulate(pred.alpha, truth.alpha);
    accumulate(pred.beta, truth.beta);
    return terms;
}

double loss_org(const PairOutputs& pred, const PairTruth& truth, const LossWeights& weights, int crop_radius) {
    weights.validate();
    return org_terms(pred, truth, crop_radius).weighted(weights);
}

double loss_scl(const StageOutputs& alpha, const StageOutputs& beta, const Disturbance& d,
                const ChannelFlips& flips, SclStages stages) {
    alpha.validate();
    beta.validate();
    if (alpha.stage_count() != beta.stage_count()) throw ValidationError("paired outputs differ in stage count");
    const int count = stages == SclStages::All ? alpha.stage_count() : alpha.stage_count() - 1;
    double acc = 0.0;
    for (int s = 0; s < count; ++s) {
        const auto t = static_cast<std::size_t>(s);
        acc += stack_js(transfer_heatmap(d, alpha.landmarks[t], flips), beta.landmarks[t]);
        acc += stack_js(transfer_heatmap(d, alpha.boundaries[t], flips), beta.boundaries[t]);
    }
    return acc;
}

double loss_coor(const LandmarkSet& pred_alpha, const LandmarkSet& pred_beta, const LandmarkSet& gt_alpha,
                 const LandmarkSet& gt_beta) {
    auto member = [](const LandmarkSet& pred, const LandmarkSet& gt) {
        if (pred.size() != gt.size()) {
            throw ValidationError("coordinate loss: " + std::to_string(pred.size()) + " predicted vs " +
                                  std::to_string(gt.size()) + " ground-truth landmarks");
        }
        const double pw = pred.grid().width() - 1, ph = pred.grid().height() - 1;
        const double gw = gt.grid().width() - 1, gh = gt.grid().height() - 1;
        double acc = 0.0;
        for (int k = 0; k < pred.size(); ++k) {
            const double du = pred[k].u / pw - gt[k].u / gw;
            const double dv = pred[k].v / ph - gt[k].v / gh;
            acc += du * du + dv * dv;
        }
        return acc;
    };
    return member(pred_alpha, gt_alpha) + member(pred_beta, gt_beta);
}

double LossBreakdown::term(const std::string& label) const {
    for (const LossTerm& t : terms) {
        if (t.label == label) return t.value;
    }
    throw ValidationError("no loss term labelled '" + label + "'");
}

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& other) {
    if (terms.empty()) {
        *this = other;
        return *this;
    }
    if (terms.size() != other.terms.size()) throw ValidationError("cannot add breakdowns with different terms");
    total = 0.0;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        terms[k].raw += other.terms[k].raw;
        terms[k].value += other.terms[k].value;
        total += terms[k].value;
    }
    return *this;
}

LossBreakdown combine(const LossComponents& c, const LossWeights& w) {
    w.validate();
    LossBreakdown out;
    auto add = [&](const char* label, double weight, double raw) {
        out.terms.push_back({label, weight, raw, weight * raw});
        out.total += weight * raw;
    };
    add("final_heatmaps", w.lambda1, c.org.final_stage);
    add("intermediate_heatmaps", w.eta, c.org.intermediate);
    add("field_crops", w.lambda2, c.org.field);
    add("coordinates", w.gamma, c.coord);
    add("self_calibrated", w.eta, c.scl);
    return out;
}

LossBreakdown loss_overall(const PairOutputs& pred, const PairTruth& truth, const Disturbance& d,
                           const ChannelFlips& flips, const LossWeights& weights, const LossOptions& options) {
    LossComponents c;
    c.org = org_terms(pred, truth, options.crop_radius);
    auto decode_member = [&](const StageOutputs& s, const LandmarkSet& gt) {
        return decode_all(s.final_landmarks(), *s.field, options.decode, gt.scheme()).landmarks;
    };
    c.coord = loss_coor(decode_member(pred.alpha, truth.alpha.landmarks), decode_member(pred.beta, truth.beta.landmarks),
                        truth.alpha.landmarks, truth.beta.landmarks);
    c.scl = loss_scl(pred.alpha, pred.beta, d, flips, options.overall_scl_stages);
    return combine(c, weights);
}

SemiLoss loss_semi(const LossBreakdown& labeled, const std::vector<UnlabeledPair>& unlabeled,
                   const ChannelFlips& flips) {
    SemiLoss out;
    out.labeled = labeled.total;
    for (const UnlabeledPair& pair : unlabeled) {
        out.unlabeled += loss_scl(pair.alpha, pair.beta, pair.disturbance, flips, SclStages::Intermediate);
    }
    out.total = out.labeled + out.unlabeled;
    return out;
}

double squared_frobenius(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw ValidationError("squared_frobenius: shapes differ");
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = static_cast<double>(a[k]) - b[k];
        acc += d * d;
    }
    return acc;
}

namespace {

double stack_frobenius(const HeatmapStack& a, const HeatmapStack& b) {
    check_stack_pair(a, b);
    double acc = 0.0;
    for (int c = 0; c < a.channel_count(); ++c) acc += squared_frobenius(a.channel(c).values(), b.channel(c).values());
    return acc;
}

} // namespace

L2Losses l2_losses(const PairOutputs& pred, const PairTruth& truth, const Disturbance& d, const ChannelFlips& flips,
                   double lambda, double eta) {
    if (!std::isfinite(lambda) || !std::isfinite(eta) || lambda < 0.0 || eta < 0.0) {
        throw ValidationError("l2 loss weights must be finite and >= 0");
    }
    L2Losses out;
    auto member = [](const StageOutputs& p, const Truth& t) {
        return stack_frobenius(p.final_landmarks(), t.targets.final_landmarks()) +
               stack_frobenius(p.final_boundaries(), t.targets.final_boundaries());
    };
    out.org = member(pred.alpha, truth.alpha) + member(pred.beta, truth.beta);
    out.scl = stack_frobenius(transfer_heatmap(d, pred.alpha.final_landmarks(), flips), pred.beta.final_landmarks()) +
              stack_frobenius(transfer_heatmap(d, pred.alpha.final_boundaries(), flips), pred.beta.final_boundaries());
    out.scm = eta * out.scl + (lambda == 0.0 ? 0.0 : lambda * out.org);
    return out;
}

std::vector<float> attention_gate(std::span<const float> q, std::span<const float> logits) {
    if (q.size() != logits.size()) throw ValidationError("attention_gate: feature and mask shapes differ");
    std::vector<float> out(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double x = logits[k];
        const double gate = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
        out[k] = static_cast<float>(gate * q[k] + q[k]);
    }
    return out;
}

} // namespace bali
