#include "bali/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bali/tables.hpp"

namespace bali {

namespace {

Point2 centroid(const LandmarkSet& l, const std::vector<int>& indices) {
    Point2 c;
    for (int k : indices) {
        c.u += l[k].u;
        c.v += l[k].v;
    }
    c.u /= static_cast<double>(indices.size());
    c.v /= static_cast<double>(indices.size());
    return c;
}

void check_errors(std::span<const double> errors, double tau) {
    if (errors.empty()) throw ValidationError("error list is empty");
    if (!std::isfinite(tau) || tau <= 0.0) throw ValidationError("threshold tau must be > 0");
}

} // namespace

double normalization_distance(const LandmarkSet& gt, const Normalization& norm) {
    double d = 0.0;
    switch (norm.kind) {
    case NormalizationKind::Interpupil:
    case NormalizationKind::Interocular: {
        if (!has_eye_table(gt.scheme())) {
            throw ValidationError("scheme " + scheme_name(gt.scheme()) + " has no eye landmarks");
        }
        const EyeTable eyes = eye_table(gt.scheme());
        if (norm.kind == NormalizationKind::Interocular) {
            d = std::hypot(gt[eyes.outer_left].u - gt[eyes.outer_right].u,
                           gt[eyes.outer_left].v - gt[eyes.outer_right].v);
        } else {
            const Point2 l = centroid(gt, eyes.left);
            const Point2 r = centroid(gt, eyes.right);
            d = std::hypot(l.u - r.u, l.v - r.v);
        }
        break;
    }
    case NormalizationKind::BoxGeomean:
    case NormalizationKind::BoxDiagonal:
        if (!norm.box) throw ValidationError("box normalisation needs a bounding box");
        if (norm.box->w < 0.0 || norm.box->h < 0.0) throw ValidationError("bounding box has negative size");
        d = norm.kind == NormalizationKind::BoxGeomean ? std::sqrt(norm.box->w * norm.box->h)
                                                       : std::hypot(norm.box->w, norm.box->h);
        break;
    }
    if (!(d > 1e-9)) throw ValidationError("normalisation distance is degenerate (<= 1e-9)");
    return d;
}

double nme(const LandmarkSet& pred, const LandmarkSet& gt, const Normalization& norm) {
    if (pred.size() != gt.size()) {
        throw ValidationError("nme: " + std::to_string(pred.size()) + " predicted vs " + std::to_string(gt.size()) +
                              " ground-truth landmarks");
    }
    if (gt.size() == 0) throw ValidationError("nme: empty landmark set");
    const double d = normalization_distance(gt, norm);
    double acc = 0.0;
    for (int k = 0; k < gt.size(); ++k) acc += std::hypot(pred[k].u - gt[k].u, pred[k].v - gt[k].v) / d;
    return acc / gt.size();
}

double auc(std::span<const double> errors, double tau) {
    check_errors(errors, tau);
    // CDF is a step function rising by 1/N at each error, so the area on
    // [0, tau] is the sum of (tau - e) / N over errors e <= tau.
    double area = 0.0;
    for (double e : errors) {
        if (e <= tau) area += tau - std::max(e, 0.0);
    }
    return area / (static_cast<double>(errors.size()) * tau);
}

double failure_rate(std::span<const double> errors, double tau) {
    check_errors(errors, tau);
    const auto failed = std::count_if(errors.begin(), errors.end(), [tau](double e) { return e > tau; });
    return static_cast<double>(failed) / static_cast<double>(errors.size());
}

EvalReport evaluate(const std::vector<LandmarkSet>& preds, const std::vector<LandmarkSet>& gts,
                    const std::vector<Normalization>& norms, double tau) {
    if (preds.size() != gts.size()) {
        throw ValidationError("evaluate: " + std::to_string(preds.size()) + " predictions vs " +
                              std::to_string(gts.size()) + " ground truths");
    }
    if (gts.empty()) throw ValidationError("evaluate: no samples");
    if (norms.size() != 1 && norms.size() != gts.size()) {
        throw ValidationError("evaluate: need one normalisation or one per sample");
    }
    EvalReport report;
    report.tau = tau;
    report.per_sample_nme.reserve(gts.size());
    for (std::size_t k = 0; k < gts.size(); ++k) {
        report.per_sample_nme.push_back(nme(preds[k], gts[k], norms.size() == 1 ? norms[0] : norms[k]));
    }
    double total = 0.0;
    for (double e : report.per_sample_nme) total += e;
    report.mean_nme = total / static_cast<double>(report.per_sample_nme.size());
    report.auc = auc(report.per_sample_nme, tau);
    report.fr = failure_rate(report.per_sample_nme, tau);
    return report;
}

} // namespace bali
