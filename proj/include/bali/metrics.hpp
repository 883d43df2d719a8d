#pragma once

// Normalised mean error, area under the cumulative error curve and failure
// rate.

#include <optional>
#include <span>
#include <vector>

#include "bali/core_types.hpp"

namespace bali {

struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
};

enum class NormalizationKind {
    Interpupil,  ///< distance between eye centroids
    Interocular, ///< distance between outer eye corners
    BoxGeomean,  ///< sqrt(w * h)
    BoxDiagonal, ///< sqrt(w^2 + h^2)
};

struct Normalization {
    NormalizationKind kind = NormalizationKind::Interocular;
    std::optional<BoundingBox> box;
};

/// Normaliser d for a ground-truth set. Throws ValidationError if the scheme
/// has no eye table, a box kind has no box, or d <= 1e-9.
double normalization_distance(const LandmarkSet& gt, const Normalization& norm);

double nme(const LandmarkSet& pred, const LandmarkSet& gt, const Normalization& norm);

/// Area under the empirical CDF of `errors` on [0, tau], divided by tau.
double auc(std::span<const double> errors, double tau);

/// Fraction of errors strictly greater than tau.
double failure_rate(std::span<const double> errors, double tau);

struct EvalReport {
    std::vector<double> per_sample_nme;
    double mean_nme = 0.0;
    double auc = 0.0;
    double fr = 0.0;
    double tau = 0.0;
};

/// `norms` holds either one normalisation shared by all samples or one per sample.
EvalReport evaluate(const std::vector<LandmarkSet>& preds, const std::vector<LandmarkSet>& gts,
                    const std::vector<Normalization>& norms, double tau);

} // namespace bali
