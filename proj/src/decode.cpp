#include "bali/decode.hpp"

#include <algorithm>

namespace bali {

std::optional<Cell> coarse_argmax(const Plane& heatmap) {
    std::optional<Cell> best;
    float best_value = 0.0f;
    for (int j = 0; j < heatmap.height(); ++j) {
        for (int i = 0; i < heatmap.width(); ++i) {
            const float value = heatmap.at(i, j);
            if (value > best_value) {
                best_value = value;
                best = Cell{i, j};
            }
        }
    }
    return best;
}

CellRect crop_region(Cell peak, int radius, GridSpec grid) {
    CellRect rect;
    rect.i0 = std::max(0, peak.i - radius);
    rect.i1 = std::min(grid.width() - 1, peak.i + radius);
    rect.j0 = std::max(0, peak.j - radius);
    rect.j1 = std::min(grid.height() - 1, peak.j + radius);
    return rect;
}

Point2 decode_landmark(const Plane& heatmap, const Plane* u, const Plane* v, const DecodeConfig& config,
                       int channel) {
    if (config.crop_radius < 0) throw ValidationError("decode crop radius must be >= 0");
    const bool use_field = config.mode == DecodeMode::FieldWeighted;
    if (use_field) {
        if (u == nullptr || v == nullptr) throw ValidationError("field-weighted decode needs offset planes");
        if (u->grid() != heatmap.grid() || v->grid() != heatmap.grid()) {
            throw ValidationError("heatmap and field grids differ");
        }
    }
    const auto peak = coarse_argmax(heatmap);
    if (!peak) throw ValidationError("no peak in channel " + std::to_string(channel));

    const CellRect rect = crop_region(*peak, config.crop_radius, heatmap.grid());
    double mass = 0.0, su = 0.0, sv = 0.0;
    for (int j = rect.j0; j <= rect.j1; ++j) {
        for (int i = rect.i0; i <= rect.i1; ++i) {
            const double w = heatmap.at(i, j);
            if (w == 0.0) continue;
            // relative to the peak to keep the sums small
            double tu = i - peak->i, tv = j - peak->j;
            if (use_field) {
                tu += u->at(i, j);
                tv += v->at(i, j);
            }
            mass += w;
            su += w * tu;
            sv += w * tv;
        }
    }
    if (mass <= 1e-12) throw NoMassError(channel);
    return {peak->i + su / mass, peak->j + sv / mass};
}

int DecodeResult::count(DecodeWarningKind kind) const {
    return static_cast<int>(std::count_if(warnings.begin(), warnings.end(),
                                          [kind](const DecodeWarning& w) { return w.kind == kind; }));
}

namespace {

DecodeResult decode_channels(const HeatmapStack& heatmaps, const BaliField* field, const DecodeConfig& config,
                             Scheme scheme) {
    DecodeResult result;
    const GridSpec grid = heatmaps.grid();
    const Point2 fallback{grid.center_u(), grid.center_v()};
    if (field != nullptr && config.crop_radius > field->radius()) {
        for (int c = 0; c < heatmaps.channel_count(); ++c) {
            result.warnings.push_back({c, DecodeWarningKind::CropExceedsField});
        }
    }
    std::vector<Point2> points;
    points.reserve(static_cast<std::size_t>(heatmaps.channel_count()));
    for (int c = 0; c < heatmaps.channel_count(); ++c) {
        const Plane& h = heatmaps.channel(c);
        if (!coarse_argmax(h)) {
            result.warnings.push_back({c, DecodeWarningKind::NoPeak});
            points.push_back(fallback);
            continue;
        }
        try {
            points.push_back(field ? decode_landmark(h, &field->u(c), &field->v(c), config, c)
                                   : decode_landmark(h, nullptr, nullptr, config, c));
        } catch (const NoMassError&) {
            result.warnings.push_back({c, DecodeWarningKind::NoMass});
            points.push_back(fallback);
        }
    }
    const Scheme resolved = scheme_size(scheme) == static_cast<int>(points.size()) ? scheme : Scheme::Custom;
    result.landmarks = LandmarkSet(resolved, std::move(points), grid);
    return result;
}

} // namespace

DecodeResult decode_all(const HeatmapStack& heatmaps, const BaliField& field, const DecodeConfig& config,
                        Scheme scheme) {
    if (heatmaps.channel_count() != field.channel_count()) {
        throw ValidationError("heatmap stack has " + std::to_string(heatmaps.channel_count()) +
                              " channels but the field has " + std::to_string(field.channel_count()));
    }
    if (heatmaps.grid() != field.grid()) throw ValidationError("heatmap and field grids differ");
    return decode_channels(heatmaps, config.mode == DecodeMode::FieldWeighted ? &field : nullptr, config, scheme);
}

DecodeResult decode_all(const HeatmapStack& heatmaps, const DecodeConfig& config, Scheme scheme) {
    if (config.mode != DecodeMode::HeatmapSoftArgmax) {
        throw ValidationError("field-weighted decode needs a field");
    }
    return decode_channels(heatmaps, nullptr, config, scheme);
}

} // namespace bali
