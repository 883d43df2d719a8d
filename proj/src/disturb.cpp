#include "bali/disturb.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "bali/tables.hpp"

namespace bali {

namespace {

constexpr DisturbanceKind kAllKinds[] = {
    DisturbanceKind::Rotate,       DisturbanceKind::Scale, DisturbanceKind::Flip,
    DisturbanceKind::OccludeBlack, DisturbanceKind::OccludeSelf, DisturbanceKind::Blur,
    DisturbanceKind::NoiseGaussian, DisturbanceKind::NoiseSalt, DisturbanceKind::Compose,
};

bool is_spatial_kind(DisturbanceKind kind) {
    return kind == DisturbanceKind::Rotate || kind == DisturbanceKind::Scale || kind == DisturbanceKind::Flip;
}

void flatten_into(const Disturbance& d, std::vector<const Disturbance*>& out) {
    if (d.kind == DisturbanceKind::Compose) {
        for (const Disturbance& step : d.steps) flatten_into(step, out);
    } else {
        out.push_back(&d);
    }
}

std::vector<const Disturbance*> flatten(const Disturbance& d) {
    std::vector<const Disturbance*> out;
    flatten_into(d, out);
    return out;
}

AffineTransform step_transform(const Disturbance& d, GridSpec grid) {
    const Point2 center{grid.center_u(), grid.center_v()};
    switch (d.kind) {
    case DisturbanceKind::Rotate: return AffineTransform::rotation(d.angle_deg, center);
    case DisturbanceKind::Scale: return AffineTransform::scaling(d.scale, center);
    case DisturbanceKind::Flip: return AffineTransform::horizontal_flip(grid.width());
    default: return AffineTransform::identity();
    }
}

void validate_rect(const PixelRect& r, const char* what) {
    if (r.w <= 0 || r.h <= 0) throw ValidationError(std::string(what) + " rectangle has zero area");
}

PixelRect clip(const PixelRect& r, int width, int height) {
    const int x0 = std::clamp(r.x, 0, width);
    const int y0 = std::clamp(r.y, 0, height);
    const int x1 = std::clamp(r.x + r.w, 0, width);
    const int y1 = std::clamp(r.y + r.h, 0, height);
    return {x0, y0, x1 - x0, y1 - y0};
}

} // namespace

std::string kind_name(DisturbanceKind kind) {
    switch (kind) {
    case DisturbanceKind::Rotate: return "rotate";
    case DisturbanceKind::Scale: return "scale";
    case DisturbanceKind::Flip: return "flip";
    case DisturbanceKind::OccludeBlack: return "occlude_black";
    case DisturbanceKind::OccludeSelf: return "occlude_self";
    case DisturbanceKind::Blur: return "blur";
    case DisturbanceKind::NoiseGaussian: return "noise_gaussian";
    case DisturbanceKind::NoiseSalt: return "noise_salt";
    case DisturbanceKind::Compose: return "compose";
    }
    return "compose";
}

DisturbanceKind kind_from_name(const std::string& name) {
    for (DisturbanceKind kind : kAllKinds) {
        if (kind_name(kind) == name) return kind;
    }
    throw ValidationError("unknown disturbance kind '" + name + "'");
}

Disturbance Disturbance::rotate(double degrees) {
    Disturbance d;
    d.kind = DisturbanceKind::Rotate;
    d.angle_deg = degrees;
    return d;
}

Disturbance Disturbance::scaling(double factor) {
    Disturbance d;
    d.kind = DisturbanceKind::Scale;
    d.scale = factor;
    return d;
}

Disturbance Disturbance::flip() {
    Disturbance d;
    d.kind = DisturbanceKind::Flip;
    return d;
}

Disturbance Disturbance::occlude_black(PixelRect rect) {
    Disturbance d;
    d.kind = DisturbanceKind::OccludeBlack;
    d.rect = rect;
    return d;
}

Disturbance Disturbance::occlude_self(PixelRect source, PixelRect destination) {
    Disturbance d;
    d.kind = DisturbanceKind::OccludeSelf;
    d.source = source;
    d.rect = destination;
    return d;
}

Disturbance Disturbance::blur(int factor) {
    Disturbance d;
    d.kind = DisturbanceKind::Blur;
    d.blur_factor = factor;
    return d;
}

Disturbance Disturbance::gaussian_noise(double sigma, std::uint64_t seed) {
    Disturbance d;
    d.kind = DisturbanceKind::NoiseGaussian;
    d.noise_sigma = sigma;
    d.seed = seed;
    return d;
}

Disturbance Disturbance::salt_noise(double probability, std::uint64_t seed) {
    Disturbance d;
    d.kind = DisturbanceKind::NoiseSalt;
    d.salt_prob = probability;
    d.seed = seed;
    return d;
}

Disturbance Disturbance::compose(std::vector<Disturbance> steps) {
    Disturbance d;
    d.kind = DisturbanceKind::Compose;
    d.steps = std::move(steps);
    return d;
}

bool Disturbance::is_spatial() const {
    const auto steps_flat = flatten(*this);
    return std::any_of(steps_flat.begin(), steps_flat.end(),
                       [](const Disturbance* s) { return is_spatial_kind(s->kind); });
}

int Disturbance::flip_count() const {
    const auto steps_flat = flatten(*this);
    return static_cast<int>(std::count_if(steps_flat.begin(), steps_flat.end(),
                                          [](const Disturbance* s) { return s->kind == DisturbanceKind::Flip; }));
}

void Disturbance::validate() const {
    switch (kind) {
    case DisturbanceKind::Rotate:
        if (!std::isfinite(angle_deg) || angle_deg < -60.0 || angle_deg > 60.0) {
            throw ValidationError("rotation angle must lie in [-60, 60] degrees");
        }
        break;
    case DisturbanceKind::Scale:
        if (!std::isfinite(scale) || scale < 0.5 || scale > 1.0) {
            throw ValidationError("scale factor must lie in [0.5, 1]");
        }
        break;
    case DisturbanceKind::Flip: break;
    case DisturbanceKind::OccludeBlack: validate_rect(rect, "occlusion"); break;
    case DisturbanceKind::OccludeSelf:
        validate_rect(rect, "occlusion destination");
        validate_rect(source, "occlusion source");
        if (rect.w != source.w || rect.h != source.h) {
            throw ValidationError("self-occlusion source and destination sizes differ");
        }
        break;
    case DisturbanceKind::Blur:
        if (blur_factor != 2 && blur_factor != 4 && blur_factor != 8 && blur_factor != 16) {
            throw ValidationError("blur factor must be one of 2, 4, 8, 16");
        }
        break;
    case DisturbanceKind::NoiseGaussian:
        if (!std::isfinite(noise_sigma) || noise_sigma < 0.0) throw ValidationError("noise sigma must be >= 0");
        break;
    case DisturbanceKind::NoiseSalt:
        if (!std::isfinite(salt_prob) || salt_prob < 0.0 || salt_prob > 1.0) {
            throw ValidationError("salt probability must lie in [0, 1]");
        }
        break;
    case DisturbanceKind::Compose:
        for (const Disturbance& step : steps) step.validate();
        break;
    }
}

AffineTransform spatial_transform(const Disturbance& d, GridSpec grid) {
    AffineTransform total;
    for (const Disturbance* step : flatten(d)) total = total.then(step_transform(*step, grid));
    return total;
}

void DisturbancePolicy::validate() const {
    if (kinds.empty()) throw ValidationError("disturbance policy enables no kinds");
    if (std::find(kinds.begin(), kinds.end(), DisturbanceKind::Compose) != kinds.end()) {
        throw ValidationError("policy kinds must be primitive; use `combine` for compositions");
    }
    if (!(max_rotation_deg >= 0.0) || max_rotation_deg > 60.0) {
        throw ValidationError("policy rotation range must lie within [-60, 60]");
    }
    if (!(min_scale >= 0.5) || !(max_scale <= 1.0) || min_scale > max_scale) {
        throw ValidationError("policy scale range must lie within [0.5, 1]");
    }
    if (blur_factors.empty()) throw ValidationError("policy lists no blur factors");
    for (int f : blur_factors) Disturbance::blur(f).validate();
    if (!(occlusion_min > 0.0) || occlusion_max > 1.0 || occlusion_min > occlusion_max) {
        throw ValidationError("policy occlusion fractions must satisfy 0 < min <= max <= 1");
    }
    if (image_width <= 0 || image_height <= 0) throw ValidationError("policy image size must be positive");
    Disturbance::gaussian_noise(noise_sigma, 0).validate();
    Disturbance::salt_noise(salt_prob, 0).validate();
}

namespace {

PixelRect random_rect(std::mt19937_64& rng, const DisturbancePolicy& policy) {
    std::uniform_real_distribution<double> frac(policy.occlusion_min, policy.occlusion_max);
    const int w = std::max(1, static_cast<int>(std::lround(frac(rng) * policy.image_width)));
    const int h = std::max(1, static_cast<int>(std::lround(frac(rng) * policy.image_height)));
    std::uniform_int_distribution<int> px(0, policy.image_width - w);
    std::uniform_int_distribution<int> py(0, policy.image_height - h);
    const int x = px(rng);
    const int y = py(rng);
    return {x, y, w, h};
}

Disturbance draw_kind(std::mt19937_64& rng, DisturbanceKind kind, const DisturbancePolicy& policy) {
    switch (kind) {
    case DisturbanceKind::Rotate: {
        std::uniform_real_distribution<double> angle(-policy.max_rotation_deg, policy.max_rotation_deg);
        return Disturbance::rotate(angle(rng));
    }
    case DisturbanceKind::Scale: {
        std::uniform_real_distribution<double> s(policy.min_scale, policy.max_scale);
        return Disturbance::scaling(s(rng));
    }
    case DisturbanceKind::Flip: return Disturbance::flip();
    case DisturbanceKind::OccludeBlack: return Disturbance::occlude_black(random_rect(rng, policy));
    case DisturbanceKind::OccludeSelf: {
        const PixelRect dst = random_rect(rng, policy);
        std::uniform_int_distribution<int> px(0, policy.image_width - dst.w);
        std::uniform_int_distribution<int> py(0, policy.image_height - dst.h);
        const int x = px(rng);
        const int y = py(rng);
        return Disturbance::occlude_self({x, y, dst.w, dst.h}, dst);
    }
    case DisturbanceKind::Blur: {
        std::uniform_int_distribution<std::size_t> pick(0, policy.blur_factors.size() - 1);
        return Disturbance::blur(policy.blur_factors[pick(rng)]);
    }
    case DisturbanceKind::NoiseGaussian: return Disturbance::gaussian_noise(policy.noise_sigma, rng());
    case DisturbanceKind::NoiseSalt: return Disturbance::salt_noise(policy.salt_prob, rng());
    case DisturbanceKind::Compose: break;
    }
    throw ValidationError("cannot sample a compose disturbance directly");
}

} // namespace

Disturbance sample_disturbance(std::mt19937_64& rng, const DisturbancePolicy& policy) {
    policy.validate();
    if (!policy.combine) {
        std::uniform_int_distribution<std::size_t> pick(0, policy.kinds.size() - 1);
        return draw_kind(rng, policy.kinds[pick(rng)], policy);
    }
    std::vector<DisturbanceKind> chosen;
    std::bernoulli_distribution coin(0.5);
    for (DisturbanceKind kind : policy.kinds) {
        if (coin(rng)) chosen.push_back(kind);
    }
    if (chosen.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, policy.kinds.size() - 1);
        chosen.push_back(policy.kinds[pick(rng)]);
    }
    std::vector<Disturbance> steps;
    for (DisturbanceKind kind : chosen) steps.push_back(draw_kind(rng, kind, policy));
    Disturbance d = steps.size() == 1 ? steps.front() : Disturbance::compose(std::move(steps));
    return d;
}

Disturbance sample_disturbance(std::uint64_t seed, const DisturbancePolicy& policy) {
    std::mt19937_64 rng(seed);
    Disturbance d = sample_disturbance(rng, policy);
    if (d.kind == DisturbanceKind::Compose || is_spatial_kind(d.kind)) d.seed = seed;
    return d;
}

namespace {

void apply_texture(const Disturbance& d, Image& image) {
    switch (d.kind) {
    case DisturbanceKind::OccludeBlack: {
        const PixelRect r = clip(d.rect, image.width, image.height);
        for (int y = r.y; y < r.y + r.h; ++y) {
            for (int x = r.x; x < r.x + r.w; ++x) {
                for (int c = 0; c < image.channels; ++c) image.at(x, y, c) = 0.0f;
            }
        }
        break;
    }
    case DisturbanceKind::OccludeSelf: {
        const Image src = image;
        for (int dy = 0; dy < d.rect.h; ++dy) {
            for (int dx = 0; dx < d.rect.w; ++dx) {
                const int sx = d.source.x + dx, sy = d.source.y + dy;
                const int tx = d.rect.x + dx, ty = d.rect.y + dy;
                if (sx < 0 || sy < 0 || sx >= image.width || sy >= image.height) continue;
                if (tx < 0 || ty < 0 || tx >= image.width || ty >= image.height) continue;
                for (int c = 0; c < image.channels; ++c) image.at(tx, ty, c) = src.at(sx, sy, c);
            }
        }
        break;
    }
    case DisturbanceKind::Blur: {
        const int w = std::max(1, image.width / d.blur_factor);
        const int h = std::max(1, image.height / d.blur_factor);
        image = resize_bicubic(resize_bicubic(image, w, h), image.width, image.height);
        break;
    }
    case DisturbanceKind::NoiseGaussian: {
        std::mt19937_64 rng(d.seed);
        std::normal_distribution<double> noise(0.0, d.noise_sigma);
        for (float& x : image.data) x = static_cast<float>(std::clamp(x + noise(rng), 0.0, 1.0));
        break;
    }
    case DisturbanceKind::NoiseSalt: {
        std::mt19937_64 rng(d.seed);
        std::bernoulli_distribution salt(d.salt_prob);
        for (int y = 0; y < image.height; ++y) {
            for (int x = 0; x < image.width; ++x) {
                if (!salt(rng)) continue;
                for (int c = 0; c < image.channels; ++c) image.at(x, y, c) = 1.0f;
            }
        }
        break;
    }
    default: break;
    }
}

} // namespace

Image apply_to_image(const Disturbance& d, const Image& image) {
    d.validate();
    if (image.width < GridSpec::kMinSide || image.height < GridSpec::kMinSide) {
        throw ValidationError("image is smaller than the minimum grid");
    }
    const GridSpec grid(image.width, image.height);
    Image out = image;
    std::optional<AffineTransform> pending;
    auto flush = [&]() {
        if (pending) out = warp_image(out, *pending);
        pending.reset();
    };
    for (const Disturbance* step : flatten(d)) {
        if (is_spatial_kind(step->kind)) {
            pending = pending.value_or(AffineTransform::identity()).then(step_transform(*step, grid));
        } else {
            flush();
            apply_texture(*step, out);
        }
    }
    flush();
    return out;
}

ChannelFlips ChannelFlips::for_scheme(Scheme scheme) {
    ChannelFlips flips;
    flips.landmarks = flip_permutation(scheme);
    if (scheme == Scheme::IBUG68) flips.boundaries = default_boundary_flip(scheme);
    return flips;
}

namespace {

template <typename T>
std::vector<T> permute_channels(std::vector<T> channels, const FlipPermutation& perm, const char* what) {
    if (perm.size() != static_cast<int>(channels.size())) {
        throw ValidationError(std::string("flip needs a ") + what + " permutation of size " +
                              std::to_string(channels.size()));
    }
    std::vector<T> out;
    out.reserve(channels.size());
    for (int c = 0; c < perm.size(); ++c) out.push_back(std::move(channels[static_cast<std::size_t>(perm[c])]));
    return out;
}

} // namespace

LandmarkSet transfer_landmarks(const Disturbance& d, const LandmarkSet& landmarks, const FlipPermutation& perm) {
    if (!d.is_spatial()) return landmarks;
    LandmarkSet moved = apply_affine(spatial_transform(d, landmarks.grid()), landmarks);
    if (d.flip_count() % 2 == 0) return moved;
    auto points = permute_channels(moved.points(), perm, "landmark");
    return LandmarkSet(landmarks.scheme(), std::move(points), landmarks.grid());
}

HeatmapStack transfer_heatmap(const Disturbance& d, const HeatmapStack& stack, const ChannelFlips& flips) {
    if (!d.is_spatial()) return stack;
    const AffineTransform forward = spatial_transform(d, stack.grid());
    std::vector<Plane> channels;
    channels.reserve(stack.channels().size());
    for (const Plane& plane : stack.channels()) channels.push_back(warp_plane(plane, forward));
    if (d.flip_count() % 2 == 1) {
        const bool landmark = stack.kind() == HeatmapKind::Landmark;
        channels = permute_channels(std::move(channels), landmark ? flips.landmarks : flips.boundaries,
                                    landmark ? "landmark" : "boundary");
    }
    return HeatmapStack(stack.kind(), stack.grid(), std::move(channels));
}

BaliField transfer_field(const Disturbance& d, const BaliField& field, const FlipPermutation& perm) {
    if (!d.is_spatial()) return field;
    const GridSpec grid = field.grid();
    const AffineTransform forward = spatial_transform(d, grid);
    const AffineTransform inverse = forward.inverse();
    std::vector<Plane> us, vs;
    std::vector<BinaryMap> supports;
    for (int c = 0; c < field.channel_count(); ++c) {
        Plane mask(grid);
        for (std::size_t k = 0; k < mask.values().size(); ++k) mask.values()[k] = field.support(c).cells[k];
        Plane u(grid), v(grid);
        BinaryMap support(grid);
        for (int j = 0; j < grid.height(); ++j) {
            for (int i = 0; i < grid.width(); ++i) {
                const Point2 src = inverse.apply({static_cast<double>(i), static_cast<double>(j)});
                if (sample_bilinear(mask, src.u, src.v) <= 0.0) continue;
                const Point2 offset{sample_bilinear(field.u(c), src.u, src.v),
                                    sample_bilinear(field.v(c), src.u, src.v)};
                const Point2 moved = forward.apply_vector(offset);
                u.at(i, j) = static_cast<float>(moved.u);
                v.at(i, j) = static_cast<float>(moved.v);
                support.set(i, j);
            }
        }
        us.push_back(std::move(u));
        vs.push_back(std::move(v));
        supports.push_back(std::move(support));
    }
    if (d.flip_count() % 2 == 1) {
        us = permute_channels(std::move(us), perm, "landmark");
        vs = permute_channels(std::move(vs), perm, "landmark");
        supports = permute_channels(std::move(supports), perm, "landmark");
    }
    return BaliField(grid, field.radius(), std::move(us), std::move(vs), std::move(supports));
}

PairedSample make_pair(const Image& image, const std::optional<LandmarkSet>& landmarks, const Disturbance& d,
                       const FlipPermutation& perm) {
    PairedSample pair;
    pair.image_alpha = image;
    pair.image_beta = apply_to_image(d, image);
    pair.disturbance = d;
    if (landmarks) {
        pair.landmarks_alpha = landmarks;
        pair.landmarks_beta = transfer_landmarks(d, *landmarks, perm);
    }
    return pair;
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json rect_json(const PixelRect& r) { return ordered_json::array({r.x, r.y, r.w, r.h}); }

PixelRect rect_from(const ordered_json& j) {
    if (!j.is_array() || j.size() != 4) throw ValidationError("rectangle must be [x, y, w, h]");
    return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

ordered_json to_json(const Disturbance& d) {
    ordered_json params = ordered_json::object();
    switch (d.kind) {
    case DisturbanceKind::Rotate: params["theta"] = d.angle_deg; break;
    case DisturbanceKind::Scale: params["s"] = d.scale; break;
    case DisturbanceKind::Flip: break;
    case DisturbanceKind::OccludeBlack: params["rect"] = rect_json(d.rect); break;
    case DisturbanceKind::OccludeSelf:
        params["src"] = rect_json(d.source);
        params["dst"] = rect_json(d.rect);
        break;
    case DisturbanceKind::Blur: params["factor"] = d.blur_factor; break;
    case DisturbanceKind::NoiseGaussian: params["sigma"] = d.noise_sigma; break;
    case DisturbanceKind::NoiseSalt: params["p"] = d.salt_prob; break;
    case DisturbanceKind::Compose: {
        ordered_json steps = ordered_json::array();
        for (const Disturbance& s : d.steps) steps.push_back(to_json(s));
        params["steps"] = std::move(steps);
        break;
    }
    }
    ordered_json out;
    out["kind"] = kind_name(d.kind);
    out["params"] = std::move(params);
    out["seed"] = d.seed;
    return out;
}

Disturbance from_json(const ordered_json& j) {
    if (!j.is_object() || !j.contains("kind")) throw ValidationError("disturbance record needs a kind");
    Disturbance d;
    d.kind = kind_from_name(j.at("kind").get<std::string>());
    const ordered_json params = j.value("params", ordered_json::object());
    switch (d.kind) {
    case DisturbanceKind::Rotate: d.angle_deg = params.at("theta").get<double>(); break;
    case DisturbanceKind::Scale: d.scale = params.at("s").get<double>(); break;
    case DisturbanceKind::Flip: break;
    case DisturbanceKind::OccludeBlack: d.rect = rect_from(params.at("rect")); break;
    case DisturbanceKind::OccludeSelf:
        d.source = rect_from(params.at("src"));
        d.rect = rect_from(params.at("dst"));
        break;
    case DisturbanceKind::Blur: d.blur_factor = params.at("factor").get<int>(); break;
    case DisturbanceKind::NoiseGaussian: d.noise_sigma = params.at("sigma").get<double>(); break;
    case DisturbanceKind::NoiseSalt: d.salt_prob = params.at("p").get<double>(); break;
    case DisturbanceKind::Compose:
        for (const auto& step : params.at("steps")) d.steps.push_back(from_json(step));
        break;
    }
    d.seed = j.value("seed", std::uint64_t{0});
    return d;
}

} // namespace

std::string to_json_line(const Disturbance& d) { return to_json(d).dump(); }

Disturbance disturbance_from_json(const std::string& text) {
    try {
        Disturbance d = from_json(ordered_json::parse(text));
        d.validate();
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed disturbance record: ") + e.what());
    }
}

} // namespace bali
