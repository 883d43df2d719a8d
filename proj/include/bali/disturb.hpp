#pragma once

// Paired-sample generation: a declarative disturbance, its effect on an
// image, and the induced transfer operator on landmarks, heatmaps and
// offset fields. Texture disturbances leave every tensor untouched.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bali/core_types.hpp"
#include "bali/field.hpp"
#include "bali/heatmap.hpp"
#include "bali/image.hpp"

namespace bali {

enum class DisturbanceKind {
    Rotate,
    Scale,
    Flip,
    OccludeBlack,
    OccludeSelf,
    Blur,
    NoiseGaussian,
    NoiseSalt,
    Compose,
};

std::string kind_name(DisturbanceKind kind);
DisturbanceKind kind_from_name(const std::string& name);

struct PixelRect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

struct Disturbance {
    DisturbanceKind kind = DisturbanceKind::Compose;
    double angle_deg = 0.0;     ///< Rotate
    double scale = 1.0;         ///< Scale
    PixelRect rect;             ///< OccludeBlack target, OccludeSelf destination
    PixelRect source;           ///< OccludeSelf source
    int blur_factor = 2;        ///< Blur
    double noise_sigma = 0.05;  ///< NoiseGaussian, images in [0, 1]
    double salt_prob = 0.02;    ///< NoiseSalt
    std::vector<Disturbance> steps; ///< Compose, applied in order
    std::uint64_t seed = 0;

    static Disturbance rotate(double degrees);
    static Disturbance scaling(double factor);
    static Disturbance flip();
    static Disturbance occlude_black(PixelRect rect);
    static Disturbance occlude_self(PixelRect source, PixelRect destination);
    static Disturbance blur(int factor);
    static Disturbance gaussian_noise(double sigma, std::uint64_t seed);
    static Disturbance salt_noise(double probability, std::uint64_t seed);
    static Disturbance compose(std::vector<Disturbance> steps);

    /// True when any component moves pixels (rotate, scale, flip).
    bool is_spatial() const;
    /// Number of flips in the (flattened) composition.
    int flip_count() const;
    /// Throws ValidationError on out-of-range parameters.
    void validate() const;

    friend bool operator==(const Disturbance&, const Disturbance&) = default;
};

/// Composite spatial map on `grid`; rotations and scalings act about the grid
/// centre, flips mirror about its vertical centre line. Identity for texture kinds.
AffineTransform spatial_transform(const Disturbance& d, GridSpec grid);

struct DisturbancePolicy {
    std::vector<DisturbanceKind> kinds{DisturbanceKind::Rotate, DisturbanceKind::Scale, DisturbanceKind::Flip};
    double max_rotation_deg = 60.0;
    double min_scale = 0.5;
    double max_scale = 1.0;
    std::vector<int> blur_factors{2, 4, 8, 16};
    double noise_sigma = 0.05;
    double salt_prob = 0.02;
    double occlusion_min = 0.2; ///< fraction of the image side
    double occlusion_max = 0.5;
    int image_width = 256;
    int image_height = 256;
    /// Draw a random non-empty subset of `kinds` and compose it instead of a single kind.
    bool combine = false;

    void validate() const;
};

Disturbance sample_disturbance(std::mt19937_64& rng, const DisturbancePolicy& policy);
Disturbance sample_disturbance(std::uint64_t seed, const DisturbancePolicy& policy);

Image apply_to_image(const Disturbance& d, const Image& image);

/// Mirror channel permutations needed when a disturbance contains a flip.
struct ChannelFlips {
    FlipPermutation landmarks;
    FlipPermutation boundaries;

    static ChannelFlips for_scheme(Scheme scheme);
};

LandmarkSet transfer_landmarks(const Disturbance& d, const LandmarkSet& landmarks, const FlipPermutation& perm);
HeatmapStack transfer_heatmap(const Disturbance& d, const HeatmapStack& stack, const ChannelFlips& flips);
/// Positions warp like heatmaps; offset vectors also go through the linear
/// part of the map so cell + offset keeps pointing at the moved landmark.
BaliField transfer_field(const Disturbance& d, const BaliField& field, const FlipPermutation& perm);

struct PairedSample {
    Image image_alpha;
    Image image_beta;
    std::optional<LandmarkSet> landmarks_alpha;
    std::optional<LandmarkSet> landmarks_beta;
    Disturbance disturbance;
};

PairedSample make_pair(const Image& image, const std::optional<LandmarkSet>& landmarks, const Disturbance& d,
                       const FlipPermutation& perm);

/// Single-line JSON record: {"kind":..,"params":{..},"seed":..}.
std::string to_json_line(const Disturbance& d);
Disturbance disturbance_from_json(const std::string& text);

} // namespace bali
