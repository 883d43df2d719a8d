#pragma once

// Lookup tables shipped as data files under data/ and compiled into the
// library: mirror permutations, eye landmark groups and colormaps.

#include <array>
#include <string_view>
#include <vector>

#include "bali/core_types.hpp"

namespace bali {

struct EyeTable {
    int outer_left = 0;
    int outer_right = 0;
    std::vector<int> left;
    std::vector<int> right;
};

using Rgb = std::array<unsigned char, 3>;
using Colormap = std::array<Rgb, 256>;

/// Throws ValidationError for Custom (no table ships for it).
FlipPermutation flip_permutation(Scheme scheme);
EyeTable eye_table(Scheme scheme);
bool has_eye_table(Scheme scheme) noexcept;

/// Perceptually uniform sequential map for confidences.
const Colormap& sequential_colormap();
/// Diverging map for signed offsets; entry 128 is the neutral colour.
const Colormap& diverging_colormap();

// Parsers for the table text formats, exposed for tests.
FlipPermutation parse_flip_table(std::string_view text);
EyeTable parse_eye_table(std::string_view text, Scheme scheme);
Colormap parse_colormap(std::string_view text);

namespace embedded {
// Raw data file contents, generated at build time.
extern const std::string_view flip_ibug68;
extern const std::string_view flip_wflw98;
extern const std::string_view flip_aflw19;
extern const std::string_view eye_tables;
extern const std::string_view colormap_viridis;
extern const std::string_view colormap_coolwarm;
} // namespace embedded

} // namespace bali
