#pragma once

// Run configuration: a flat `key = value` text file with `#` comments.
// Every key is optional; missing keys keep the defaults below.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bali/decode.hpp"
#include "bali/disturb.hpp"
#include "bali/field.hpp"
#include "bali/losses.hpp"
#include "bali/metrics.hpp"

namespace bali {

inline constexpr const char* kConfigEnvVar = "BALI_CODEC_CONFIG";

struct RunConfig {
    EncodeOptions encode;
    DecodeConfig decode;
    LossWeights weights;
    DisturbancePolicy policy;
    std::uint64_t seed = 0;
    std::vector<double> taus{0.08, 0.10};
    NormalizationKind normalization = NormalizationKind::Interocular;
    /// Stages written by `encode`; stages before the last use `intermediate_grid`.
    int stages = 1;
    GridSpec intermediate_grid{64, 64};

    void validate() const;
};

/// Throws ValidationError naming the line for unknown keys, duplicates and
/// unparsable values; cross-field constraints are checked afterwards.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
/// Writes every key; parse_config(format_config(c)) reproduces c.
std::string format_config(const RunConfig& config);

/// Path named by BALI_CODEC_CONFIG, if set and non-empty.
std::optional<std::string> config_path_from_env();

std::string normalization_name(NormalizationKind kind);
NormalizationKind normalization_from_name(const std::string& name);

} // namespace bali
