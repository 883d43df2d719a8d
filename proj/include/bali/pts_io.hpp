#pragma once

// 300W-style .pts annotations:
//
//   version: 1
//   n_points: 68
//   {
//   x y
//   ...
//   }

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bali/core_types.hpp"
#include "bali/metrics.hpp"

namespace bali {

class PtsParseError : public ValidationError {
public:
    PtsParseError(int line, const std::string& detail, const std::string& path = {})
        : ValidationError((path.empty() ? "" : path + ": ") + "line " + std::to_string(line) + ": " + detail),
          line_(line), detail_(detail) {}
    int line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    int line_;
    std::string detail_;
};

/// Scheme is inferred from n_points (68/98/19, else Custom). With
/// `one_based`, 1 is subtracted from every coordinate.
LandmarkSet parse_pts(std::string_view text, GridSpec grid, bool one_based = false);

/// Six decimals per coordinate; adds 1 back when `one_based`.
std::string write_pts(const LandmarkSet& landmarks, bool one_based = false);

LandmarkSet read_pts_file(const std::string& path, GridSpec grid, bool one_based = false);
void write_pts_file(const std::string& path, const LandmarkSet& landmarks, bool one_based = false);

/// Warning text when every coordinate of every set is >= 1, which suggests
/// 1-based annotations read as 0-based.
std::optional<std::string> one_based_warning(const std::vector<LandmarkSet>& dataset);

/// `<stem>.box` sidecar: four whitespace-separated reals x y w h.
BoundingBox parse_box(std::string_view text);

} // namespace bali
