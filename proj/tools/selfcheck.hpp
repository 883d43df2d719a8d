#pragma once

// The invariant suite behind `bali selftest` and the acceptance test. Each
// check compares library output with an independent oracle at a fixed
// tolerance and reports one line.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bali/core_types.hpp"

namespace bali::selfcheck {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Uniform landmarks at least `margin` px inside `grid`.
LandmarkSet random_landmarks(std::mt19937_64& rng, Scheme scheme, int count, GridSpec grid, double margin);

struct RoundtripStats {
    int samples = 0;
    double max_error = 0.0;
    double seconds = 0.0;
};

/// Encode (R = 5, sigma = 1.5) and decode (r = 3) `n` random IBUG68 sets on
/// a 128 x 128 grid. Sample k is drawn from seed + k, so results do not
/// depend on `jobs`.
RoundtripStats roundtrip_trials(int n, std::uint64_t seed, int jobs = 1);

CheckResult check_roundtrip(std::uint64_t seed);
CheckResult check_field_advantage(std::uint64_t seed);
CheckResult check_equivariance(std::uint64_t seed);
CheckResult check_self_calibration_null(std::uint64_t seed);
CheckResult check_js_axioms(std::uint64_t seed);
CheckResult check_kernel_limits();
CheckResult check_distance_transform(std::uint64_t seed);
CheckResult check_metrics(std::uint64_t seed);
CheckResult check_loss_bookkeeping(std::uint64_t seed);
CheckResult check_format_round_trips(std::uint64_t seed);

std::vector<CheckResult> run_all(std::uint64_t seed);

/// "PASS  3  equivariance: ..." style line.
std::string format_result(const CheckResult& result);

} // namespace bali::selfcheck
