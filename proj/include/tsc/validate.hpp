#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tsc/model.hpp"

namespace tsc {

struct JitterViolation {
  std::size_t index;  // violation between timestamps[index] and timestamps[index + 1]
  double delta_s;
  double limit_s;
};

struct JitterReport {
  bool valid = true;
  std::vector<JitterViolation> violations;
  double max_delta_s = 0.0;
  Rational inferred_rate_hz;
};

/// Relative slack on the 1/rate bound, absorbing decimal-text rounding.
inline constexpr double kJitterTolerance = 1e-9;

/// Timestamps read from text with 6 decimals can be off by half a microsecond each.
inline constexpr double kDefaultTimeSlack = 1e-6;

/// Checks t[i+1] - t[i] <= 1/rate + slack_s for every i. Throws
/// Errc::non_monotonic naming the first index whose successor is earlier.
JitterReport validate_uniform(std::span<const double> timestamps, const Rational& rate_hz, double slack_s = 0.0);

/// Timestamps of a uniform stream's implicit grid, as doubles.
std::vector<double> grid_timestamps(const UniformStream& stream);

std::string render(const JitterReport& report, std::size_t max_listed = 20);

struct Comparison {
  bool equal = true;
  std::string difference;  // first difference found, empty when equal

  explicit operator bool() const noexcept { return equal; }
};

/// Bit-exact comparison: samples by bit pattern (NaN payloads included),
/// rate/format/channels/start/meta exactly, events exactly.
Comparison stream_equal(const UniformStream& a, const UniformStream& b);
Comparison track_equal(const SparseTrack& a, const SparseTrack& b);
Comparison dataset_equal(const Dataset& a, const Dataset& b);

}  // namespace tsc
