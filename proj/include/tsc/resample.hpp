#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "tsc/csv.hpp"
#include "tsc/model.hpp"

namespace tsc {

enum class Interpolation { hold, nearest, linear };
enum class GapPolicy { fill_hold, fill_nan, error };

struct ResampleStrategy {
  Interpolation kind = Interpolation::linear;
  GapPolicy gap_policy = GapPolicy::fill_hold;
  /// Absent: twice the source sample interval (median interval for time-coded input).
  std::optional<Rational> gap_threshold_s;

  /// "hold", "nearest", "linear", optionally followed by ":fill_hold",
  /// ":fill_nan" or ":error" and ":<threshold seconds>".
  static ResampleStrategy parse(std::string_view text);
};

std::string_view interpolation_name(Interpolation kind) noexcept;

/// Resamples onto the grid k / target_rate_hz, from ceil(t0 * rate) up to the
/// last input time. Input timestamps must be nondecreasing and non-negative.
UniformStream resample(const TimecodedSeries& series, const Rational& target_rate_hz, const ResampleStrategy& strategy,
                       const StreamTarget& target = {});

/// Identity (bit-exact copy) when target_rate_hz equals the stream's rate.
UniformStream resample(const UniformStream& stream, const Rational& target_rate_hz, const ResampleStrategy& strategy);

/// Brings every stream onto one grid: rate = target or the highest input rate,
/// start = latest input start, length = shortest overlap. Streams already on
/// that grid are sliced without touching sample values. Per-stream strategy
/// defaults to hold for integer formats and linear for float32.
std::vector<UniformStream> align(const std::vector<UniformStream>& streams,
                                 std::optional<Rational> target_rate_hz = std::nullopt,
                                 std::optional<ResampleStrategy> strategy = std::nullopt);

ResampleStrategy default_strategy(SampleFormat format);

}  // namespace tsc
