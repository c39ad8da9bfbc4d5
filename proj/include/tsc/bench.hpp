#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsc/model.hpp"

// Storage and decode-time comparison of serialization formats on synthetic
// sensor data, normalized to a plain CSV baseline.

namespace tsc::bench {

enum class ProfileKind { runlength8, unit_range, wide_range, noise };

std::string_view profile_name(ProfileKind kind) noexcept;
ProfileKind parse_profile(std::string_view text);
inline constexpr ProfileKind kAllProfiles[] = {ProfileKind::runlength8, ProfileKind::unit_range,
                                               ProfileKind::wide_range, ProfileKind::noise};

struct SyntheticProfile {
  ProfileKind kind = ProfileKind::runlength8;
  Rational duration_s{10};
  Rational rate_hz{100};
  int channels = 1;
  std::uint64_t seed = 1;

  /// Frames (time steps) the generator produces.
  std::size_t frames() const;
  /// Profile of `samples` total values at 100 Hz, one channel.
  static SyntheticProfile with_samples(ProfileKind kind, std::size_t samples, std::uint64_t seed = 1);
};

/// runlength8: int8 held over geometric runs (mean 50); unit_range: float32
/// walk clamped to [0, 1] on a 1e-4 grid; wide_range: float32 walk within
/// +-1e4 on a 1e-2 grid; noise: uniform full-scale int24. Deterministic per seed.
UniformStream generate(const SyntheticProfile& profile);

/// Lossless-friendly reinterpretation in another sample format. Integers move
/// between widths by bit shifts, integers become floats as v / 2^(bits-1),
/// floats become integers by mapping their [min, max] onto the full range.
UniformStream convert_format(const UniformStream& stream, SampleFormat format);

enum class Format { csv, csv_gz, csv_xz, f32, flac, ts_rice32, mkv_full };

std::string_view format_name(Format f) noexcept;
Format parse_format(std::string_view text);
inline constexpr Format kAllFormats[] = {Format::csv,  Format::csv_gz,    Format::csv_xz,  Format::f32,
                                         Format::flac, Format::ts_rice32, Format::mkv_full};

struct MeasureOptions {
  int trials = 5;  // timed trials, after one discarded warm-up run
  int decimal_digits = 6;
};

struct Measurement {
  Format format = Format::csv;
  /// "ok", "skipped(<tool>)", "n/a(<reason>)" or "error(<reason>)".
  std::string status = "ok";
  std::size_t bytes = 0;
  std::uint64_t decode_ns = 0;  // median
  int trials = 0;

  bool ok() const noexcept { return status == "ok"; }
};

/// Serializes, verifies one decode against the source, then times decoding
/// from an in-memory buffer (or from a temp file through the external tool).
Measurement measure_format(const UniformStream& stream, Format format, const MeasureOptions& options = {});

/// True when `name` is found on PATH.
bool have_tool(const std::string& name);

struct BenchRow {
  std::string profile;
  std::size_t samples = 0;
  std::string sample_format;
  Measurement m;
  double storage_factor = 0;  // bytes / csv bytes
  double runtime_factor = 0;  // decode_ns / csv decode_ns
  int digits = 6;
};

struct BenchReport {
  std::vector<BenchRow> rows;

  const BenchRow* find(std::string_view profile, std::size_t samples, Format format) const;
};

struct ProfileResult {
  std::string profile;
  std::size_t samples = 0;
  std::string sample_format;
  std::vector<Measurement> measurements;
};

/// Normalizes every row against its profile's CSV row. Throws when a profile
/// has no successful CSV measurement.
BenchReport report(const std::vector<ProfileResult>& results, int decimal_digits = 6);

struct BenchPlan {
  std::vector<ProfileKind> profiles{std::begin(kAllProfiles), std::end(kAllProfiles)};
  std::vector<std::size_t> sizes{1000, 100000};
  std::vector<Format> formats{std::begin(kAllFormats), std::end(kAllFormats)};
  MeasureOptions options;
  std::uint64_t seed = 1;
};

BenchReport run(const BenchPlan& plan);

/// Aligned table; skipped rows show "—" and the reason.
std::string render_text(const BenchReport& report);
/// One "BENCH key=value ..." line per row, fixed field order.
std::string render_machine(const BenchReport& report);
/// Inverse of render_machine (factors are recomputed by callers if needed).
BenchReport parse_machine(std::string_view text);

}  // namespace tsc::bench
