#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tsc/model.hpp"

namespace tsc {

struct CsvSpec {
  char delimiter = ',';
  bool has_header = false;
  std::optional<int> time_column;  // absent: constant-rate file
  int decimal_digits = 6;          // float output precision

  /// Rejects digits, signs, '.', 'e'/'E' and line breaks as delimiters.
  void validate() const;
};

/// Identity given to a stream parsed from a constant-rate file.
struct StreamTarget {
  std::string name = "stream";
  SampleFormat format{SampleKind::float32};
  Rational start_time_s{0};
  StreamMeta meta;
};

using CsvData = std::variant<UniformStream, TimecodedSeries>;

/// Constant-rate files (no time column) need `rate_hz` and yield a
/// UniformStream; time-coded files yield a TimecodedSeries. Empty lines are
/// skipped and a trailing '\r' is dropped. Errors carry the 1-based line.
CsvData read_csv(std::string_view text, const CsvSpec& spec, std::optional<Rational> rate_hz = std::nullopt,
                 const StreamTarget& target = {});

UniformStream read_uniform_csv(std::string_view text, const CsvSpec& spec, const Rational& rate_hz,
                               const StreamTarget& target = {});
TimecodedSeries read_timecoded_csv(std::string_view text, const CsvSpec& spec, std::string name = "series");

/// float32 values use fixed notation with spec.decimal_digits; integer formats
/// are written as plain integers. With spec.time_column set, each row gets
/// the sample time (fixed, decimal_digits) at that column.
std::string write_csv(const UniformStream& stream, const CsvSpec& spec = {});
std::string write_csv(const TimecodedSeries& series, const CsvSpec& spec = {});

/// Headerless little-endian interleaved samples of the stream's own width
/// (int24 as 3 bytes). For float32 this is the ".f32" convention.
std::vector<std::uint8_t> write_raw(const UniformStream& stream);
UniformStream read_raw(std::span<const std::uint8_t> bytes, SampleFormat format, int channels, const Rational& rate_hz,
                       const StreamTarget& target = {});

/// float32 only.
std::vector<std::uint8_t> write_f32(const UniformStream& stream);
UniformStream read_f32(std::span<const std::uint8_t> bytes, int channels, const Rational& rate_hz,
                       const StreamTarget& target = {});

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);
inline void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace tsc
