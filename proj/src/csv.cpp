#include "tsc/csv.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tsc/error.hpp"

namespace tsc {
namespace {

class LineCursor {
 public:
  explicit LineCursor(std::string_view text) : text_(text) {}

  // Next non-empty line; line() reports its 1-based number.
  bool next(std::string_view& out) {
    while (pos_ < text_.size()) {
      const std::size_t end = std::min(text_.find('\n', pos_), text_.size());
      std::string_view line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) {
        out = line;
        return true;
      }
    }
    return false;
  }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.size() > 1 && s.front() == '+') s.remove_prefix(1);
  return s;
}

std::size_t count_fields(std::string_view line, char delim) {
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), delim)) + 1;
}

[[noreturn]] void non_numeric(std::size_t line, std::size_t column, std::string_view cell) {
  throw Error(Errc::non_numeric,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": '" + std::string(cell) +
                  "' is not a number",
              line);
}

template <typename T>
T parse_float(std::string_view raw, std::size_t line, std::size_t column) {
  const std::string_view cell = trim(raw);
  T v{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) non_numeric(line, column, raw);
  return v;
}

std::int32_t parse_int(std::string_view raw, SampleFormat format, std::size_t line, std::size_t column) {
  const std::string_view cell = trim(raw);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec == std::errc::invalid_argument) non_numeric(line, column, raw);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    // Integral values in decimal or exponent notation ("3.000000", "1e3").
    const double d = parse_float<double>(raw, line, column);
    if (!std::isfinite(d) || d != std::trunc(d) || std::abs(d) > 9.0e15) non_numeric(line, column, raw);
    v = static_cast<std::int64_t>(d);
  }
  if (v < format.min_value() || v > format.max_value()) {
    throw Error(Errc::invalid_argument,
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + std::to_string(v) +
                    " out of range for " + format.name(),
                line);
  }
  return static_cast<std::int32_t>(v);
}

// Visits each field of each data row. Checks the column count on every row.
template <typename Fn>
std::size_t for_each_row(std::string_view text, const CsvSpec& spec, std::size_t& columns, Fn&& fn) {
  LineCursor cursor(text);
  std::string_view line;
  if (spec.has_header && !cursor.next(line)) throw Error(Errc::empty_input, "CSV input is empty");
  std::size_t rows = 0;
  columns = 0;
  while (cursor.next(line)) {
    const std::size_t n = count_fields(line, spec.delimiter);
    if (rows == 0) columns = n;
    if (n != columns) {
      throw Error(Errc::ragged_row,
                  "line " + std::to_string(cursor.line()) + ": " + std::to_string(n) + " fields, expected " +
                      std::to_string(columns),
                  cursor.line());
    }
    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t end = std::min(line.find(spec.delimiter, start), line.size());
      fn(line.substr(start, end - start), col, cursor.line());
      ++col;
      if (end == line.size()) break;
      start = end + 1;
    }
    ++rows;
  }
  if (rows == 0) throw Error(Errc::empty_input, "CSV input has no data rows");
  return rows;
}

std::size_t row_capacity(std::string_view text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) + 1;
}

std::size_t first_row_columns(std::string_view text, const CsvSpec& spec) {
  LineCursor cursor(text);
  std::string_view line;
  if (spec.has_header) cursor.next(line);
  return cursor.next(line) ? count_fields(line, spec.delimiter) : 0;
}

void append_fixed(std::string& out, double v, int digits) {
  char buf[400];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  out.append(buf, r.ptr);
}

void append_fixed(std::string& out, float v, int digits) {
  char buf[400];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  out.append(buf, r.ptr);
}

void append_int(std::string& out, std::int64_t v) {
  char buf[24];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

}  // namespace

void CsvSpec::validate() const {
  const char d = delimiter;
  if ((d >= '0' && d <= '9') || d == '+' || d == '-' || d == '.' || d == 'e' || d == 'E' || d == '\n' || d == '\r') {
    throw Error(Errc::invalid_argument, std::string("invalid CSV delimiter '") + d + "'");
  }
  if (decimal_digits < 0 || decimal_digits > 17) throw Error(Errc::invalid_argument, "decimal_digits must be 0..17");
  if (time_column && *time_column < 0) throw Error(Errc::invalid_argument, "time column must be non-negative");
}

UniformStream read_uniform_csv(std::string_view text, const CsvSpec& spec, const Rational& rate_hz,
                               const StreamTarget& target) {
  spec.validate();
  const std::size_t capacity = row_capacity(text) * std::max<std::size_t>(first_row_columns(text, spec), 1);
  std::size_t columns = 0;
  if (target.format.kind() == SampleKind::float32) {
    std::vector<float> values;
    values.reserve(capacity);
    for_each_row(text, spec, columns, [&](std::string_view cell, std::size_t col, std::size_t line) {
      values.push_back(parse_float<float>(cell, line, col + 1));
    });
    return UniformStream(target.name, rate_hz, static_cast<int>(columns), target.format, target.start_time_s,
                         std::move(values), target.meta);
  }
  std::vector<std::int32_t> values;
  values.reserve(capacity);
  for_each_row(text, spec, columns, [&](std::string_view cell, std::size_t col, std::size_t line) {
    values.push_back(parse_int(cell, target.format, line, col + 1));
  });
  return UniformStream(target.name, rate_hz, static_cast<int>(columns), target.format, target.start_time_s,
                       std::move(values), target.meta);
}

TimecodedSeries read_timecoded_csv(std::string_view text, const CsvSpec& spec, std::string name) {
  spec.validate();
  if (!spec.time_column) throw Error(Errc::invalid_argument, "time-coded CSV needs a time column");
  const auto tcol = static_cast<std::size_t>(*spec.time_column);
  const std::size_t rows = row_capacity(text);
  const std::size_t cols = first_row_columns(text, spec);
  if (cols != 0 && tcol >= cols) {
    throw Error(Errc::invalid_argument,
                "time column " + std::to_string(tcol) + " outside the " + std::to_string(cols) + " columns of the file");
  }
  TimecodedSeries out;
  out.name = std::move(name);
  out.timestamps.reserve(rows);
  out.values.reserve(rows * (cols > 0 ? cols - 1 : 0));
  std::size_t columns = 0;
  for_each_row(text, spec, columns, [&](std::string_view cell, std::size_t col, std::size_t line) {
    const double v = parse_float<double>(cell, line, col + 1);
    if (col == tcol) {
      if (!std::isfinite(v)) throw Error(Errc::bad_timestamp, "line " + std::to_string(line) + ": non-finite timestamp", line);
      out.timestamps.push_back(v);
    } else {
      out.values.push_back(v);
    }
  });
  if (columns < 2) throw Error(Errc::invalid_argument, "time-coded CSV needs at least one value column");
  out.channels = static_cast<int>(columns - 1);
  return out;
}

CsvData read_csv(std::string_view text, const CsvSpec& spec, std::optional<Rational> rate_hz,
                 const StreamTarget& target) {
  if (spec.time_column) return read_timecoded_csv(text, spec, target.name);
  if (!rate_hz) throw Error(Errc::invalid_argument, "constant-rate CSV needs a sample rate");
  return read_uniform_csv(text, spec, *rate_hz, target);
}

std::string write_csv(const UniformStream& stream, const CsvSpec& spec) {
  spec.validate();
  const auto channels = static_cast<std::size_t>(stream.channels());
  const std::size_t frames = stream.frame_count();
  const bool is_float = stream.format().kind() == SampleKind::float32;
  const int tcol = spec.time_column ? std::min(*spec.time_column, stream.channels()) : -1;
  std::string out;
  out.reserve(frames * channels * (is_float ? static_cast<std::size_t>(spec.decimal_digits) + 4 : 5));
  const double rate = stream.rate_hz().to_double();
  const double start = stream.start_time_s().to_double();
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c <= channels; ++c) {
      if (static_cast<int>(c) == tcol) {
        append_fixed(out, start + static_cast<double>(i) / rate, spec.decimal_digits);
        if (c < channels) out.push_back(spec.delimiter);
      }
      if (c == channels) break;
      if (is_float) append_fixed(out, stream.float_samples()[i * channels + c], spec.decimal_digits);
      else append_int(out, stream.int_samples()[i * channels + c]);
      if (c + 1 < channels || tcol == static_cast<int>(channels)) out.push_back(spec.delimiter);
    }
    out.push_back('\n');
  }
  return out;
}

std::string write_csv(const TimecodedSeries& series, const CsvSpec& spec) {
  spec.validate();
  const auto channels = static_cast<std::size_t>(series.channels);
  const auto tcol = static_cast<std::size_t>(spec.time_column.value_or(0));
  std::string out;
  for (std::size_t r = 0; r < series.rows(); ++r) {
    for (std::size_t c = 0, v = 0; c <= channels; ++c) {
      if (c > 0) out.push_back(spec.delimiter);
      if (c == std::min(tcol, channels)) append_fixed(out, series.timestamps[r], spec.decimal_digits);
      else append_fixed(out, series.values[r * channels + v++], spec.decimal_digits);
    }
    out.push_back('\n');
  }
  return out;
}

std::vector<std::uint8_t> write_raw(const UniformStream& stream) {
  const auto width = static_cast<std::size_t>(stream.format().bits_per_sample() / 8);
  std::vector<std::uint8_t> out(stream.sample_count() * width);
  if (stream.format().kind() == SampleKind::float32) {
    const auto f = stream.float_samples();
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto u = std::bit_cast<std::uint32_t>(f[i]);
      for (std::size_t b = 0; b < 4; ++b) out[i * 4 + b] = static_cast<std::uint8_t>(u >> (8 * b));
    }
    return out;
  }
  const auto s = stream.int_samples();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto u = static_cast<std::uint32_t>(s[i]);
    for (std::size_t b = 0; b < width; ++b) out[i * width + b] = static_cast<std::uint8_t>(u >> (8 * b));
  }
  return out;
}

UniformStream read_raw(std::span<const std::uint8_t> bytes, SampleFormat format, int channels, const Rational& rate_hz,
                       const StreamTarget& target) {
  if (channels < 1) throw Error(Errc::invalid_argument, "channels must be >= 1");
  const auto width = static_cast<std::size_t>(format.bits_per_sample() / 8);
  const std::size_t row = width * static_cast<std::size_t>(channels);
  if (bytes.size() % row != 0) {
    throw Error(Errc::malformed,
                std::to_string(bytes.size()) + " bytes is not a multiple of " + std::to_string(row) + " (" +
                    format.name() + " x " + std::to_string(channels) + " channels)",
                bytes.size() - bytes.size() % row);
  }
  const std::size_t n = bytes.size() / width;
  auto load = [&](std::size_t i) {
    std::uint32_t u = 0;
    for (std::size_t b = 0; b < width; ++b) u |= static_cast<std::uint32_t>(bytes[i * width + b]) << (8 * b);
    return u;
  };
  if (format.kind() == SampleKind::float32) {
    std::vector<float> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::bit_cast<float>(load(i));
    return UniformStream(target.name, rate_hz, channels, format, target.start_time_s, std::move(v), target.meta);
  }
  const int shift = 32 - format.bits_per_sample();
  std::vector<std::int32_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<std::int32_t>(load(i) << shift) >> shift;
  return UniformStream(target.name, rate_hz, channels, format, target.start_time_s, std::move(v), target.meta);
}

std::vector<std::uint8_t> write_f32(const UniformStream& stream) {
  if (stream.format().kind() != SampleKind::float32) {
    throw Error(Errc::invalid_argument, "f32 output needs a float32 stream (got " + stream.format().name() + ")");
  }
  return write_raw(stream);
}

UniformStream read_f32(std::span<const std::uint8_t> bytes, int channels, const Rational& rate_hz,
                       const StreamTarget& target) {
  return read_raw(bytes, SampleFormat(SampleKind::float32), channels, rate_hz, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path + "'");
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  in.seekg(0);
  std::string out(static_cast<std::size_t>(size), '\0');
  if (!in.read(out.data(), size)) throw Error(Errc::io, "cannot read '" + path + "'");
  return out;
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot create '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "cannot write '" + path + "'");
}

}  // namespace tsc
