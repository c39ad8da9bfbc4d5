#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tsc/rational.hpp"

namespace tsc {

enum class SampleKind : std::uint8_t { int8, int16, int24, int32, float32 };

/// Storage format of one sample. Bit depth is derived from the kind, so the
/// two can never disagree.
class SampleFormat {
 public:
  constexpr SampleFormat() = default;
  constexpr explicit SampleFormat(SampleKind kind) : kind_(kind) {}

  constexpr SampleKind kind() const noexcept { return kind_; }
  constexpr int bits_per_sample() const noexcept {
    switch (kind_) {
      case SampleKind::int8: return 8;
      case SampleKind::int16: return 16;
      case SampleKind::int24: return 24;
      case SampleKind::int32:
      case SampleKind::float32: return 32;
    }
    return 0;
  }
  constexpr bool is_integer() const noexcept { return kind_ != SampleKind::float32; }
  /// Inclusive value range of an integer format.
  std::int64_t min_value() const noexcept { return -(std::int64_t{1} << (bits_per_sample() - 1)); }
  std::int64_t max_value() const noexcept { return (std::int64_t{1} << (bits_per_sample() - 1)) - 1; }

  std::string name() const;
  /// "int8", "int16", "int24", "int32", "float32" (also accepts "f32", "i16", ...).
  static SampleFormat parse(std::string_view text);

  friend constexpr bool operator==(SampleFormat a, SampleFormat b) noexcept { return a.kind_ == b.kind_; }

 private:
  SampleKind kind_ = SampleKind::float32;
};

using MetaMap = std::map<std::string, std::string>;

struct StreamMeta {
  std::string units;
  std::optional<Rational> si_conversion_factor;
  std::optional<Rational> range_min;
  std::optional<Rational> range_max;
  MetaMap extra;

  friend bool operator==(const StreamMeta&, const StreamMeta&) = default;
};

/// Integer formats hold their values in int32 (sign-extended); float32 holds floats.
using SampleBuffer = std::variant<std::vector<std::int32_t>, std::vector<float>>;

/// Constant-rate, channel-interleaved sample block. Sample i is at
/// start_time_s + i / rate_hz on the session clock; no per-sample timestamps.
class UniformStream {
 public:
  UniformStream(std::string name, Rational rate_hz, int channels, SampleFormat format,
                Rational start_time_s, SampleBuffer samples, StreamMeta meta = {});

  const std::string& name() const noexcept { return name_; }
  const Rational& rate_hz() const noexcept { return rate_hz_; }
  int channels() const noexcept { return channels_; }
  SampleFormat format() const noexcept { return format_; }
  const Rational& start_time_s() const noexcept { return start_time_s_; }
  const SampleBuffer& samples() const noexcept { return samples_; }
  const StreamMeta& meta() const noexcept { return meta_; }

  /// Total interleaved values.
  std::size_t sample_count() const noexcept;
  /// Values per channel (one per time step).
  std::size_t frame_count() const noexcept { return sample_count() / static_cast<std::size_t>(channels_); }

  std::span<const std::int32_t> int_samples() const;
  std::span<const float> float_samples() const;

  Rational time_of(std::size_t frame_index) const;
  /// Time just past the last frame (start + frames / rate).
  Rational end_time_s() const;

  UniformStream with_name(std::string name) const;
  UniformStream with_meta(StreamMeta meta) const;

 private:
  std::string name_;
  Rational rate_hz_;
  int channels_;
  SampleFormat format_;
  Rational start_time_s_;
  SampleBuffer samples_;
  StreamMeta meta_;
};

struct Position {
  int x = 0;
  int y = 0;
  friend bool operator==(const Position&, const Position&) = default;
};

struct Event {
  Rational time_s;
  Rational duration_s;  // 0 = instantaneous
  std::string payload;  // UTF-8; may contain '\n' but no other control characters
  std::optional<Position> position;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Independently timed events. Constructed tracks are sorted by time with
/// ties kept in insertion order.
class SparseTrack {
 public:
  SparseTrack(std::string name, std::vector<Event> events);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Event>& events() const noexcept { return events_; }

 private:
  std::string name_;
  std::vector<Event> events_;
};

/// Time-coded rows straight from a CSV file, before any resampling.
struct TimecodedSeries {
  std::string name;
  std::vector<double> timestamps;
  int channels = 1;
  std::vector<double> values;  // row-major, timestamps.size() * channels

  std::size_t rows() const noexcept { return timestamps.size(); }
  double value(std::size_t row, int channel) const { return values[row * static_cast<std::size_t>(channels) + static_cast<std::size_t>(channel)]; }
};

/// One recording session; maps to one container file.
class Dataset {
 public:
  Dataset() = default;
  Dataset(MetaMap session_meta, std::vector<UniformStream> streams, std::vector<SparseTrack> tracks);

  const MetaMap& session_meta() const noexcept { return session_meta_; }
  const std::vector<UniformStream>& streams() const noexcept { return streams_; }
  const std::vector<SparseTrack>& tracks() const noexcept { return tracks_; }

  const UniformStream* find_stream(std::string_view name) const noexcept;
  const SparseTrack* find_track(std::string_view name) const noexcept;

 private:
  MetaMap session_meta_;
  std::vector<UniformStream> streams_;
  std::vector<SparseTrack> tracks_;
};

}  // namespace tsc
