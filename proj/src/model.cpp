#include "tsc/model.hpp"

#include <algorithm>
#include <set>

#include "tsc/error.hpp"

namespace tsc {

std::string SampleFormat::name() const {
  switch (kind_) {
    case SampleKind::int8: return "int8";
    case SampleKind::int16: return "int16";
    case SampleKind::int24: return "int24";
    case SampleKind::int32: return "int32";
    case SampleKind::float32: return "float32";
  }
  return "?";
}

SampleFormat SampleFormat::parse(std::string_view text) {
  if (text == "int8" || text == "i8" || text == "s8") return SampleFormat(SampleKind::int8);
  if (text == "int16" || text == "i16" || text == "s16") return SampleFormat(SampleKind::int16);
  if (text == "int24" || text == "i24" || text == "s24") return SampleFormat(SampleKind::int24);
  if (text == "int32" || text == "i32" || text == "s32") return SampleFormat(SampleKind::int32);
  if (text == "float32" || text == "f32" || text == "float") return SampleFormat(SampleKind::float32);
  throw Error(Errc::invalid_argument, "unknown sample format '" + std::string(text) + "'");
}

UniformStream::UniformStream(std::string name, Rational rate_hz, int channels, SampleFormat format,
                             Rational start_time_s, SampleBuffer samples, StreamMeta meta)
    : name_(std::move(name)),
      rate_hz_(rate_hz),
      channels_(channels),
      format_(format),
      start_time_s_(start_time_s),
      samples_(std::move(samples)),
      meta_(std::move(meta)) {
  if (rate_hz_ <= Rational(0)) throw Error(Errc::invalid_argument, "stream '" + name_ + "': rate must be positive");
  if (channels_ < 1) throw Error(Errc::invalid_argument, "stream '" + name_ + "': channels must be >= 1");
  if (start_time_s_ < Rational(0)) throw Error(Errc::invalid_argument, "stream '" + name_ + "': negative start time");
  if (format_.is_integer() != std::holds_alternative<std::vector<std::int32_t>>(samples_)) {
    throw Error(Errc::invalid_argument, "stream '" + name_ + "': sample buffer does not match format " + format_.name());
  }
  if (sample_count() % static_cast<std::size_t>(channels_) != 0) {
    throw Error(Errc::invalid_argument, "stream '" + name_ + "': sample count not divisible by channel count");
  }
  if (format_.is_integer() && format_.bits_per_sample() < 32) {
    const auto lo = format_.min_value();
    const auto hi = format_.max_value();
    const auto& ints = std::get<std::vector<std::int32_t>>(samples_);
    for (std::size_t i = 0; i < ints.size(); ++i) {
      if (ints[i] < lo || ints[i] > hi) {
        throw Error(Errc::invalid_argument,
                    "stream '" + name_ + "': sample " + std::to_string(i) + " out of range for " + format_.name(), i);
      }
    }
  }
  if (meta_.range_min && meta_.range_max && *meta_.range_min > *meta_.range_max) {
    throw Error(Errc::invalid_argument, "stream '" + name_ + "': range_min > range_max");
  }
}

std::size_t UniformStream::sample_count() const noexcept {
  return std::visit([](const auto& v) { return v.size(); }, samples_);
}

std::span<const std::int32_t> UniformStream::int_samples() const {
  if (const auto* v = std::get_if<std::vector<std::int32_t>>(&samples_)) return *v;
  throw Error(Errc::invalid_argument, "stream '" + name_ + "' holds float samples");
}

std::span<const float> UniformStream::float_samples() const {
  if (const auto* v = std::get_if<std::vector<float>>(&samples_)) return *v;
  throw Error(Errc::invalid_argument, "stream '" + name_ + "' holds integer samples");
}

Rational UniformStream::time_of(std::size_t frame_index) const {
  return start_time_s_ + Rational(static_cast<std::int64_t>(frame_index)) / rate_hz_;
}

Rational UniformStream::end_time_s() const { return time_of(frame_count()); }

UniformStream UniformStream::with_name(std::string name) const {
  UniformStream copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

UniformStream UniformStream::with_meta(StreamMeta meta) const {
  return UniformStream(name_, rate_hz_, channels_, format_, start_time_s_, samples_, std::move(meta));
}

SparseTrack::SparseTrack(std::string name, std::vector<Event> events)
    : name_(std::move(name)), events_(std::move(events)) {
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    if (e.time_s < Rational(0) || e.duration_s < Rational(0)) {
      throw Error(Errc::invalid_argument, "track '" + name_ + "': negative event time or duration", i);
    }
    for (unsigned char c : e.payload) {
      if ((c < 0x20 && c != '\n') || c == 0x7f) {
        throw Error(Errc::invalid_argument, "track '" + name_ + "': control character in event payload", i);
      }
    }
  }
  std::stable_sort(events_.begin(), events_.end(),
                   [](const Event& a, const Event& b) { return a.time_s < b.time_s; });
}

Dataset::Dataset(MetaMap session_meta, std::vector<UniformStream> streams, std::vector<SparseTrack> tracks)
    : session_meta_(std::move(session_meta)), streams_(std::move(streams)), tracks_(std::move(tracks)) {
  std::set<std::string> names;
  for (const auto& s : streams_) {
    if (!names.insert(s.name()).second) throw Error(Errc::invalid_argument, "duplicate stream/track name '" + s.name() + "'");
  }
  for (const auto& t : tracks_) {
    if (!names.insert(t.name()).second) throw Error(Errc::invalid_argument, "duplicate stream/track name '" + t.name() + "'");
  }
}

const UniformStream* Dataset::find_stream(std::string_view name) const noexcept {
  for (const auto& s : streams_) {
    if (s.name() == name) return &s;
  }
  return nullptr;
}

const SparseTrack* Dataset::find_track(std::string_view name) const noexcept {
  for (const auto& t : tracks_) {
    if (t.name() == name) return &t;
  }
  return nullptr;
}

}  // namespace tsc
