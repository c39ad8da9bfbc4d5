#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsc/encoded_track.hpp"
#include "tsc/mkv.hpp"
#include "tsc/model.hpp"

// Dataset <-> container: codec selection, the track tag scheme and decoding.

namespace tsc {

enum class CodecChoice { automatic, flac, rice32, pcm };

/// "auto", "flac", "rice32", "pcm".
CodecChoice parse_codec_choice(std::string_view text);
std::string_view codec_choice_name(CodecChoice choice) noexcept;

// Track tag names. RATE and START_TIME hold exact rationals, so a stream
// survives the container's float SamplingFrequency and millisecond ticks.
namespace tag {
inline constexpr const char* units = "UNITS";
inline constexpr const char* si_factor = "SI_FACTOR";
inline constexpr const char* range_min = "RANGE_MIN";
inline constexpr const char* range_max = "RANGE_MAX";
inline constexpr const char* rate = "RATE";
inline constexpr const char* start_time = "START_TIME";
inline constexpr const char* sample_format = "SAMPLE_FORMAT";
inline constexpr const char* block_size = "BLOCK_SIZE";
inline constexpr const char* extra_prefix = "EXTRA_";
}  // namespace tag

struct PackOptions {
  CodecChoice codec = CodecChoice::automatic;
  std::optional<std::uint32_t> block_size;
  mkv::MuxOptions mux;
};

/// About one second of samples per block, clamped to [16, 4096], so a block
/// never spans much more than a cluster.
std::uint32_t plan_block_size(const UniformStream& stream);

/// Automatic: FLAC for int8/16/24, A_TS/RICE32 for int32/float32.
EncodedTrack encode_stream(const UniformStream& stream, CodecChoice codec = CodecChoice::automatic,
                           std::optional<std::uint32_t> block_size = std::nullopt);
/// S_TEXT/ASS: one block per event.
EncodedTrack encode_track(const SparseTrack& track);

MetaMap stream_tags(const UniformStream& stream, std::uint32_t block_size);

/// `encoded` holds one entry per stream, then one per sparse track, in dataset order.
std::vector<std::uint8_t> mux_dataset(const Dataset& dataset, const std::vector<EncodedTrack>& encoded,
                                      const mkv::MuxOptions& options = {});

struct TrackReport {
  std::string name;
  std::string codec_id;
  std::size_t raw_bytes = 0;  // native-width samples or serialized SSA
  std::size_t encoded_bytes = 0;

  double factor() const noexcept {
    return raw_bytes == 0 ? 0.0 : static_cast<double>(encoded_bytes) / static_cast<double>(raw_bytes);
  }
};

struct PackResult {
  std::vector<std::uint8_t> container;
  std::vector<TrackReport> tracks;
};

PackResult pack(const Dataset& dataset, const PackOptions& options = {});

/// Stream configuration recovered from the container without decoding samples.
struct StreamConfig {
  std::uint64_t track = 0;
  std::string name;
  std::string codec_id;
  Rational rate_hz{1};
  int channels = 1;
  SampleFormat format;
  Rational start_time_s{0};
  StreamMeta meta;
  std::uint32_t block_size = 0;
};

struct SubtitleConfig {
  std::uint64_t track = 0;
  std::string name;
};

struct Skeleton {
  MetaMap session_meta;
  std::vector<StreamConfig> streams;
  std::vector<SubtitleConfig> tracks;
};

Skeleton skeleton(const mkv::Demuxer& demuxer);
StreamConfig stream_config(const mkv::Demuxer& demuxer, std::uint64_t track);

UniformStream decode_stream(const mkv::Demuxer& demuxer, std::uint64_t track);
SparseTrack decode_track(const mkv::Demuxer& demuxer, std::uint64_t track);

Dataset unpack(const mkv::Demuxer& demuxer);
/// Only the listed track numbers, read in one pass over the clusters.
Dataset unpack(const mkv::Demuxer& demuxer, const std::vector<std::uint64_t>& tracks);
Dataset unpack(std::vector<std::uint8_t> container);

struct StreamWindow {
  UniformStream stream;  // samples with start <= t < end
  bool used_cues = false;
};

struct TrackWindow {
  SparseTrack track;  // events overlapping [start, end]
  bool used_cues = false;
};

/// Decodes only the clusters that overlap the window.
StreamWindow decode_stream_window(const mkv::Demuxer& demuxer, std::uint64_t track, const Rational& t_start_s,
                                  const Rational& t_end_s);
TrackWindow decode_track_window(const mkv::Demuxer& demuxer, std::uint64_t track, const Rational& t_start_s,
                                const Rational& t_end_s);

}  // namespace tsc
