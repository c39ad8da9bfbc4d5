#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsc/ebml.hpp"
#include "tsc/encoded_track.hpp"
#include "tsc/model.hpp"

namespace tsc::mkv {

inline constexpr std::uint64_t kTimestampScale = 1'000'000;  // ns per tick
inline constexpr const char* kMuxingApp = "libtsc 0.1.0";
/// Version stamp of the tag naming scheme (UNITS, SI_FACTOR, RANGE_*, RATE, ...).
inline constexpr const char* kWritingApp = "tsc 0.1.0 (tags v1)";

enum class TrackType : std::uint8_t { audio = 2, subtitle = 17 };

struct TrackPlan {
  std::uint64_t number = 0;  // 1-based, dense
  std::uint64_t uid = 0;     // defaults to number
  TrackType type = TrackType::audio;
  std::string name;
  std::string language = "und";
  EncodedTrack encoded;
  // audio only
  Rational rate_hz{1};
  Rational start_time_s{0};
  int channels = 0;
  int bit_depth = 0;
  MetaMap tags;
};

struct MuxOptions {
  Rational cluster_duration_s{5};
  /// Adds CRC-32 children to Info, Tracks, Tags, Cues and every Cluster.
  bool crc32 = false;
};

/// Two-pass writer: EBML header, then a sized Segment holding SeekHead, Info,
/// Tracks, Tags, Clusters and Cues.
std::vector<std::uint8_t> mux(const MetaMap& session_tags, const std::vector<TrackPlan>& tracks,
                              const MuxOptions& options = {});

struct TrackInfo {
  std::uint64_t number = 0;
  std::uint64_t uid = 0;
  std::uint64_t type = 0;
  std::string codec_id;
  std::vector<std::uint8_t> codec_private;
  std::string name;
  std::string language = "eng";
  double sampling_frequency = 0;
  std::uint64_t channels = 1;
  std::uint64_t bit_depth = 0;
  MetaMap tags;
};

struct CueEntry {
  std::int64_t time = 0;  // ticks
  std::uint64_t track = 0;
  std::uint64_t cluster_offset = 0;  // absolute file offset of the Cluster
  std::uint64_t relative_position = 0;
};

struct Frame {
  std::uint64_t track = 0;
  std::int64_t time = 0;  // absolute ticks
  std::optional<std::int64_t> duration;  // ticks, BlockGroup only
  bool keyframe = false;
  std::vector<std::uint8_t> data;
  std::uint64_t cluster_offset = 0;
};

struct ContainerInfo {
  std::string doc_type;
  std::uint64_t doc_type_version = 0;
  std::uint64_t timestamp_scale = kTimestampScale;
  double duration = 0;  // ticks
  std::string muxing_app;
  std::string writing_app;
  MetaMap session_tags;
  std::vector<TrackInfo> tracks;
  std::vector<CueEntry> cues;
  bool has_cues = false;
  std::uint64_t segment_data_offset = 0;
  std::uint64_t segment_end = 0;
  std::optional<std::uint64_t> first_cluster;
  std::size_t skipped_elements = 0;  // unknown or ignored top-level elements
};

struct ClusterFrames {
  std::uint64_t offset = 0;
  std::int64_t time = 0;
  std::vector<Frame> frames;
};

class Demuxer;

/// Sequential cluster reader. Each reader keeps its own position; several
/// readers may share a Demuxer across threads.
class FrameReader {
 public:
  /// Next frame of a selected track, false at the end of the segment.
  bool next(Frame& out);
  std::optional<ClusterFrames> next_cluster();

 private:
  friend class Demuxer;
  FrameReader(std::shared_ptr<ByteSource> src, const ContainerInfo* info, std::vector<std::uint64_t> tracks,
              std::uint64_t offset);

  std::shared_ptr<ByteSource> src_;
  const ContainerInfo* info_;
  std::vector<std::uint64_t> tracks_;  // empty: all
  std::uint64_t pos_;
  std::vector<Frame> pending_;
  std::size_t pending_pos_ = 0;
};

/// Reads header, metadata and cue table on construction; frames are read lazily.
class Demuxer {
 public:
  explicit Demuxer(std::shared_ptr<ByteSource> source);
  static Demuxer from_bytes(std::vector<std::uint8_t> bytes);
  static Demuxer from_file(const std::string& path);

  const ContainerInfo& info() const noexcept { return *info_; }
  const TrackInfo* track(std::uint64_t number) const noexcept;
  const TrackInfo* find_track(std::string_view name) const noexcept;
  ByteSource& source() const noexcept { return *src_; }

  /// Tracks to include (empty: all), starting at cluster `offset` (0: first cluster).
  FrameReader frames(std::vector<std::uint64_t> tracks = {}, std::uint64_t offset = 0) const;
  std::vector<Frame> read_all(std::uint64_t track) const;

  Rational ticks_to_seconds(std::int64_t ticks) const;

 private:
  void load(std::uint32_t id, const ElementHeader& h);

  std::shared_ptr<ByteSource> src_;
  std::shared_ptr<ContainerInfo> info_;
};

struct SeekResult {
  std::vector<Frame> frames;
  bool used_cues = false;  // false: Cues missing, fell back to a linear scan
};

/// Frames of `track` from the cue point at or before t_start_s up to t_end_s.
/// Reads the cue table (already loaded) plus the clusters overlapping the window.
SeekResult seek_window(const Demuxer& demuxer, std::uint64_t track, const Rational& t_start_s,
                       const Rational& t_end_s);

}  // namespace tsc::mkv
