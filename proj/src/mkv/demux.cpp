#include <algorithm>

#include "tsc/error.hpp"
#include "tsc/mkv.hpp"

namespace tsc::mkv {
namespace {

[[noreturn]] void malformed(std::uint64_t offset, const std::string& what) {
  throw Error(Errc::malformed, what + " at byte " + std::to_string(offset), offset);
}

std::uint64_t element_end(const ElementHeader& h) { return h.data_offset + h.size; }

void parse_info(const std::vector<Element>& kids, ContainerInfo& info) {
  for (const auto& e : kids) {
    switch (e.header.id) {
      case id::TimestampScale: info.timestamp_scale = read_uint(e); break;
      case id::Duration: info.duration = read_float(e); break;
      case id::MuxingApp: info.muxing_app = read_string(e); break;
      case id::WritingApp: info.writing_app = read_string(e); break;
      default: break;
    }
  }
  if (info.timestamp_scale == 0) malformed(kids.empty() ? 0 : kids.front().header.offset, "zero TimestampScale");
}

void parse_tracks(const std::vector<Element>& kids, ContainerInfo& info) {
  for (const auto& entry : kids) {
    if (entry.header.id != id::TrackEntry) continue;
    TrackInfo t;
    for (const auto& e : children(entry.data, entry.header.data_offset)) {
      switch (e.header.id) {
        case id::TrackNumber: t.number = read_uint(e); break;
        case id::TrackUID: t.uid = read_uint(e); break;
        case id::TrackType: t.type = read_uint(e); break;
        case id::CodecID: t.codec_id = read_string(e); break;
        case id::CodecPrivate: t.codec_private.assign(e.data.begin(), e.data.end()); break;
        case id::Name: t.name = read_string(e); break;
        case id::Language: t.language = read_string(e); break;
        case id::Audio:
          for (const auto& a : children(e.data, e.header.data_offset)) {
            if (a.header.id == id::SamplingFrequency) t.sampling_frequency = read_float(a);
            else if (a.header.id == id::Channels) t.channels = read_uint(a);
            else if (a.header.id == id::BitDepth) t.bit_depth = read_uint(a);
          }
          break;
        default: break;
      }
    }
    if (t.number == 0) malformed(entry.header.offset, "TrackEntry without TrackNumber");
    info.tracks.push_back(std::move(t));
  }
}

void parse_tags(const std::vector<Element>& kids, ContainerInfo& info) {
  for (const auto& tag : kids) {
    if (tag.header.id != id::Tag) continue;
    std::vector<std::uint64_t> uids;
    MetaMap values;
    for (const auto& e : children(tag.data, tag.header.data_offset)) {
      if (e.header.id == id::Targets) {
        for (const auto& t : children(e.data, e.header.data_offset)) {
          if (t.header.id == id::TagTrackUID) uids.push_back(read_uint(t));
        }
      } else if (e.header.id == id::SimpleTag) {
        std::string name, value;
        for (const auto& s : children(e.data, e.header.data_offset)) {
          if (s.header.id == id::TagName) name = read_string(s);
          else if (s.header.id == id::TagString) value = read_string(s);
        }
        values[name] = value;
      }
    }
    uids.erase(std::remove(uids.begin(), uids.end(), 0), uids.end());
    if (uids.empty()) {
      info.session_tags.insert(values.begin(), values.end());
      continue;
    }
    for (auto& t : info.tracks) {
      if (std::find(uids.begin(), uids.end(), t.uid) != uids.end()) t.tags.insert(values.begin(), values.end());
    }
  }
}

void parse_cues(const std::vector<Element>& kids, ContainerInfo& info) {
  for (const auto& point : kids) {
    if (point.header.id != id::CuePoint) continue;
    std::int64_t time = -1;
    std::vector<CueEntry> entries;
    for (const auto& e : children(point.data, point.header.data_offset)) {
      if (e.header.id == id::CueTime) {
        time = static_cast<std::int64_t>(read_uint(e));
      } else if (e.header.id == id::CueTrackPositions) {
        CueEntry c;
        for (const auto& p : children(e.data, e.header.data_offset)) {
          if (p.header.id == id::CueTrack) c.track = read_uint(p);
          else if (p.header.id == id::CueClusterPosition) c.cluster_offset = info.segment_data_offset + read_uint(p);
          else if (p.header.id == id::CueRelativePosition) c.relative_position = read_uint(p);
        }
        entries.push_back(c);
      }
    }
    if (time < 0) malformed(point.header.offset, "CuePoint without CueTime");
    for (auto& c : entries) {
      c.time = time;
      info.cues.push_back(c);
    }
  }
  std::stable_sort(info.cues.begin(), info.cues.end(),
                   [](const CueEntry& a, const CueEntry& b) { return a.time < b.time; });
  info.has_cues = true;
}

// Block or SimpleBlock payload.
Frame parse_block(std::span<const std::uint8_t> data, std::uint64_t offset, std::int64_t cluster_time, bool simple) {
  const Vint track = vint_read(data, offset);
  const auto head = static_cast<std::size_t>(track.width);
  if (data.size() < head + 3) throw Error(Errc::truncated, "block header truncated at byte " + std::to_string(offset), offset);
  const auto rel = static_cast<std::int16_t>((data[head] << 8) | data[head + 1]);
  const std::uint8_t flags = data[head + 2];
  if ((flags & 0x06) != 0) {
    throw Error(Errc::unsupported, "laced block at byte " + std::to_string(offset) + " is not supported", offset);
  }
  Frame f;
  f.track = track.value;
  f.time = cluster_time + rel;
  f.keyframe = simple ? (flags & 0x80) != 0 : true;
  f.data.assign(data.begin() + static_cast<std::ptrdiff_t>(head + 3), data.end());
  return f;
}

}  // namespace

Demuxer::Demuxer(std::shared_ptr<ByteSource> source) : src_(std::move(source)), info_(std::make_shared<ContainerInfo>()) {
  auto& src = *src_;
  ContainerInfo& info = *info_;
  const ElementHeader ebml = read_header(src, 0);
  if (ebml.id != id::EBML) throw Error(Errc::bad_magic, "not an EBML file", 0);
  if (ebml.unknown_size() || ebml.size > 4096) malformed(0, "implausible EBML header size");
  const auto ebml_bytes = src.read(ebml.data_offset, static_cast<std::size_t>(ebml.size));
  for (const auto& e : children(ebml_bytes, ebml.data_offset)) {
    if (e.header.id == id::DocType) info.doc_type = read_string(e);
    else if (e.header.id == id::DocTypeVersion) info.doc_type_version = read_uint(e);
  }
  if (info.doc_type != "matroska" && info.doc_type != "webm") {
    throw Error(Errc::bad_magic, "DocType '" + info.doc_type + "' is not matroska or webm", ebml.data_offset);
  }

  const ElementHeader seg = read_header(src, element_end(ebml));
  if (seg.id != id::Segment) malformed(seg.offset, "expected Segment");
  info.segment_data_offset = seg.data_offset;
  if (seg.unknown_size()) {
    info.segment_end = src.size();
  } else {
    info.segment_end = element_end(seg);
    if (info.segment_end > src.size()) {
      throw Error(Errc::truncated,
                  "Segment at byte " + std::to_string(seg.offset) + " declares " + std::to_string(seg.size) +
                      " bytes but the file ends at byte " + std::to_string(src.size()),
                  src.size());
    }
  }

  std::vector<std::pair<std::uint32_t, std::uint64_t>> seeks;
  bool loaded_info = false, loaded_tracks = false, loaded_tags = false;
  std::uint64_t pos = info.segment_data_offset;
  while (pos < info.segment_end) {
    const ElementHeader h = read_header(src, pos);
    if (h.unknown_size()) {
      throw Error(Errc::unknown_size, "unknown-size element inside Segment at byte " + std::to_string(h.offset), h.offset);
    }
    if (element_end(h) > info.segment_end) {
      throw Error(Errc::truncated, "element at byte " + std::to_string(h.offset) + " overruns the Segment", h.offset);
    }
    switch (h.id) {
      case id::SeekHead: {
        const auto bytes = src.read(h.data_offset, static_cast<std::size_t>(h.size));
        for (const auto& s : children(bytes, h.data_offset)) {
          if (s.header.id != id::Seek) continue;
          std::uint32_t target = 0;
          std::uint64_t at = 0;
          for (const auto& e : children(s.data, s.header.data_offset)) {
            if (e.header.id == id::SeekID) target = static_cast<std::uint32_t>(read_uint(e));
            else if (e.header.id == id::SeekPosition) at = read_uint(e);
          }
          seeks.emplace_back(target, info.segment_data_offset + at);
        }
        break;
      }
      case id::Info: load(h.id, h); loaded_info = true; break;
      case id::Tracks: load(h.id, h); loaded_tracks = true; break;
      case id::Tags: load(h.id, h); loaded_tags = true; break;
      case id::Cues: load(h.id, h); break;
      case id::Cluster:
        if (!info.first_cluster) info.first_cluster = h.offset;
        break;
      default: ++info.skipped_elements; break;
    }
    pos = element_end(h);
    if (h.id == id::Cluster && !seeks.empty()) {
      // Jump to whatever the SeekHead indexes past the clusters.
      for (const auto& [target, at] : seeks) {
        const bool wanted = (target == id::Info && !loaded_info) || (target == id::Tracks && !loaded_tracks) ||
                            (target == id::Tags && !loaded_tags) || (target == id::Cues && !info.has_cues);
        if (!wanted) continue;
        // A stale entry (element removed or rewritten) is ignored; missing
        // Cues then mean a linear scan.
        if (at >= info.segment_end) {
          ++info.skipped_elements;
          continue;
        }
        const ElementHeader th = read_header(src, at);
        if (th.id != target || th.unknown_size() || element_end(th) > info.segment_end) {
          ++info.skipped_elements;
          continue;
        }
        load(target, th);
        if (target == id::Info) loaded_info = true;
        if (target == id::Tracks) loaded_tracks = true;
        if (target == id::Tags) loaded_tags = true;
      }
      break;
    }
  }
  std::sort(info.tracks.begin(), info.tracks.end(),
            [](const TrackInfo& a, const TrackInfo& b) { return a.number < b.number; });
}

void Demuxer::load(std::uint32_t element, const ElementHeader& h) {
  const auto bytes = src_->read(h.data_offset, static_cast<std::size_t>(h.size));
  const auto kids = children(bytes, h.data_offset);
  ContainerInfo& info = *info_;
  switch (element) {
    case id::Info: parse_info(kids, info); break;
    case id::Tracks: parse_tracks(kids, info); break;
    case id::Tags: parse_tags(kids, info); break;
    case id::Cues: parse_cues(kids, info); break;
    default: break;
  }
}

Demuxer Demuxer::from_bytes(std::vector<std::uint8_t> bytes) {
  return Demuxer(std::make_shared<MemorySource>(std::move(bytes)));
}

Demuxer Demuxer::from_file(const std::string& path) { return Demuxer(std::make_shared<FileSource>(path)); }

const TrackInfo* Demuxer::track(std::uint64_t number) const noexcept {
  for (const auto& t : info_->tracks) {
    if (t.number == number) return &t;
  }
  return nullptr;
}

const TrackInfo* Demuxer::find_track(std::string_view name) const noexcept {
  for (const auto& t : info_->tracks) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

Rational Demuxer::ticks_to_seconds(std::int64_t ticks) const {
  return Rational(ticks) * Rational(static_cast<std::int64_t>(info_->timestamp_scale), 1'000'000'000);
}

FrameReader Demuxer::frames(std::vector<std::uint64_t> tracks, std::uint64_t offset) const {
  if (offset == 0) offset = info_->first_cluster.value_or(info_->segment_end);
  return FrameReader(src_, info_.get(), std::move(tracks), offset);
}

std::vector<Frame> Demuxer::read_all(std::uint64_t track) const {
  std::vector<Frame> out;
  FrameReader reader = frames({track});
  Frame f;
  while (reader.next(f)) out.push_back(std::move(f));
  return out;
}

FrameReader::FrameReader(std::shared_ptr<ByteSource> src, const ContainerInfo* info, std::vector<std::uint64_t> tracks,
                         std::uint64_t offset)
    : src_(std::move(src)), info_(info), tracks_(std::move(tracks)), pos_(offset) {}

std::optional<ClusterFrames> FrameReader::next_cluster() {
  while (pos_ < info_->segment_end) {
    const ElementHeader h = read_header(*src_, pos_);
    if (h.unknown_size()) {
      throw Error(Errc::unknown_size, "unknown-size element at byte " + std::to_string(h.offset), h.offset);
    }
    if (element_end(h) > info_->segment_end) {
      throw Error(Errc::truncated, "element at byte " + std::to_string(h.offset) + " overruns the Segment", h.offset);
    }
    pos_ = element_end(h);
    if (h.id != id::Cluster) continue;

    const auto bytes = src_->read(h.data_offset, static_cast<std::size_t>(h.size));
    ClusterFrames cluster;
    cluster.offset = h.offset;
    bool have_time = false;
    auto wanted = [&](std::uint64_t track) {
      return tracks_.empty() || std::find(tracks_.begin(), tracks_.end(), track) != tracks_.end();
    };
    for (const auto& e : children(bytes, h.data_offset)) {
      if (e.header.id == id::Timestamp) {
        cluster.time = static_cast<std::int64_t>(read_uint(e));
        have_time = true;
      } else if (e.header.id == id::SimpleBlock || e.header.id == id::BlockGroup) {
        if (!have_time) malformed(e.header.offset, "block before the Cluster Timestamp");
        Frame f;
        if (e.header.id == id::SimpleBlock) {
          f = parse_block(e.data, e.header.data_offset, cluster.time, true);
        } else {
          bool have_block = false;
          for (const auto& g : children(e.data, e.header.data_offset)) {
            if (g.header.id == id::Block) {
              const auto duration = f.duration;
              f = parse_block(g.data, g.header.data_offset, cluster.time, false);
              f.duration = duration;
              have_block = true;
            } else if (g.header.id == id::BlockDuration) {
              f.duration = static_cast<std::int64_t>(read_uint(g));
            }
          }
          if (!have_block) malformed(e.header.offset, "BlockGroup without Block");
        }
        if (!wanted(f.track)) continue;
        f.cluster_offset = h.offset;
        cluster.frames.push_back(std::move(f));
      }
    }
    return cluster;
  }
  return std::nullopt;
}

bool FrameReader::next(Frame& out) {
  while (pending_pos_ >= pending_.size()) {
    auto cluster = next_cluster();
    if (!cluster) return false;
    pending_ = std::move(cluster->frames);
    pending_pos_ = 0;
  }
  out = std::move(pending_[pending_pos_++]);
  return true;
}

SeekResult seek_window(const Demuxer& demuxer, std::uint64_t track, const Rational& t_start_s, const Rational& t_end_s) {
  const auto& info = demuxer.info();
  const Rational per_tick = demuxer.ticks_to_seconds(1);
  // One tick of slack: block times are rounded to the tick.
  const std::int64_t t0 = (t_start_s / per_tick).floor() - 1;
  const std::int64_t t1 = (t_end_s / per_tick).floor();

  SeekResult result;
  std::uint64_t start = 0;
  if (info.has_cues) {
    result.used_cues = true;
    for (const auto& c : info.cues) {
      if (c.track != track) continue;
      if (c.time <= t0 || start == 0) start = c.cluster_offset;
      if (c.time > t0) break;
    }
  }
  if (t1 < t0) return result;
  FrameReader reader = demuxer.frames({track}, start);
  while (auto cluster = reader.next_cluster()) {
    if (cluster->time > t1) break;
    // Linear scan: restart at each cluster a cue would have pointed to.
    if (!info.has_cues && !cluster->frames.empty() && cluster->frames.front().time <= t0) result.frames.clear();
    for (auto& f : cluster->frames) {
      if (f.time <= t1) result.frames.push_back(std::move(f));
    }
  }
  return result;
}

}  // namespace tsc::mkv
