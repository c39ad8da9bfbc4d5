#include <algorithm>
#include <map>

#include "tsc/error.hpp"
#include "tsc/mkv.hpp"

namespace tsc::mkv {
namespace {

using Bytes = std::vector<std::uint8_t>;

struct Placed {
  std::int64_t tick;
  std::size_t track;  // index into plans
  std::size_t frame;
};

std::int64_t to_ticks(const Rational& seconds) {
  return (seconds * Rational(1'000'000'000) / Rational(static_cast<std::int64_t>(kTimestampScale))).round();
}

Bytes ebml_header() {
  Bytes kids;
  put_uint(kids, id::EBMLVersion, 1);
  put_uint(kids, id::EBMLReadVersion, 1);
  put_uint(kids, id::EBMLMaxIDLength, 4);
  put_uint(kids, id::EBMLMaxSizeLength, 8);
  put_string(kids, id::DocType, "matroska");
  put_uint(kids, id::DocTypeVersion, 4);
  put_uint(kids, id::DocTypeReadVersion, 2);
  Bytes out;
  put_master(out, id::EBML, kids);
  return out;
}

Bytes track_entry(const TrackPlan& t) {
  Bytes kids;
  put_uint(kids, id::TrackNumber, t.number);
  put_uint(kids, id::TrackUID, t.uid != 0 ? t.uid : t.number);
  put_uint(kids, id::TrackType, static_cast<std::uint64_t>(t.type));
  put_uint(kids, id::FlagLacing, 0);
  if (!t.name.empty()) put_string(kids, id::Name, t.name);
  put_string(kids, id::Language, t.language);
  put_string(kids, id::CodecID, t.encoded.codec_id);
  if (!t.encoded.codec_private.empty()) put_binary(kids, id::CodecPrivate, t.encoded.codec_private);
  if (t.type == TrackType::audio) {
    Bytes audio;
    put_float(audio, id::SamplingFrequency, t.rate_hz.to_double());
    put_uint(audio, id::Channels, static_cast<std::uint64_t>(t.channels));
    if (t.bit_depth > 0) put_uint(audio, id::BitDepth, static_cast<std::uint64_t>(t.bit_depth));
    put_master(kids, id::Audio, audio);
  }
  Bytes out;
  put_master(out, id::TrackEntry, kids);
  return out;
}

void put_tag(Bytes& out, std::optional<std::uint64_t> track_uid, const MetaMap& tags) {
  Bytes targets;
  put_uint(targets, id::TargetTypeValue, 50);
  if (track_uid) put_uint(targets, id::TagTrackUID, *track_uid);
  Bytes kids;
  put_master(kids, id::Targets, targets);
  for (const auto& [k, v] : tags) {
    Bytes simple;
    put_string(simple, id::TagName, k);
    put_string(simple, id::TagString, v);
    put_master(kids, id::SimpleTag, simple);
  }
  put_master(out, id::Tag, kids);
}

Bytes seek_head(const std::vector<std::pair<std::uint32_t, std::uint64_t>>& entries) {
  Bytes kids;
  for (const auto& [target, pos] : entries) {
    Bytes seek;
    Bytes idbytes;
    put_id(idbytes, target);
    put_binary(seek, id::SeekID, idbytes);
    put_uint(seek, id::SeekPosition, pos, 8);
    put_master(kids, id::Seek, seek);
  }
  Bytes out;
  put_master(out, id::SeekHead, kids);
  return out;
}

}  // namespace

std::vector<std::uint8_t> mux(const MetaMap& session_tags, const std::vector<TrackPlan>& tracks,
                              const MuxOptions& options) {
  const std::int64_t cluster_ticks = to_ticks(options.cluster_duration_s);
  if (cluster_ticks <= 0 || cluster_ticks > 32767) {
    throw Error(Errc::invalid_argument, "cluster duration must fit the 16-bit relative block timestamp");
  }
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (tracks[i].number != i + 1) throw Error(Errc::invalid_argument, "track numbers must be dense from 1");
    if (tracks[i].type == TrackType::audio && tracks[i].rate_hz <= Rational(0)) {
      throw Error(Errc::invalid_argument, "audio track '" + tracks[i].name + "' needs a positive rate");
    }
  }

  // Block times on the session clock.
  std::vector<Placed> placed;
  double duration = 0;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    const auto& plan = tracks[t];
    for (std::size_t f = 0; f < plan.encoded.frames.size(); ++f) {
      const auto& frame = plan.encoded.frames[f];
      Rational start, end;
      if (plan.type == TrackType::audio) {
        start = plan.start_time_s + Rational(static_cast<std::int64_t>(frame.first_sample)) / plan.rate_hz;
        end = start + Rational(static_cast<std::int64_t>(frame.sample_count)) / plan.rate_hz;
      } else {
        if (!frame.time_s) throw Error(Errc::invalid_argument, "subtitle frame without a time");
        start = *frame.time_s;
        end = start + frame.duration_s.value_or(Rational(0));
      }
      placed.push_back({to_ticks(start), t, f});
      duration = std::max(duration, static_cast<double>(to_ticks(end)));
    }
  }
  std::stable_sort(placed.begin(), placed.end(), [](const Placed& a, const Placed& b) {
    return a.tick != b.tick ? a.tick < b.tick : a.track < b.track;
  });

  // Metadata elements.
  Bytes info_kids;
  put_uint(info_kids, id::TimestampScale, kTimestampScale);
  put_string(info_kids, id::MuxingApp, kMuxingApp);
  put_string(info_kids, id::WritingApp, kWritingApp);
  put_float(info_kids, id::Duration, duration);
  Bytes info;
  put_master(info, id::Info, info_kids, options.crc32);

  Bytes track_kids;
  for (const auto& t : tracks) {
    const Bytes e = track_entry(t);
    track_kids.insert(track_kids.end(), e.begin(), e.end());
  }
  Bytes tracks_el;
  put_master(tracks_el, id::Tracks, track_kids, options.crc32);

  Bytes tag_kids;
  if (!session_tags.empty()) put_tag(tag_kids, std::nullopt, session_tags);
  for (const auto& t : tracks) {
    if (!t.tags.empty()) put_tag(tag_kids, t.uid != 0 ? t.uid : t.number, t.tags);
  }
  Bytes tags_el;
  if (!tag_kids.empty()) put_master(tags_el, id::Tags, tag_kids, options.crc32);

  // SeekHead size does not depend on the positions (8-byte SeekPosition).
  std::vector<std::pair<std::uint32_t, std::uint64_t>> seeks{{id::Info, 0}, {id::Tracks, 0}};
  if (!tags_el.empty()) seeks.emplace_back(id::Tags, 0);
  const bool have_cues = !placed.empty();
  if (have_cues) seeks.emplace_back(id::Cues, 0);
  const std::size_t seek_size = seek_head(seeks).size();

  const std::uint64_t info_pos = seek_size;
  const std::uint64_t tracks_pos = info_pos + info.size();
  const std::uint64_t tags_pos = tracks_pos + tracks_el.size();
  std::uint64_t pos = tags_pos + tags_el.size();

  // Clusters, recording the first block of each track per cluster.
  Bytes clusters;
  std::map<std::int64_t, Bytes> cue_points;  // CueTime -> CueTrackPositions
  for (std::size_t i = 0; i < placed.size();) {
    const std::int64_t cluster_tick = placed[i].tick;
    Bytes kids;
    put_uint(kids, id::Timestamp, static_cast<std::uint64_t>(cluster_tick));
    std::vector<bool> seen(tracks.size(), false);
    struct First {
      std::size_t track;
      std::size_t offset;  // within the cluster payload
      std::int64_t tick;
    };
    std::vector<First> firsts;
    for (; i < placed.size() && placed[i].tick - cluster_tick < cluster_ticks; ++i) {
      const auto& p = placed[i];
      const auto& plan = tracks[p.track];
      const auto& frame = plan.encoded.frames[p.frame];
      if (!seen[p.track]) {
        seen[p.track] = true;
        firsts.push_back({p.track, kids.size(), p.tick});
      }
      Bytes block;
      vint_append(block, plan.number);
      const auto rel = static_cast<std::int16_t>(p.tick - cluster_tick);
      block.push_back(static_cast<std::uint8_t>(static_cast<std::uint16_t>(rel) >> 8));
      block.push_back(static_cast<std::uint8_t>(static_cast<std::uint16_t>(rel) & 0xFF));
      if (plan.type == TrackType::subtitle) {
        block.push_back(0x00);
        block.insert(block.end(), frame.data.begin(), frame.data.end());
        Bytes group;
        put_binary(group, id::Block, block);
        put_uint(group, id::BlockDuration, static_cast<std::uint64_t>(to_ticks(frame.duration_s.value_or(Rational(0)))));
        put_master(kids, id::BlockGroup, group);
      } else {
        block.push_back(0x80);  // keyframe, no lacing
        block.insert(block.end(), frame.data.begin(), frame.data.end());
        put_binary(kids, id::SimpleBlock, block);
      }
    }
    const std::uint64_t crc_shift = options.crc32 ? 6 : 0;
    for (const auto& first : firsts) {
      Bytes ctp;
      put_uint(ctp, id::CueTrack, tracks[first.track].number);
      put_uint(ctp, id::CueClusterPosition, pos);
      put_uint(ctp, id::CueRelativePosition, first.offset + crc_shift);
      put_master(cue_points[first.tick], id::CueTrackPositions, ctp);
    }
    const std::size_t before = clusters.size();
    put_master(clusters, id::Cluster, kids, options.crc32);
    pos += clusters.size() - before;
  }

  Bytes cues_el;
  if (have_cues) {
    Bytes cue_kids;
    for (const auto& [tick, positions] : cue_points) {
      Bytes cp;
      put_uint(cp, id::CueTime, static_cast<std::uint64_t>(tick));
      cp.insert(cp.end(), positions.begin(), positions.end());
      put_master(cue_kids, id::CuePoint, cp);
    }
    put_master(cues_el, id::Cues, cue_kids, options.crc32);
  }
  const std::uint64_t cues_pos = pos;

  for (auto& [target, p] : seeks) {
    if (target == id::Info) p = info_pos;
    else if (target == id::Tracks) p = tracks_pos;
    else if (target == id::Tags) p = tags_pos;
    else if (target == id::Cues) p = cues_pos;
  }
  const Bytes seek = seek_head(seeks);

  Bytes out = ebml_header();
  const std::uint64_t segment_size = seek.size() + info.size() + tracks_el.size() + tags_el.size() + clusters.size() +
                                     cues_el.size();
  put_id(out, id::Segment);
  vint_append(out, segment_size, 8);
  out.reserve(out.size() + segment_size);
  for (const Bytes* part : std::initializer_list<const Bytes*>{&seek, &info, &tracks_el, &tags_el, &clusters, &cues_el}) {
    out.insert(out.end(), part->begin(), part->end());
  }
  return out;
}

}  // namespace tsc::mkv
