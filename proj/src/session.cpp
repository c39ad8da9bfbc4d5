#include "tsc/session.hpp"

#include <algorithm>
#include <map>

#include "tsc/error.hpp"
#include "tsc/flac.hpp"
#include "tsc/float_lossless.hpp"
#include "tsc/pcm.hpp"
#include "tsc/ssa.hpp"

namespace tsc {
namespace {

std::size_t bytes_per_sample(SampleFormat f) { return static_cast<std::size_t>(f.bits_per_sample() / 8); }

std::optional<std::string> find_tag(const MetaMap& tags, const char* key) {
  const auto it = tags.find(key);
  if (it == tags.end()) return std::nullopt;
  return it->second;
}

std::optional<Rational> rational_tag(const MetaMap& tags, const char* key) {
  const auto v = find_tag(tags, key);
  if (!v) return std::nullopt;
  try {
    return Rational::parse(*v);
  } catch (const Error&) {
    throw Error(Errc::malformed, std::string("tag ") + key + " holds '" + *v + "', not a number");
  }
}

const mkv::TrackInfo& require_track(const mkv::Demuxer& demuxer, std::uint64_t track) {
  const auto* info = demuxer.track(track);
  if (info == nullptr) throw Error(Errc::invalid_argument, "no track number " + std::to_string(track));
  return *info;
}

EncodedTrack collect(const mkv::TrackInfo& info, std::vector<mkv::Frame> frames) {
  EncodedTrack t;
  t.codec_id = info.codec_id;
  t.codec_private = info.codec_private;
  t.frames.reserve(frames.size());
  for (auto& f : frames) t.frames.push_back(EncodedFrame{std::move(f.data), 0, 0, std::nullopt, std::nullopt});
  return t;
}

SampleBuffer to_buffer(SampleFormat format, std::vector<std::int32_t> values) {
  if (format.is_integer()) return values;
  return codec::bits_to_float(values);
}

// Decodes one block on its own. Returns the per-channel index of its first sample.
std::uint64_t decode_block(const mkv::Demuxer& demuxer, const mkv::TrackInfo& info, const StreamConfig& cfg,
                           const mkv::Frame& frame, std::vector<std::int32_t>& out) {
  if (info.codec_id == kCodecFlac) {
    const auto header = codec::read_flac_header(info.codec_private);
    std::size_t consumed = 0;
    return codec::decode_flac_frame(header, frame.data, out, consumed).first_sample;
  }
  if (info.codec_id == kCodecRice32) {
    return codec::decode_rice32_frame(codec::read_rice32_header(info.codec_private), frame.data, out).first_sample;
  }
  if (info.codec_id == kCodecPcmFloat || info.codec_id == codec::kCodecPcmInt) {
    codec::pcm_decode_frame(cfg.format, frame.data, out);
    // PCM frames carry no sample index; recover it from the block time.
    const Rational offset = (demuxer.ticks_to_seconds(frame.time) - cfg.start_time_s) * cfg.rate_hz;
    const std::int64_t block = cfg.block_size == 0 ? 1 : cfg.block_size;
    const std::int64_t index = (offset / Rational(block)).round() * block;
    return static_cast<std::uint64_t>(std::max<std::int64_t>(index, 0));
  }
  throw Error(Errc::unsupported, "track " + std::to_string(info.number) + " uses unsupported codec " + info.codec_id);
}

}  // namespace

CodecChoice parse_codec_choice(std::string_view text) {
  if (text == "auto" || text == "automatic") return CodecChoice::automatic;
  if (text == "flac") return CodecChoice::flac;
  if (text == "rice32" || text == "ts_rice32") return CodecChoice::rice32;
  if (text == "pcm") return CodecChoice::pcm;
  throw Error(Errc::invalid_argument, "unknown codec '" + std::string(text) + "' (auto, flac, rice32, pcm)");
}

std::string_view codec_choice_name(CodecChoice choice) noexcept {
  switch (choice) {
    case CodecChoice::automatic: return "auto";
    case CodecChoice::flac: return "flac";
    case CodecChoice::rice32: return "rice32";
    case CodecChoice::pcm: return "pcm";
  }
  return "?";
}

std::uint32_t plan_block_size(const UniformStream& stream) {
  const std::int64_t per_second = stream.rate_hz().round();
  return static_cast<std::uint32_t>(std::clamp<std::int64_t>(per_second, 16, 4096));
}

EncodedTrack encode_stream(const UniformStream& stream, CodecChoice codec, std::optional<std::uint32_t> block_size) {
  const std::uint32_t block = block_size.value_or(plan_block_size(stream));
  const SampleKind kind = stream.format().kind();
  const bool narrow_int = kind == SampleKind::int8 || kind == SampleKind::int16 || kind == SampleKind::int24;
  if (codec == CodecChoice::automatic) codec = narrow_int ? CodecChoice::flac : CodecChoice::rice32;
  switch (codec) {
    case CodecChoice::flac:
      if (!narrow_int) {
        throw Error(Errc::invalid_argument,
                    "stream '" + stream.name() + "' is " + stream.format().name() + "; FLAC takes int8, int16 or int24");
      }
      return codec::flac_encode(stream, block);
    case CodecChoice::rice32:
      if (narrow_int) {
        throw Error(Errc::invalid_argument,
                    "stream '" + stream.name() + "' is " + stream.format().name() + "; RICE32 takes int32 or float32");
      }
      return codec::float_lossless_encode(stream, block);
    case CodecChoice::pcm:
      return codec::pcm_encode(stream, block);
    case CodecChoice::automatic: break;
  }
  throw Error(Errc::invalid_argument, "no codec selected");
}

EncodedTrack encode_track(const SparseTrack& track) {
  const ssa::Document doc = ssa::to_document(track);
  EncodedTrack out;
  out.codec_id = kCodecAss;
  const std::string header = ssa::codec_private(doc);
  out.codec_private.assign(header.begin(), header.end());
  const auto& events = track.events();
  out.frames.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    const std::string text = ssa::block_text(doc.events[i], i);
    EncodedFrame f;
    f.data.assign(text.begin(), text.end());
    f.time_s = events[i].time_s;
    f.duration_s = events[i].duration_s;
    out.frames.push_back(std::move(f));
  }
  return out;
}

MetaMap stream_tags(const UniformStream& stream, std::uint32_t block_size) {
  MetaMap tags;
  const StreamMeta& m = stream.meta();
  if (!m.units.empty()) tags[tag::units] = m.units;
  if (m.si_conversion_factor) tags[tag::si_factor] = m.si_conversion_factor->to_string();
  if (m.range_min) tags[tag::range_min] = m.range_min->to_string();
  if (m.range_max) tags[tag::range_max] = m.range_max->to_string();
  tags[tag::rate] = stream.rate_hz().to_string();
  tags[tag::start_time] = stream.start_time_s().to_string();
  tags[tag::sample_format] = stream.format().name();
  tags[tag::block_size] = std::to_string(block_size);
  for (const auto& [k, v] : m.extra) tags[std::string(tag::extra_prefix) + k] = v;
  return tags;
}

std::vector<std::uint8_t> mux_dataset(const Dataset& dataset, const std::vector<EncodedTrack>& encoded,
                                      const mkv::MuxOptions& options) {
  const auto& streams = dataset.streams();
  const auto& tracks = dataset.tracks();
  if (encoded.size() != streams.size() + tracks.size()) {
    throw Error(Errc::invalid_argument, "dataset has " + std::to_string(streams.size() + tracks.size()) +
                                            " streams and tracks but " + std::to_string(encoded.size()) +
                                            " encoded tracks were given");
  }
  std::vector<mkv::TrackPlan> plans;
  plans.reserve(encoded.size());
  for (std::size_t i = 0; i < streams.size(); ++i) {
    const UniformStream& s = streams[i];
    const EncodedTrack& e = encoded[i];
    if (e.codec_id == kCodecAss) {
      throw Error(Errc::invalid_argument, "stream '" + s.name() + "' was given a subtitle encoding");
    }
    mkv::TrackPlan p;
    p.number = plans.size() + 1;
    p.type = mkv::TrackType::audio;
    p.name = s.name();
    p.encoded = e;
    p.rate_hz = s.rate_hz();
    p.start_time_s = s.start_time_s();
    p.channels = s.channels();
    p.bit_depth = s.format().bits_per_sample();
    const std::uint32_t block = e.frames.empty() ? 0 : std::max_element(e.frames.begin(), e.frames.end(), [](const auto& a, const auto& b) {
                                                      return a.sample_count < b.sample_count;
                                                    })->sample_count;
    p.tags = stream_tags(s, block);
    plans.push_back(std::move(p));
  }
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const EncodedTrack& e = encoded[streams.size() + i];
    if (e.codec_id != kCodecAss) {
      throw Error(Errc::invalid_argument, "annotation track '" + tracks[i].name() + "' needs an " +
                                              std::string(kCodecAss) + " encoding, got " + e.codec_id);
    }
    mkv::TrackPlan p;
    p.number = plans.size() + 1;
    p.type = mkv::TrackType::subtitle;
    p.name = tracks[i].name();
    p.encoded = e;
    plans.push_back(std::move(p));
  }
  return mkv::mux(dataset.session_meta(), plans, options);
}

PackResult pack(const Dataset& dataset, const PackOptions& options) {
  PackResult result;
  std::vector<EncodedTrack> encoded;
  for (const auto& s : dataset.streams()) {
    encoded.push_back(encode_stream(s, options.codec, options.block_size));
    result.tracks.push_back(TrackReport{s.name(), encoded.back().codec_id,
                                        s.sample_count() * bytes_per_sample(s.format()), encoded.back().total_bytes()});
  }
  for (const auto& t : dataset.tracks()) {
    encoded.push_back(encode_track(t));
    result.tracks.push_back(TrackReport{t.name(), kCodecAss, ssa::serialize(t).size(), encoded.back().total_bytes()});
  }
  result.container = mux_dataset(dataset, encoded, options.mux);
  return result;
}

StreamConfig stream_config(const mkv::Demuxer& demuxer, std::uint64_t track) {
  const mkv::TrackInfo& info = require_track(demuxer, track);
  if (info.type != static_cast<std::uint64_t>(mkv::TrackType::audio)) {
    throw Error(Errc::invalid_argument, "track " + std::to_string(track) + " is not a sample stream");
  }
  StreamConfig cfg;
  cfg.track = info.number;
  cfg.name = info.name;
  cfg.codec_id = info.codec_id;
  cfg.channels = static_cast<int>(info.channels);
  const MetaMap& tags = info.tags;

  if (auto f = find_tag(tags, tag::sample_format)) {
    cfg.format = SampleFormat::parse(*f);
  } else if (info.codec_id == kCodecFlac) {
    const int bps = codec::read_flac_header(info.codec_private).bits_per_sample;
    cfg.format = SampleFormat::parse("int" + std::to_string(bps));
  } else if (info.codec_id == kCodecRice32) {
    cfg.format = codec::read_rice32_header(info.codec_private).format;
  } else if (info.codec_id == kCodecPcmFloat) {
    cfg.format = SampleFormat(SampleKind::float32);
  } else if (info.codec_id == codec::kCodecPcmInt) {
    cfg.format = SampleFormat::parse("int" + std::to_string(info.bit_depth));
  } else {
    throw Error(Errc::unsupported, "track " + std::to_string(track) + " uses unsupported codec " + info.codec_id);
  }

  if (auto r = rational_tag(tags, tag::rate)) {
    cfg.rate_hz = *r;
  } else {
    cfg.rate_hz = Rational::from_double(info.sampling_frequency, 1'000'000);
  }
  if (cfg.rate_hz <= Rational(0)) throw Error(Errc::malformed, "track " + std::to_string(track) + " has no sample rate");

  if (auto s = rational_tag(tags, tag::start_time)) {
    cfg.start_time_s = *s;
  } else {
    mkv::Frame first;
    auto reader = demuxer.frames({track});
    cfg.start_time_s = reader.next(first) ? demuxer.ticks_to_seconds(first.time) : Rational(0);
  }
  if (auto b = find_tag(tags, tag::block_size)) cfg.block_size = static_cast<std::uint32_t>(std::stoul(*b));

  StreamMeta& m = cfg.meta;
  if (auto u = find_tag(tags, tag::units)) m.units = *u;
  m.si_conversion_factor = rational_tag(tags, tag::si_factor);
  m.range_min = rational_tag(tags, tag::range_min);
  m.range_max = rational_tag(tags, tag::range_max);
  const std::string prefix = tag::extra_prefix;
  for (const auto& [k, v] : tags) {
    if (k.starts_with(prefix)) m.extra[k.substr(prefix.size())] = v;
  }
  return cfg;
}

Skeleton skeleton(const mkv::Demuxer& demuxer) {
  Skeleton out;
  out.session_meta = demuxer.info().session_tags;
  for (const auto& t : demuxer.info().tracks) {
    if (t.type == static_cast<std::uint64_t>(mkv::TrackType::audio)) {
      out.streams.push_back(stream_config(demuxer, t.number));
    } else if (t.type == static_cast<std::uint64_t>(mkv::TrackType::subtitle) && t.codec_id == kCodecAss) {
      out.tracks.push_back(SubtitleConfig{t.number, t.name});
    }
  }
  return out;
}

namespace {

UniformStream decode_stream_frames(const mkv::Demuxer& demuxer, std::uint64_t track, std::vector<mkv::Frame> frames) {
  const StreamConfig cfg = stream_config(demuxer, track);
  const mkv::TrackInfo& info = require_track(demuxer, track);
  std::vector<std::int32_t> values;
  if (info.codec_id == kCodecFlac) {
    const auto decoded = codec::flac_decode(collect(info, std::move(frames)).concatenated());
    if (decoded.info.bits_per_sample != cfg.format.bits_per_sample() || decoded.info.channels != cfg.channels) {
      throw Error(Errc::malformed, "track " + std::to_string(track) + " STREAMINFO disagrees with the track header");
    }
    values = std::move(decoded.samples);
  } else if (info.codec_id == kCodecRice32) {
    auto decoded = codec::rice32_decode(collect(info, std::move(frames)));
    if (decoded.info.format != cfg.format || decoded.info.channels != cfg.channels) {
      throw Error(Errc::malformed, "track " + std::to_string(track) + " RICE32 header disagrees with the track header");
    }
    values = std::move(decoded.bits);
  } else if (info.codec_id == kCodecPcmFloat || info.codec_id == codec::kCodecPcmInt) {
    for (const auto& f : frames) codec::pcm_decode_frame(cfg.format, f.data, values);
  } else {
    throw Error(Errc::unsupported, "track " + std::to_string(track) + " uses unsupported codec " + info.codec_id);
  }
  if (values.size() % static_cast<std::size_t>(cfg.channels) != 0) {
    throw Error(Errc::malformed, "track " + std::to_string(track) + " decoded to a partial frame");
  }
  return UniformStream(cfg.name, cfg.rate_hz, cfg.channels, cfg.format, cfg.start_time_s,
                       to_buffer(cfg.format, std::move(values)), cfg.meta);
}

}  // namespace

UniformStream decode_stream(const mkv::Demuxer& demuxer, std::uint64_t track) {
  return decode_stream_frames(demuxer, track, demuxer.read_all(track));
}

namespace {

Event frame_event(const mkv::Demuxer& demuxer, const mkv::Frame& f) {
  const Rational start = demuxer.ticks_to_seconds(f.time);
  const Rational duration = demuxer.ticks_to_seconds(f.duration.value_or(0));
  const std::string_view text(reinterpret_cast<const char*>(f.data.data()), f.data.size());
  const ssa::Dialogue d = ssa::parse_block_text(text, start, start + duration);
  auto [payload, position] = ssa::split_event_text(d.text);
  return Event{start, duration, std::move(payload), position};
}

const mkv::TrackInfo& require_subtitle(const mkv::Demuxer& demuxer, std::uint64_t track) {
  const mkv::TrackInfo& info = require_track(demuxer, track);
  if (info.codec_id != kCodecAss) {
    throw Error(Errc::invalid_argument, "track " + std::to_string(track) + " is not an " + std::string(kCodecAss) + " track");
  }
  return info;
}

}  // namespace

namespace {

SparseTrack decode_track_frames(const mkv::Demuxer& demuxer, std::uint64_t track, const std::vector<mkv::Frame>& frames) {
  const mkv::TrackInfo& info = require_subtitle(demuxer, track);
  std::vector<Event> events;
  events.reserve(frames.size());
  for (const auto& f : frames) events.push_back(frame_event(demuxer, f));
  return SparseTrack(info.name, std::move(events));
}

}  // namespace

SparseTrack decode_track(const mkv::Demuxer& demuxer, std::uint64_t track) {
  return decode_track_frames(demuxer, track, demuxer.read_all(track));
}

Dataset unpack(const mkv::Demuxer& demuxer, const std::vector<std::uint64_t>& tracks) {
  const Skeleton sk = skeleton(demuxer);
  auto wanted = [&](std::uint64_t n) { return std::find(tracks.begin(), tracks.end(), n) != tracks.end(); };
  std::map<std::uint64_t, std::vector<mkv::Frame>> frames;
  for (std::uint64_t n : tracks) {
    require_track(demuxer, n);
    frames[n];
  }
  if (!tracks.empty()) {
    auto reader = demuxer.frames(tracks);
    mkv::Frame f;
    while (reader.next(f)) frames[f.track].push_back(std::move(f));
  }
  std::vector<UniformStream> streams;
  std::vector<SparseTrack> out_tracks;
  for (const auto& s : sk.streams) {
    if (wanted(s.track)) streams.push_back(decode_stream_frames(demuxer, s.track, std::move(frames[s.track])));
  }
  for (const auto& t : sk.tracks) {
    if (wanted(t.track)) out_tracks.push_back(decode_track_frames(demuxer, t.track, frames[t.track]));
  }
  return Dataset(sk.session_meta, std::move(streams), std::move(out_tracks));
}

Dataset unpack(const mkv::Demuxer& demuxer) {
  const Skeleton sk = skeleton(demuxer);
  std::vector<std::uint64_t> all;
  for (const auto& s : sk.streams) all.push_back(s.track);
  for (const auto& t : sk.tracks) all.push_back(t.track);
  return unpack(demuxer, all);
}

Dataset unpack(std::vector<std::uint8_t> container) { return unpack(mkv::Demuxer::from_bytes(std::move(container))); }

StreamWindow decode_stream_window(const mkv::Demuxer& demuxer, std::uint64_t track, const Rational& t_start_s,
                                  const Rational& t_end_s) {
  const StreamConfig cfg = stream_config(demuxer, track);
  const mkv::TrackInfo& info = require_track(demuxer, track);
  const auto channels = static_cast<std::size_t>(cfg.channels);

  // Sample indices inside [t_start, t_end).
  const std::int64_t lo = std::max<std::int64_t>(0, ((t_start_s - cfg.start_time_s) * cfg.rate_hz).ceil());
  const std::int64_t hi = std::max<std::int64_t>(lo, ((t_end_s - cfg.start_time_s) * cfg.rate_hz).ceil());

  StreamWindow out{UniformStream(cfg.name, cfg.rate_hz, cfg.channels, cfg.format,
                                 cfg.start_time_s + Rational(lo) / cfg.rate_hz, to_buffer(cfg.format, {}), cfg.meta),
                   false};
  const mkv::SeekResult seek = mkv::seek_window(demuxer, track, t_start_s, t_end_s);
  out.used_cues = seek.used_cues;
  if (hi == lo) return out;

  std::vector<std::int32_t> values;
  std::optional<std::int64_t> first;
  std::vector<std::int32_t> block;
  for (const auto& f : seek.frames) {
    block.clear();
    const auto at = static_cast<std::int64_t>(decode_block(demuxer, info, cfg, f, block));
    const auto n = static_cast<std::int64_t>(block.size() / channels);
    const std::int64_t from = std::max(at, lo);
    const std::int64_t to = std::min(at + n, hi);
    if (from >= to) continue;
    if (!first) {
      first = from;
    } else if (from != *first + static_cast<std::int64_t>(values.size() / channels)) {
      throw Error(Errc::malformed, "track " + std::to_string(track) + " has a gap before sample " + std::to_string(at));
    }
    values.insert(values.end(), block.begin() + static_cast<std::ptrdiff_t>((from - at) * cfg.channels),
                  block.begin() + static_cast<std::ptrdiff_t>((to - at) * cfg.channels));
  }
  if (!first) return out;
  out.stream = UniformStream(cfg.name, cfg.rate_hz, cfg.channels, cfg.format,
                             cfg.start_time_s + Rational(*first) / cfg.rate_hz, to_buffer(cfg.format, std::move(values)),
                             cfg.meta);
  return out;
}

TrackWindow decode_track_window(const mkv::Demuxer& demuxer, std::uint64_t track, const Rational& t_start_s,
                                const Rational& t_end_s) {
  const mkv::TrackInfo& info = require_subtitle(demuxer, track);
  const mkv::SeekResult seek = mkv::seek_window(demuxer, track, t_start_s, t_end_s);
  std::vector<Event> events;
  for (const auto& f : seek.frames) {
    Event e = frame_event(demuxer, f);
    if (e.time_s <= t_end_s && e.time_s + e.duration_s >= t_start_s) events.push_back(std::move(e));
  }
  return TrackWindow{SparseTrack(info.name, std::move(events)), seek.used_cues};
}

}  // namespace tsc
