#include "tsc/flac.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <limits>

#include "tsc/bitstream.hpp"
#include "tsc/error.hpp"
#include "tsc/fixed_predictor.hpp"
#include "tsc/kernels.hpp"
#include "tsc/rice.hpp"

namespace tsc::codec {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'f', 'L', 'a', 'C'};
constexpr ResidualFormat kFlacResidual{5, 8};
constexpr std::size_t kStreamInfoLength = 34;

struct CodedRate {
  std::uint32_t code;
  int extra_bits;
  std::uint32_t extra_value;
};

CodedRate code_sample_rate(std::uint32_t rate) {
  static constexpr std::array<std::pair<std::uint32_t, std::uint32_t>, 11> kStandard{{
      {88200, 1}, {176400, 2}, {192000, 3}, {8000, 4}, {16000, 5}, {22050, 6},
      {24000, 7}, {32000, 8}, {44100, 9}, {48000, 10}, {96000, 11},
  }};
  for (auto [hz, code] : kStandard) {
    if (hz == rate) return {code, 0, 0};
  }
  if (rate <= 65535) return {13, 16, rate};
  if (rate % 10 == 0 && rate / 10 <= 65535) return {14, 16, rate / 10};
  if (rate % 1000 == 0 && rate / 1000 <= 255) return {12, 8, rate / 1000};
  return {0, 0, 0};
}

struct CodedBlockSize {
  std::uint32_t code;
  int extra_bits;
};

CodedBlockSize code_block_size(std::uint32_t bs) {
  if (bs == 192) return {1, 0};
  for (std::uint32_t n = 2; n <= 5; ++n) {
    if (bs == 576u << (n - 2)) return {n, 0};
  }
  for (std::uint32_t n = 8; n <= 15; ++n) {
    if (bs == 256u << (n - 8)) return {n, 0};
  }
  return bs <= 256 ? CodedBlockSize{6, 8} : CodedBlockSize{7, 16};
}

std::uint32_t code_bits_per_sample(int bps) {
  switch (bps) {
    case 8: return 1;
    case 12: return 2;
    case 16: return 4;
    case 20: return 5;
    case 24: return 6;
    case 32: return 7;
    default: return 0;
  }
}

void write_utf8_number(BitWriter& out, std::uint64_t v) {
  if (v < 0x80) {
    out.write_bits(v, 8);
    return;
  }
  int continuation = 1;
  while (continuation < 6 && v >= (std::uint64_t{1} << (5 * continuation + 6))) ++continuation;
  const std::uint64_t lead_mask = (0xFF00u >> (continuation + 1)) & 0xFF;
  out.write_bits(lead_mask | (v >> (6 * continuation)), 8);
  for (int i = continuation - 1; i >= 0; --i) out.write_bits(0x80 | ((v >> (6 * i)) & 0x3F), 8);
}

void write_md5_sample(std::uint8_t* dst, std::int32_t v, int bytes) {
  const auto u = static_cast<std::uint32_t>(v);
  for (int b = 0; b < bytes; ++b) dst[b] = static_cast<std::uint8_t>(u >> (8 * b));
}

// Encodes one channel of one block, choosing the cheapest subframe by exact size.
SubframeChoice encode_subframe(BitWriter& out, std::span<const std::int32_t> samples, int bps, bool force_verbatim,
                               std::vector<std::int32_t>& shifted, std::vector<std::int32_t>& residual) {
  const auto& k = kernels::active();
  const std::size_t n = samples.size();

  int wasted = 0;
  if (!force_verbatim) {
    const std::uint32_t bits = k.or_reduce(samples);
    if (bits != 0) wasted = std::min(std::countr_zero(bits), bps - 1);
  }
  shifted.resize(n);
  for (std::size_t i = 0; i < n; ++i) shifted[i] = samples[i] >> wasted;
  const int ebps = bps - wasted;

  SubframeChoice choice;
  choice.wasted_bits = wasted;
  std::uint64_t best = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(ebps);
  ResidualPlan best_plan;

  if (!force_verbatim) {
    const bool constant =
        n > 0 && std::all_of(shifted.begin(), shifted.end(), [&](std::int32_t v) { return v == shifted[0]; });
    if (constant) {
      choice.kind = SubframeKind::constant;
    } else {
      for (int order = 0; order <= kMaxFixedOrder; ++order) {
        if (n <= static_cast<std::size_t>(order)) break;
        residual.resize(n - static_cast<std::size_t>(order));
        k.fixed_residual_i32(shifted, order, residual);
        ResidualPlan plan = plan_residual<std::int32_t>(residual, n, order, kFlacResidual);
        const std::uint64_t cost = static_cast<std::uint64_t>(order) * static_cast<std::uint64_t>(ebps) + plan.bits;
        if (cost < best) {
          best = cost;
          choice.kind = SubframeKind::fixed;
          choice.order = order;
          choice.rice_param_k = plan.params.front();
          best_plan = std::move(plan);
        }
      }
    }
  }

  std::uint32_t type = 1;
  if (choice.kind == SubframeKind::constant) type = 0;
  if (choice.kind == SubframeKind::fixed) type = 8 + static_cast<std::uint32_t>(choice.order);
  out.write_bits((type << 1) | (wasted > 0 ? 1u : 0u), 8);
  if (wasted > 0) out.write_run(false, static_cast<std::uint64_t>(wasted - 1));

  switch (choice.kind) {
    case SubframeKind::constant:
      out.write_signed(shifted[0], ebps);
      break;
    case SubframeKind::verbatim:
      for (std::int32_t v : shifted) out.write_signed(v, ebps);
      break;
    case SubframeKind::fixed: {
      const auto order = static_cast<std::size_t>(choice.order);
      for (std::size_t i = 0; i < order; ++i) out.write_signed(shifted[i], ebps);
      residual.resize(n - order);
      k.fixed_residual_i32(shifted, choice.order, residual);
      write_residual<std::int32_t>(out, residual, n, choice.order, best_plan);
      break;
    }
  }
  return choice;
}

std::vector<std::uint8_t> encode_frame(std::span<const std::int32_t> interleaved, std::size_t frames,
                                       std::uint64_t frame_number, const FlacStreamConfig& cfg,
                                       FlacEncodeStats* stats) {
  BitWriter w;
  const auto bs = code_block_size(static_cast<std::uint32_t>(frames));
  const auto rate = code_sample_rate(cfg.sample_rate_hz);
  w.write_bits(0xFFF8, 16);
  w.write_bits(bs.code, 4);
  w.write_bits(rate.code, 4);
  w.write_bits(static_cast<std::uint64_t>(cfg.channels - 1), 4);
  w.write_bits(code_bits_per_sample(cfg.bits_per_sample), 3);
  w.write_bits(0, 1);
  write_utf8_number(w, frame_number);
  if (bs.extra_bits > 0) w.write_bits(frames - 1, bs.extra_bits);
  if (rate.extra_bits > 0) w.write_bits(rate.extra_value, rate.extra_bits);
  w.write_bits(crc8(w.bytes()), 8);

  const auto channels = static_cast<std::size_t>(cfg.channels);
  std::vector<std::int32_t> channel(frames), shifted, residual;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < frames; ++i) channel[i] = interleaved[i * channels + c];
    const SubframeChoice choice =
        encode_subframe(w, channel, cfg.bits_per_sample, cfg.force_verbatim, shifted, residual);
    if (stats != nullptr) stats->subframes.push_back(choice);
  }
  w.align();
  const std::uint16_t crc = crc16(w.bytes());
  w.write_bits(crc, 16);
  return w.take();
}

[[noreturn]] void fail(Errc code, const std::string& what, std::size_t offset) {
  throw Error(code, what + " at byte " + std::to_string(offset), offset);
}

std::uint64_t read_utf8_number(BitReader& in) {
  const auto lead = static_cast<std::uint32_t>(in.read_bits(8));
  if ((lead & 0x80) == 0) return lead;
  const int ones = std::countl_one(static_cast<std::uint8_t>(lead));
  if (ones < 2 || ones > 7) fail(Errc::malformed, "invalid frame number encoding", in.byte_position() - 1);
  std::uint64_t v = lead & (0x7Fu >> ones);
  for (int i = 1; i < ones; ++i) {
    const auto b = static_cast<std::uint32_t>(in.read_bits(8));
    if ((b & 0xC0) != 0x80) fail(Errc::malformed, "invalid frame number continuation byte", in.byte_position() - 1);
    v = (v << 6) | (b & 0x3F);
  }
  return v;
}

void decode_subframe(BitReader& in, std::size_t block_size, int bps, std::vector<std::int64_t>& out,
                     std::vector<std::int64_t>& scratch) {
  const std::size_t at = in.byte_position();
  if (in.read_bit()) fail(Errc::malformed, "subframe padding bit set", at);
  const auto type = static_cast<std::uint32_t>(in.read_bits(6));
  int wasted = 0;
  if (in.read_bit()) wasted = static_cast<int>(in.read_run(false)) + 1;
  if (wasted >= bps) fail(Errc::malformed, "wasted bits exceed sample size", at);
  const int ebps = bps - wasted;

  out.resize(block_size);
  if (type == 0) {
    const std::int64_t v = in.read_signed(ebps);
    std::fill(out.begin(), out.end(), v);
  } else if (type == 1) {
    for (auto& v : out) v = in.read_signed(ebps);
  } else if (type >= 8 && type <= 12) {
    const int order = static_cast<int>(type - 8);
    if (static_cast<std::size_t>(order) > block_size) fail(Errc::malformed, "predictor order exceeds block size", at);
    for (int i = 0; i < order; ++i) out[static_cast<std::size_t>(i)] = in.read_signed(ebps);
    read_residual(in, block_size, order, kFlacResidual, scratch);
    std::copy(scratch.begin(), scratch.end(), out.begin() + order);
    fixed_restore(out, order);
  } else if (type >= 32) {
    fail(Errc::unsupported, "LPC subframe", at);
  } else {
    fail(Errc::malformed, "reserved subframe type " + std::to_string(type), at);
  }
  if (wasted > 0) {
    for (auto& v : out) v = static_cast<std::int64_t>(static_cast<std::uint64_t>(v) << wasted);
  }
}

}  // namespace

void FlacStreamConfig::validate() const {
  if (bits_per_sample != 8 && bits_per_sample != 16 && bits_per_sample != 24) {
    throw Error(Errc::invalid_argument, "FLAC bits per sample must be 8, 16 or 24");
  }
  if (channels < 1 || channels > 8) throw Error(Errc::invalid_argument, "FLAC supports 1..8 channels");
  if (block_size < 16 || block_size > 65535) throw Error(Errc::invalid_argument, "FLAC block size must be 16..65535");
  if (sample_rate_hz == 0 || sample_rate_hz > 655350) {
    throw Error(Errc::invalid_argument, "FLAC sample rate must be 1..655350 Hz");
  }
}

Md5Digest flac_md5(std::span<const std::int32_t> interleaved, int bits_per_sample) {
  const int bytes = bits_per_sample / 8;
  Md5 md5;
  std::array<std::uint8_t, 4096> buf;
  const std::size_t per_chunk = buf.size() / static_cast<std::size_t>(bytes);
  for (std::size_t i = 0; i < interleaved.size(); i += per_chunk) {
    const std::size_t n = std::min(per_chunk, interleaved.size() - i);
    for (std::size_t j = 0; j < n; ++j) write_md5_sample(buf.data() + j * static_cast<std::size_t>(bytes), interleaved[i + j], bytes);
    md5.update(std::span(buf.data(), n * static_cast<std::size_t>(bytes)));
  }
  return md5.finish();
}

std::vector<std::uint8_t> write_flac_header(const FlacStreamInfo& info) {
  BitWriter w;
  w.write_bytes(kMagic);
  w.write_bits(0x80, 8);  // last metadata block, type STREAMINFO
  w.write_bits(kStreamInfoLength, 24);
  w.write_bits(info.min_block_size, 16);
  w.write_bits(info.max_block_size, 16);
  w.write_bits(info.min_frame_size, 24);
  w.write_bits(info.max_frame_size, 24);
  w.write_bits(info.sample_rate_hz, 20);
  w.write_bits(static_cast<std::uint64_t>(info.channels - 1), 3);
  w.write_bits(static_cast<std::uint64_t>(info.bits_per_sample - 1), 5);
  w.write_bits(info.total_samples, 36);
  w.write_bytes(info.md5);
  return w.take();
}

FlacStreamInfo read_flac_header(std::span<const std::uint8_t> data, std::size_t* frames_offset) {
  if (data.size() < 4 || !std::equal(kMagic.begin(), kMagic.end(), data.begin())) {
    fail(Errc::bad_magic, "missing fLaC stream marker", 0);
  }
  BitReader in(data);
  in.skip_bytes(4);
  FlacStreamInfo info;
  bool have_info = false;
  for (bool last = false; !last;) {
    const std::size_t at = in.byte_position();
    last = in.read_bit();
    const auto type = in.read_bits(7);
    const auto length = static_cast<std::size_t>(in.read_bits(24));
    if (!have_info) {
      if (type != 0 || length != kStreamInfoLength) fail(Errc::malformed, "first metadata block is not STREAMINFO", at);
      info.min_block_size = static_cast<std::uint32_t>(in.read_bits(16));
      info.max_block_size = static_cast<std::uint32_t>(in.read_bits(16));
      info.min_frame_size = static_cast<std::uint32_t>(in.read_bits(24));
      info.max_frame_size = static_cast<std::uint32_t>(in.read_bits(24));
      info.sample_rate_hz = static_cast<std::uint32_t>(in.read_bits(20));
      info.channels = static_cast<int>(in.read_bits(3)) + 1;
      info.bits_per_sample = static_cast<int>(in.read_bits(5)) + 1;
      info.total_samples = in.read_bits(36);
      for (auto& b : info.md5) b = static_cast<std::uint8_t>(in.read_bits(8));
      have_info = true;
      if (info.min_block_size < 16 || info.max_block_size < info.min_block_size) {
        fail(Errc::malformed, "invalid STREAMINFO block sizes", at);
      }
      if (info.bits_per_sample < 4) fail(Errc::malformed, "invalid STREAMINFO sample size", at);
    } else {
      in.skip_bytes(length);
    }
  }
  if (frames_offset != nullptr) *frames_offset = in.byte_position();
  return info;
}

FlacFrameHeader decode_flac_frame(const FlacStreamInfo& info, std::span<const std::uint8_t> data,
                                  std::vector<std::int32_t>& out, std::size_t& consumed) {
  BitReader in(data);
  FlacFrameHeader hdr;
  const auto sync = in.read_bits(15);
  if (sync != (0xFFF8 >> 1)) fail(Errc::malformed, "missing frame sync", 0);
  hdr.variable_blocking = in.read_bit();
  const auto bs_code = static_cast<std::uint32_t>(in.read_bits(4));
  const auto rate_code = static_cast<std::uint32_t>(in.read_bits(4));
  const auto assignment = static_cast<std::uint32_t>(in.read_bits(4));
  const auto bps_code = static_cast<std::uint32_t>(in.read_bits(3));
  if (in.read_bit()) fail(Errc::malformed, "reserved frame header bit set", 3);
  const std::uint64_t number = read_utf8_number(in);

  if (bs_code == 0) fail(Errc::malformed, "reserved block size code", 2);
  std::uint32_t block_size = 0;
  if (bs_code == 1) block_size = 192;
  else if (bs_code <= 5) block_size = 576u << (bs_code - 2);
  else if (bs_code == 6) block_size = static_cast<std::uint32_t>(in.read_bits(8)) + 1;
  else if (bs_code == 7) block_size = static_cast<std::uint32_t>(in.read_bits(16)) + 1;
  else block_size = 256u << (bs_code - 8);

  if (rate_code == 12) in.read_bits(8);
  else if (rate_code == 13 || rate_code == 14) in.read_bits(16);
  else if (rate_code == 15) fail(Errc::malformed, "invalid sample rate code", 2);

  const std::size_t header_len = in.byte_position();
  const auto expected_crc8 = static_cast<std::uint8_t>(in.read_bits(8));
  if (crc8(data.first(header_len)) != expected_crc8) fail(Errc::header_crc, "frame header CRC-8 mismatch", 0);

  if (assignment > 10) fail(Errc::malformed, "reserved channel assignment", 3);
  const int channels = assignment <= 7 ? static_cast<int>(assignment) + 1 : 2;
  if (channels != info.channels) fail(Errc::malformed, "frame channel count disagrees with STREAMINFO", 3);
  static constexpr std::array<int, 8> kBps{0, 8, 12, 0, 16, 20, 24, 32};
  int bps = info.bits_per_sample;
  if (bps_code != 0) {
    bps = kBps[bps_code];
    if (bps == 0) fail(Errc::malformed, "reserved sample size code", 3);
    if (bps != info.bits_per_sample) fail(Errc::malformed, "frame sample size disagrees with STREAMINFO", 3);
  }

  hdr.block_size = block_size;
  hdr.frame_number = hdr.variable_blocking ? 0 : number;
  hdr.first_sample = hdr.variable_blocking ? number : number * info.max_block_size;

  std::vector<std::vector<std::int64_t>> ch(static_cast<std::size_t>(channels));
  std::vector<std::int64_t> scratch;
  for (int c = 0; c < channels; ++c) {
    // The side channel of a stereo decorrelation carries one extra bit.
    const bool side = (assignment == 8 && c == 1) || (assignment == 9 && c == 0) || (assignment == 10 && c == 1);
    decode_subframe(in, block_size, bps + (side ? 1 : 0), ch[static_cast<std::size_t>(c)], scratch);
  }
  in.align();
  const std::size_t body_len = in.byte_position();
  const auto expected_crc16 = static_cast<std::uint16_t>(in.read_bits(16));
  if (crc16(data.first(body_len)) != expected_crc16) fail(Errc::frame_crc, "frame CRC-16 mismatch", body_len);
  consumed = in.byte_position();

  if (assignment == 8) {
    for (std::size_t i = 0; i < block_size; ++i) ch[1][i] = ch[0][i] - ch[1][i];
  } else if (assignment == 9) {
    for (std::size_t i = 0; i < block_size; ++i) ch[0][i] += ch[1][i];
  } else if (assignment == 10) {
    for (std::size_t i = 0; i < block_size; ++i) {
      const std::int64_t side = ch[1][i];
      const std::int64_t mid = (ch[0][i] * 2) | (side & 1);
      ch[0][i] = (mid + side) >> 1;
      ch[1][i] = (mid - side) >> 1;
    }
  }

  const std::int64_t lo = -(std::int64_t{1} << (bps - 1));
  const std::int64_t hi = (std::int64_t{1} << (bps - 1)) - 1;
  const std::size_t base = out.size();
  out.resize(base + static_cast<std::size_t>(block_size) * static_cast<std::size_t>(channels));
  for (std::size_t i = 0; i < block_size; ++i) {
    for (std::size_t c = 0; c < static_cast<std::size_t>(channels); ++c) {
      const std::int64_t v = ch[c][i];
      if (v < lo || v > hi) fail(Errc::malformed, "decoded sample out of range", 0);
      out[base + i * static_cast<std::size_t>(channels) + c] = static_cast<std::int32_t>(v);
    }
  }
  return hdr;
}

FlacDecoded flac_decode(std::span<const std::uint8_t> stream) {
  FlacDecoded result;
  std::size_t pos = 0;
  result.info = read_flac_header(stream, &pos);
  const auto& info = result.info;
  const auto channels = static_cast<std::size_t>(info.channels);
  result.samples.reserve(std::min<std::uint64_t>(info.total_samples * channels, stream.size() * 64));

  std::uint64_t expected_first = 0;
  std::uint64_t expected_number = 0;
  while (pos < stream.size()) {
    std::size_t consumed = 0;
    FlacFrameHeader hdr;
    try {
      hdr = decode_flac_frame(info, stream.subspan(pos), result.samples, consumed);
    } catch (const Error& e) {
      // Re-base frame-relative offsets onto the stream.
      const std::uint64_t loc = pos + e.location().value_or(0) / (e.code() == Errc::truncated ? 8 : 1);
      throw Error(e.code(), std::string(e.what()) + " (frame at byte " + std::to_string(pos) + ")", loc);
    }
    if (hdr.first_sample != expected_first || (!hdr.variable_blocking && hdr.frame_number != expected_number)) {
      fail(Errc::malformed, "frame out of sequence", pos);
    }
    if (hdr.block_size > info.max_block_size) fail(Errc::malformed, "frame larger than STREAMINFO maximum", pos);
    expected_first += hdr.block_size;
    ++expected_number;
    pos += consumed;
  }
  if (info.total_samples != 0 && expected_first != info.total_samples) {
    throw Error(Errc::truncated,
                "stream holds " + std::to_string(expected_first) + " samples, STREAMINFO declares " +
                    std::to_string(info.total_samples),
                stream.size());
  }
  const Md5Digest zero{};
  if (info.md5 != zero && flac_md5(result.samples, info.bits_per_sample) != info.md5) {
    throw Error(Errc::md5_mismatch, "decoded samples do not match STREAMINFO MD5");
  }
  return result;
}

EncodedTrack flac_encode(std::span<const std::int32_t> interleaved, const FlacStreamConfig& cfg,
                         FlacEncodeStats* stats) {
  cfg.validate();
  const auto channels = static_cast<std::size_t>(cfg.channels);
  if (interleaved.size() % channels != 0) {
    throw Error(Errc::invalid_argument, "sample count is not a multiple of the channel count");
  }
  const std::int64_t lo = -(std::int64_t{1} << (cfg.bits_per_sample - 1));
  const std::int64_t hi = (std::int64_t{1} << (cfg.bits_per_sample - 1)) - 1;
  for (std::size_t i = 0; i < interleaved.size(); ++i) {
    if (interleaved[i] < lo || interleaved[i] > hi) {
      throw Error(Errc::invalid_argument, "sample " + std::to_string(i) + " exceeds the configured bit depth", i);
    }
  }
  const std::size_t total = interleaved.size() / channels;

  EncodedTrack track;
  track.codec_id = kCodecFlac;
  std::uint32_t min_frame = 0, max_frame = 0;
  std::uint64_t number = 0;
  for (std::size_t first = 0; first < total; first += cfg.block_size, ++number) {
    const std::size_t n = std::min<std::size_t>(cfg.block_size, total - first);
    EncodedFrame frame;
    frame.data = encode_frame(interleaved.subspan(first * channels, n * channels), n, number, cfg, stats);
    frame.first_sample = first;
    frame.sample_count = static_cast<std::uint32_t>(n);
    const auto size = static_cast<std::uint32_t>(frame.data.size());
    min_frame = number == 0 ? size : std::min(min_frame, size);
    max_frame = std::max(max_frame, size);
    track.frames.push_back(std::move(frame));
  }

  FlacStreamInfo info;
  info.min_block_size = cfg.block_size;
  info.max_block_size = cfg.block_size;
  info.min_frame_size = min_frame;
  info.max_frame_size = max_frame;
  info.sample_rate_hz = cfg.sample_rate_hz;
  info.channels = cfg.channels;
  info.bits_per_sample = cfg.bits_per_sample;
  info.total_samples = total;
  info.md5 = flac_md5(interleaved, cfg.bits_per_sample);
  track.codec_private = write_flac_header(info);
  return track;
}

EncodedTrack flac_encode(const UniformStream& stream, std::uint32_t block_size, FlacEncodeStats* stats) {
  if (!stream.format().is_integer() || stream.format().bits_per_sample() > 24) {
    throw Error(Errc::invalid_argument, "FLAC accepts int8, int16 and int24 streams only (got " +
                                            stream.format().name() + ")");
  }
  FlacStreamConfig cfg;
  cfg.block_size = block_size;
  cfg.bits_per_sample = stream.format().bits_per_sample();
  cfg.channels = stream.channels();
  cfg.sample_rate_hz = static_cast<std::uint32_t>(std::clamp<std::int64_t>(stream.rate_hz().round(), 1, 655350));
  return flac_encode(stream.int_samples(), cfg, stats);
}

}  // namespace tsc::codec
