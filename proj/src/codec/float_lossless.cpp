#include "tsc/float_lossless.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <limits>

#include "tsc/bitstream.hpp"
#include "tsc/checksum.hpp"
#include "tsc/error.hpp"
#include "tsc/fixed_predictor.hpp"
#include "tsc/kernels.hpp"
#include "tsc/rice.hpp"

namespace tsc::codec {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'T', 'S', 'R', '3'};
constexpr std::size_t kHeaderSize = 20;
constexpr ResidualFormat kRice32Residual{6, 8};

int encode_subframe(BitWriter& out, std::span<const std::int32_t> x, std::vector<std::int64_t>& residual) {
  const std::size_t n = x.size();
  if (std::all_of(x.begin(), x.end(), [&](std::int32_t v) { return v == x[0]; })) {
    out.write_bits(static_cast<std::uint64_t>(Rice32Subframe::constant), 8);
    out.write_signed(x[0], 32);
    return -2;
  }
  const auto& k = kernels::active();
  std::uint64_t best = static_cast<std::uint64_t>(n) * 32;
  int best_order = -1;
  ResidualPlan best_plan;
  for (int order = 0; order <= kMaxFixedOrder && static_cast<std::size_t>(order) < n; ++order) {
    residual.resize(n - static_cast<std::size_t>(order));
    k.fixed_residual_i64(x, order, residual);
    ResidualPlan plan = plan_residual<std::int64_t>(residual, n, order, kRice32Residual);
    const std::uint64_t cost = static_cast<std::uint64_t>(order) * 32 + plan.bits;
    if (cost < best) {
      best = cost;
      best_order = order;
      best_plan = std::move(plan);
    }
  }
  if (best_order < 0) {
    out.write_bits(static_cast<std::uint64_t>(Rice32Subframe::verbatim), 8);
    for (std::int32_t v : x) out.write_signed(v, 32);
    return -1;
  }
  out.write_bits(static_cast<std::uint64_t>(Rice32Subframe::fixed0) + static_cast<std::uint64_t>(best_order), 8);
  for (int i = 0; i < best_order; ++i) out.write_signed(x[static_cast<std::size_t>(i)], 32);
  residual.resize(n - static_cast<std::size_t>(best_order));
  k.fixed_residual_i64(x, best_order, residual);
  write_residual<std::int64_t>(out, residual, n, best_order, best_plan);
  return best_order;
}

void decode_subframe(BitReader& in, std::size_t n, std::vector<std::int64_t>& out, std::vector<std::int64_t>& scratch) {
  const std::size_t at = in.position();
  const auto type = static_cast<std::uint32_t>(in.read_bits(8));
  out.resize(n);
  if (type == static_cast<std::uint32_t>(Rice32Subframe::constant)) {
    std::fill(out.begin(), out.end(), in.read_signed(32));
  } else if (type == static_cast<std::uint32_t>(Rice32Subframe::verbatim)) {
    for (auto& v : out) v = in.read_signed(32);
  } else if (type >= 2 && type <= 2 + kMaxFixedOrder) {
    const int order = static_cast<int>(type) - 2;
    if (static_cast<std::size_t>(order) > n) {
      throw Error(Errc::malformed, "predictor order exceeds frame length at bit " + std::to_string(at), at);
    }
    for (int i = 0; i < order; ++i) out[static_cast<std::size_t>(i)] = in.read_signed(32);
    read_residual(in, n, order, kRice32Residual, scratch);
    std::copy(scratch.begin(), scratch.end(), out.begin() + order);
    fixed_restore(out, order);
  } else {
    throw Error(Errc::malformed, "unknown subframe type " + std::to_string(type) + " at bit " + std::to_string(at), at);
  }
}

void put_be(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_be(std::span<const std::uint8_t> in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v = (v << 8) | in[at + static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

std::vector<std::int32_t> float_bits(std::span<const float> values) {
  std::vector<std::int32_t> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [](float f) { return std::bit_cast<std::int32_t>(f); });
  return out;
}

std::vector<float> bits_to_float(std::span<const std::int32_t> bits) {
  std::vector<float> out(bits.size());
  std::transform(bits.begin(), bits.end(), out.begin(), [](std::int32_t b) { return std::bit_cast<float>(b); });
  return out;
}

std::vector<std::uint8_t> write_rice32_header(const Rice32Info& info) {
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  out.push_back(kRice32Version);
  out.push_back(static_cast<std::uint8_t>(info.format.kind()));
  out.push_back(static_cast<std::uint8_t>(info.channels));
  out.push_back(0);
  put_be(out, info.block_size, 4);
  put_be(out, info.total_samples, 8);
  return out;
}

Rice32Info read_rice32_header(std::span<const std::uint8_t> p) {
  if (p.size() < 4 || !std::equal(kMagic.begin(), kMagic.end(), p.begin())) {
    throw Error(Errc::bad_magic, "missing A_TS/RICE32 header magic", 0);
  }
  if (p.size() < kHeaderSize) throw Error(Errc::truncated, "A_TS/RICE32 header truncated", p.size());
  if (p[4] != kRice32Version) {
    throw Error(Errc::unsupported, "A_TS/RICE32 version " + std::to_string(p[4]) + " not supported", 4);
  }
  Rice32Info info;
  if (p[5] == static_cast<std::uint8_t>(SampleKind::float32)) info.format = SampleFormat(SampleKind::float32);
  else if (p[5] == static_cast<std::uint8_t>(SampleKind::int32)) info.format = SampleFormat(SampleKind::int32);
  else throw Error(Errc::malformed, "A_TS/RICE32 sample format code " + std::to_string(p[5]) + " invalid", 5);
  info.channels = p[6];
  if (info.channels < 1) throw Error(Errc::malformed, "A_TS/RICE32 channel count is zero", 6);
  info.block_size = static_cast<std::uint32_t>(get_be(p, 8, 4));
  info.total_samples = get_be(p, 12, 8);
  if (info.block_size == 0) throw Error(Errc::malformed, "A_TS/RICE32 block size is zero", 8);
  return info;
}

EncodedTrack rice32_encode(std::span<const std::int32_t> bits, const Rice32Info& info, Rice32Stats* stats) {
  if (info.format.kind() != SampleKind::float32 && info.format.kind() != SampleKind::int32) {
    throw Error(Errc::invalid_argument, "A_TS/RICE32 codes float32 and int32 only");
  }
  if (info.channels < 1 || info.channels > 255) throw Error(Errc::invalid_argument, "channel count must be 1..255");
  if (info.block_size < 1 || info.block_size > 65535) throw Error(Errc::invalid_argument, "block size must be 1..65535");
  const auto channels = static_cast<std::size_t>(info.channels);
  if (bits.size() % channels != 0) throw Error(Errc::invalid_argument, "sample count is not a multiple of channels");

  Rice32Info hdr = info;
  hdr.total_samples = bits.size() / channels;
  EncodedTrack track;
  track.codec_id = kCodecRice32;
  track.codec_private = write_rice32_header(hdr);

  std::vector<std::int32_t> channel;
  std::vector<std::int64_t> residual;
  for (std::size_t first = 0; first < hdr.total_samples; first += info.block_size) {
    const std::size_t n = std::min<std::size_t>(info.block_size, hdr.total_samples - first);
    BitWriter w;
    w.write_bits(first, 64);
    w.write_bits(n, 32);
    channel.resize(n);
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t i = 0; i < n; ++i) channel[i] = bits[(first + i) * channels + c];
      const int order = encode_subframe(w, channel, residual);
      if (stats != nullptr) stats->orders.push_back(order);
    }
    w.align();
    w.write_bits(crc16(w.bytes()), 16);
    EncodedFrame frame;
    frame.data = w.take();
    frame.first_sample = first;
    frame.sample_count = static_cast<std::uint32_t>(n);
    track.frames.push_back(std::move(frame));
  }
  return track;
}

EncodedTrack float_lossless_encode(const UniformStream& stream, std::uint32_t block_size, Rice32Stats* stats) {
  Rice32Info info;
  info.format = stream.format();
  info.channels = stream.channels();
  info.block_size = block_size;
  if (stream.format().kind() == SampleKind::float32) return rice32_encode(float_bits(stream.float_samples()), info, stats);
  if (stream.format().kind() == SampleKind::int32) return rice32_encode(stream.int_samples(), info, stats);
  throw Error(Errc::invalid_argument, "A_TS/RICE32 codes float32 and int32 only (got " + stream.format().name() + ")");
}

Rice32FrameHeader decode_rice32_frame(const Rice32Info& info, std::span<const std::uint8_t> frame,
                                      std::vector<std::int32_t>& out) {
  if (frame.size() < 14) throw Error(Errc::truncated, "A_TS/RICE32 frame shorter than its header", frame.size());
  const std::size_t body = frame.size() - 2;
  const auto stored_crc = static_cast<std::uint16_t>(get_be(frame, body, 2));
  if (crc16(frame.first(body)) != stored_crc) throw Error(Errc::frame_crc, "A_TS/RICE32 frame CRC-16 mismatch", body);

  BitReader in(frame.first(body));
  Rice32FrameHeader hdr;
  hdr.first_sample = in.read_bits(64);
  hdr.sample_count = static_cast<std::uint32_t>(in.read_bits(32));
  if (hdr.sample_count == 0 || hdr.sample_count > info.block_size) {
    throw Error(Errc::malformed, "A_TS/RICE32 frame length " + std::to_string(hdr.sample_count) + " invalid", 8);
  }
  const auto channels = static_cast<std::size_t>(info.channels);
  const std::size_t n = hdr.sample_count;
  std::vector<std::vector<std::int64_t>> ch(channels);
  std::vector<std::int64_t> scratch;
  for (auto& c : ch) decode_subframe(in, n, c, scratch);
  if (in.bits_left() >= 8) throw Error(Errc::malformed, "trailing bytes in A_TS/RICE32 frame", in.byte_position());

  const std::size_t base = out.size();
  out.resize(base + n * channels);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::int64_t v = ch[c][i];
      if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max()) {
        throw Error(Errc::malformed, "decoded value exceeds 32 bits", 0);
      }
      out[base + i * channels + c] = static_cast<std::int32_t>(v);
    }
  }
  return hdr;
}

Rice32Decoded rice32_decode(const EncodedTrack& track) {
  Rice32Decoded result;
  result.info = read_rice32_header(track.codec_private);
  const auto channels = static_cast<std::size_t>(result.info.channels);
  result.bits.reserve(std::min<std::uint64_t>(result.info.total_samples, std::uint64_t{1} << 32) * channels);
  std::uint64_t expected = 0;
  for (const auto& f : track.frames) {
    const auto hdr = decode_rice32_frame(result.info, f.data, result.bits);
    if (hdr.first_sample != expected) {
      throw Error(Errc::malformed, "A_TS/RICE32 frame starts at sample " + std::to_string(hdr.first_sample) +
                                       ", expected " + std::to_string(expected));
    }
    expected += hdr.sample_count;
  }
  if (expected != result.info.total_samples) {
    throw Error(Errc::truncated, "A_TS/RICE32 stream holds " + std::to_string(expected) + " samples, header declares " +
                                     std::to_string(result.info.total_samples));
  }
  return result;
}

}  // namespace tsc::codec
