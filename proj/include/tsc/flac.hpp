#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsc/checksum.hpp"
#include "tsc/encoded_track.hpp"
#include "tsc/model.hpp"

// FLAC subset encoder/decoder: fixed predictors, partitioned Rice residuals,
// independent channels. Output is a standard FLAC bitstream.

namespace tsc::codec {

struct FlacStreamConfig {
  std::uint32_t block_size = 4096;
  int bits_per_sample = 16;  // 8, 16 or 24
  int channels = 1;          // 1..8
  std::uint32_t sample_rate_hz = 44100;
  /// Emit verbatim subframes only (the encoder's own fallback; used as a size bound).
  bool force_verbatim = false;

  void validate() const;
};

struct FlacStreamInfo {
  std::uint32_t min_block_size = 0;
  std::uint32_t max_block_size = 0;
  std::uint32_t min_frame_size = 0;
  std::uint32_t max_frame_size = 0;
  std::uint32_t sample_rate_hz = 0;
  int channels = 0;
  int bits_per_sample = 0;
  std::uint64_t total_samples = 0;  // per channel
  Md5Digest md5{};
};

enum class SubframeKind : std::uint8_t { constant, verbatim, fixed };

struct SubframeChoice {
  SubframeKind kind = SubframeKind::verbatim;
  int order = 0;         // fixed predictor order
  int rice_param_k = 0;  // first partition's parameter (-1 escaped) for fixed
  int wasted_bits = 0;
};

struct FlacEncodeStats {
  std::vector<SubframeChoice> subframes;  // frame-major, channel-minor
};

/// `interleaved` holds channel-interleaved samples within the configured bit depth.
EncodedTrack flac_encode(std::span<const std::int32_t> interleaved, const FlacStreamConfig& cfg,
                         FlacEncodeStats* stats = nullptr);

/// Integer stream of at most 24 bits. FLAC has no rational rates, so the
/// STREAMINFO rate is the nearest positive integer.
EncodedTrack flac_encode(const UniformStream& stream, std::uint32_t block_size = 4096,
                         FlacEncodeStats* stats = nullptr);

/// "fLaC" + STREAMINFO (last-metadata flag set), 42 bytes.
std::vector<std::uint8_t> write_flac_header(const FlacStreamInfo& info);

/// Parses the magic and metadata blocks. `frames_offset` receives the byte
/// offset of the first frame.
FlacStreamInfo read_flac_header(std::span<const std::uint8_t> data, std::size_t* frames_offset = nullptr);

struct FlacFrameHeader {
  std::uint64_t first_sample = 0;
  std::uint32_t block_size = 0;
  std::uint64_t frame_number = 0;
  bool variable_blocking = false;
};

/// Decodes one frame starting at data[0], appending interleaved samples to
/// `out`. Verifies CRC-8 and CRC-16. Returns the header; `consumed` receives the frame length.
FlacFrameHeader decode_flac_frame(const FlacStreamInfo& info, std::span<const std::uint8_t> data,
                                  std::vector<std::int32_t>& out, std::size_t& consumed);

struct FlacDecoded {
  FlacStreamInfo info;
  std::vector<std::int32_t> samples;  // interleaved
};

/// Decodes a complete stream and checks frame order, sample total and MD5.
FlacDecoded flac_decode(std::span<const std::uint8_t> stream);

/// MD5 of the samples as little-endian signed integers of bits/8 bytes.
Md5Digest flac_md5(std::span<const std::int32_t> interleaved, int bits_per_sample);

}  // namespace tsc::codec
