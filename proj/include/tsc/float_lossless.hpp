#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsc/encoded_track.hpp"
#include "tsc/model.hpp"

// "A_TS/RICE32": lossless coding of 32-bit samples. float32 values are coded
// through their bit patterns read as signed integers, so NaN payloads, signed
// zeros and infinities survive. Layout per frame mirrors FLAC (fixed
// predictor + partitioned Rice) with 64-bit residuals and a 6-bit escape width.

namespace tsc::codec {

inline constexpr std::uint8_t kRice32Version = 1;

struct Rice32Info {
  SampleFormat format{SampleKind::float32};  // float32 or int32
  int channels = 1;
  std::uint32_t block_size = 4096;
  std::uint64_t total_samples = 0;  // per channel
};

enum class Rice32Subframe : std::uint8_t { constant = 0, verbatim = 1, fixed0 = 2 };

struct Rice32Stats {
  std::vector<int> orders;  // per subframe: -2 constant, -1 verbatim, else fixed order
};

/// `bits` holds interleaved 32-bit patterns.
EncodedTrack rice32_encode(std::span<const std::int32_t> bits, const Rice32Info& info, Rice32Stats* stats = nullptr);

/// float32 or int32 stream.
EncodedTrack float_lossless_encode(const UniformStream& stream, std::uint32_t block_size = 4096,
                                   Rice32Stats* stats = nullptr);

std::vector<std::uint8_t> write_rice32_header(const Rice32Info& info);
Rice32Info read_rice32_header(std::span<const std::uint8_t> codec_private);

struct Rice32FrameHeader {
  std::uint64_t first_sample = 0;
  std::uint32_t sample_count = 0;
};

/// Decodes one frame, appending interleaved patterns to `out`. Verifies the frame CRC-16.
Rice32FrameHeader decode_rice32_frame(const Rice32Info& info, std::span<const std::uint8_t> frame,
                                      std::vector<std::int32_t>& out);

struct Rice32Decoded {
  Rice32Info info;
  std::vector<std::int32_t> bits;  // interleaved
};

Rice32Decoded rice32_decode(const EncodedTrack& track);

/// Bit-pattern views.
std::vector<std::int32_t> float_bits(std::span<const float> values);
std::vector<float> bits_to_float(std::span<const std::int32_t> bits);

}  // namespace tsc::codec
