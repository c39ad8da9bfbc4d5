#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsc/encoded_track.hpp"
#include "tsc/model.hpp"

namespace tsc::codec {

inline constexpr const char* kCodecPcmInt = "A_PCM/INT/LIT";

/// Uncompressed little-endian frames: "A_PCM/FLOAT/IEEE" for float32,
/// "A_PCM/INT/LIT" for integer formats. No codec private data.
EncodedTrack pcm_encode(const UniformStream& stream, std::uint32_t block_size = 4096);

/// Decodes one frame of `channels`-interleaved samples into `out` (bit patterns
/// for float32, sign-extended values for integers).
void pcm_decode_frame(SampleFormat format, std::span<const std::uint8_t> frame, std::vector<std::int32_t>& out);

}  // namespace tsc::codec
