#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsc/rational.hpp"

namespace tsc {

inline constexpr const char* kCodecFlac = "A_FLAC";
inline constexpr const char* kCodecRice32 = "A_TS/RICE32";
inline constexpr const char* kCodecPcmFloat = "A_PCM/FLOAT/IEEE";
inline constexpr const char* kCodecAss = "S_TEXT/ASS";

/// One independently decodable unit, muxed as one Matroska block.
struct EncodedFrame {
  std::vector<std::uint8_t> data;
  std::uint64_t first_sample = 0;  // per-channel index of the first sample (audio)
  std::uint32_t sample_count = 0;  // per-channel samples in this frame (audio)
  std::optional<Rational> time_s;      // explicit session time (subtitles)
  std::optional<Rational> duration_s;  // explicit duration (subtitles)
};

/// Compressed stream plus codec identity and codec-private header.
struct EncodedTrack {
  std::string codec_id;
  std::vector<std::uint8_t> codec_private;
  std::vector<EncodedFrame> frames;

  std::size_t frame_bytes() const noexcept {
    std::size_t n = 0;
    for (const auto& f : frames) n += f.data.size();
    return n;
  }
  std::size_t total_bytes() const noexcept { return codec_private.size() + frame_bytes(); }

  /// codec_private followed by every frame: a complete standalone stream.
  std::vector<std::uint8_t> concatenated() const {
    std::vector<std::uint8_t> out(codec_private);
    out.reserve(total_bytes());
    for (const auto& f : frames) out.insert(out.end(), f.data.begin(), f.data.end());
    return out;
  }
};

}  // namespace tsc
