#include "tsc/pcm.hpp"

#include <bit>

#include "tsc/error.hpp"

namespace tsc::codec {

EncodedTrack pcm_encode(const UniformStream& stream, std::uint32_t block_size) {
  if (block_size == 0) throw Error(Errc::invalid_argument, "block size must be positive");
  const bool is_float = stream.format().kind() == SampleKind::float32;
  const auto width = static_cast<std::size_t>(stream.format().bits_per_sample() / 8);
  const auto channels = static_cast<std::size_t>(stream.channels());
  const std::size_t frames = stream.frame_count();

  EncodedTrack track;
  track.codec_id = is_float ? kCodecPcmFloat : kCodecPcmInt;
  for (std::size_t first = 0; first < frames; first += block_size) {
    const std::size_t n = std::min<std::size_t>(block_size, frames - first);
    EncodedFrame f;
    f.first_sample = first;
    f.sample_count = static_cast<std::uint32_t>(n);
    f.data.reserve(n * channels * width);
    for (std::size_t i = first * channels; i < (first + n) * channels; ++i) {
      const auto u = is_float ? std::bit_cast<std::uint32_t>(stream.float_samples()[i])
                              : static_cast<std::uint32_t>(stream.int_samples()[i]);
      for (std::size_t b = 0; b < width; ++b) f.data.push_back(static_cast<std::uint8_t>(u >> (8 * b)));
    }
    track.frames.push_back(std::move(f));
  }
  return track;
}

void pcm_decode_frame(SampleFormat format, std::span<const std::uint8_t> frame, std::vector<std::int32_t>& out) {
  const auto width = static_cast<std::size_t>(format.bits_per_sample() / 8);
  if (frame.size() % width != 0) {
    throw Error(Errc::malformed, "PCM frame of " + std::to_string(frame.size()) + " bytes is not a whole number of samples");
  }
  const int shift = 32 - format.bits_per_sample();
  for (std::size_t i = 0; i < frame.size(); i += width) {
    std::uint32_t u = 0;
    for (std::size_t b = 0; b < width; ++b) u |= static_cast<std::uint32_t>(frame[i + b]) << (8 * b);
    // Sign-extend narrower integers.
    out.push_back(static_cast<std::int32_t>(u << shift) >> shift);
  }
}

}  // namespace tsc::codec
