#include "tsc/bitstream.hpp"

#include <bit>
#include <cstring>

#include "tsc/error.hpp"

namespace tsc {

void BitWriter::write_bits(std::uint64_t value, int count) {
  if (count <= 0) return;
  if (count < 64) value &= (std::uint64_t{1} << count) - 1;
  // pending_ holds < 8 bits, so up to 56 new bits fit in one step.
  if (count > 56) {
    write_bits(value >> 32, count - 32);
    write_bits(value & 0xFFFFFFFFu, 32);
    return;
  }
  pending_ = (pending_ << count) | value;
  pending_bits_ += count;
  while (pending_bits_ >= 8) {
    pending_bits_ -= 8;
    bytes_.push_back(static_cast<std::uint8_t>(pending_ >> pending_bits_));
  }
  pending_ &= (std::uint64_t{1} << pending_bits_) - 1;
}

void BitWriter::write_run(bool bit, std::uint64_t count) {
  const std::uint64_t fill = bit ? ~std::uint64_t{0} : 0;
  while (count >= 32) {
    write_bits(fill, 32);
    count -= 32;
  }
  write_bits(fill, static_cast<int>(count));
  write_bit(!bit);
}

void BitWriter::write_bytes(std::span<const std::uint8_t> bytes) {
  if (aligned()) {
    bytes_.insert(bytes_.end(), bytes.begin(), bytes.end());
    return;
  }
  for (std::uint8_t b : bytes) write_bits(b, 8);
}

void BitWriter::align() {
  if (pending_bits_ != 0) write_bits(0, 8 - pending_bits_);
}

std::vector<std::uint8_t> BitWriter::take() {
  align();
  std::vector<std::uint8_t> out;
  out.swap(bytes_);
  return out;
}

BitReader::BitReader(std::span<const std::uint8_t> data, std::size_t bit_limit)
    : data_(data), limit_(std::min(bit_limit, data.size() * 8)) {}

std::uint64_t BitReader::peek64() const noexcept {
  const std::size_t byte = pos_ >> 3;
  const unsigned shift = static_cast<unsigned>(pos_ & 7);
  std::uint64_t v = 0;
  if (byte + 9 <= data_.size()) {
    std::memcpy(&v, data_.data() + byte, 8);
    if constexpr (std::endian::native == std::endian::little) v = __builtin_bswap64(v);
    if (shift != 0) v = (v << shift) | (data_[byte + 8] >> (8 - shift));
  } else {
    auto at = [&](std::size_t i) -> std::uint64_t { return i < data_.size() ? data_[i] : 0; };
    for (std::size_t i = 0; i < 8; ++i) v = (v << 8) | at(byte + i);
    if (shift != 0) v = (v << shift) | (at(byte + 8) >> (8 - shift));
  }
  // Bits past the limit read as zero.
  const std::size_t avail = limit_ - pos_;
  if (avail < 64) v &= avail == 0 ? 0 : ~std::uint64_t{0} << (64 - avail);
  return v;
}

void BitReader::fail(std::size_t needed) const {
  throw Error(Errc::truncated,
              "bitstream truncated at bit " + std::to_string(pos_) + " (needed " + std::to_string(needed) +
                  " more bits, " + std::to_string(limit_ - pos_) + " available)",
              pos_);
}

std::uint64_t BitReader::read_bits(int count) {
  if (count <= 0) return 0;
  if (count > 56) {
    const std::uint64_t hi = read_bits(count - 32);
    return (hi << 32) | read_bits(32);
  }
  if (limit_ - pos_ < static_cast<std::size_t>(count)) fail(static_cast<std::size_t>(count));
  const std::uint64_t v = peek64() >> (64 - count);
  pos_ += static_cast<std::size_t>(count);
  return v;
}

std::int64_t BitReader::read_signed(int count) {
  if (count <= 0) return 0;
  const std::uint64_t raw = read_bits(count);
  if (count == 64) return static_cast<std::int64_t>(raw);
  const std::uint64_t sign = std::uint64_t{1} << (count - 1);
  return static_cast<std::int64_t>((raw ^ sign) - sign);
}

std::uint64_t BitReader::read_run(bool bit) {
  std::uint64_t count = 0;
  for (;;) {
    const std::size_t avail = limit_ - pos_;
    if (avail == 0) fail(1);
    std::uint64_t w = peek64();
    if (bit) w = ~w;
    const std::size_t window = std::min<std::size_t>(avail, 64);
    if (window < 64) w &= ~std::uint64_t{0} << (64 - window);
    if (w != 0) {
      const auto lead = static_cast<std::size_t>(std::countl_zero(w));
      pos_ += lead + 1;
      return count + lead;
    }
    pos_ += window;
    count += window;
  }
}

void BitReader::align() {
  const std::size_t rem = pos_ & 7;
  if (rem != 0) {
    const std::size_t skip = 8 - rem;
    if (limit_ - pos_ < skip) fail(skip);
    pos_ += skip;
  }
}

void BitReader::skip_bytes(std::size_t n) {
  if ((limit_ - pos_) / 8 < n) fail(n * 8);
  pos_ += n * 8;
}

std::string to_bit_string(std::span<const std::uint8_t> bytes, std::size_t bits) {
  std::string out;
  out.reserve(bits);
  for (std::size_t i = 0; i < bits && i / 8 < bytes.size(); ++i) {
    out.push_back(((bytes[i / 8] >> (7 - i % 8)) & 1) != 0 ? '1' : '0');
  }
  return out;
}

}  // namespace tsc
