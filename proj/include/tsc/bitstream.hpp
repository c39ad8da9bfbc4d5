#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tsc {

/// Big-endian (MSB-first) bit packer.
class BitWriter {
 public:
  /// Appends the low `count` bits of `value`, count in [0, 64].
  void write_bits(std::uint64_t value, int count);
  void write_signed(std::int64_t value, int count) { write_bits(static_cast<std::uint64_t>(value), count); }
  void write_bit(bool bit) { write_bits(bit ? 1u : 0u, 1); }
  /// `count` repetitions of `bit` followed by one `!bit`.
  void write_run(bool bit, std::uint64_t count);
  void write_bytes(std::span<const std::uint8_t> bytes);
  /// Zero-pads to the next byte boundary.
  void align();

  std::size_t bit_length() const noexcept { return bytes_.size() * 8 + static_cast<std::size_t>(pending_bits_); }
  bool aligned() const noexcept { return pending_bits_ == 0; }

  /// Completed bytes so far (call align() first for the full stream).
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  std::vector<std::uint8_t> take();

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t pending_ = 0;  // right-aligned, pending_bits_ < 8 after each call
  int pending_bits_ = 0;
};

/// Big-endian bit reader over a byte span. Every read past the end throws
/// tsc::Error(truncated) with the absolute bit offset at which it failed.
class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> data, std::size_t bit_limit = SIZE_MAX);

  std::uint64_t read_bits(int count);
  std::int64_t read_signed(int count);
  bool read_bit() { return read_bits(1) != 0; }
  /// Number of `bit`s before the first `!bit`; consumes the terminator.
  std::uint64_t read_run(bool bit);
  void align();
  void skip_bytes(std::size_t n);

  std::size_t position() const noexcept { return pos_; }
  std::size_t bits_left() const noexcept { return limit_ - pos_; }
  std::size_t byte_position() const noexcept { return pos_ / 8; }

 private:
  std::uint64_t peek64() const noexcept;
  [[noreturn]] void fail(std::size_t needed) const;

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::size_t limit_ = 0;
};

/// "0101..." rendering of the first `bits` bits, for tests and diagnostics.
std::string to_bit_string(std::span<const std::uint8_t> bytes, std::size_t bits);

}  // namespace tsc
