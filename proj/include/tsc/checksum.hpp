#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>

namespace tsc {

/// CRC-8, polynomial 0x07, init 0 (FLAC frame header).
std::uint8_t crc8(std::span<const std::uint8_t> data, std::uint8_t crc = 0) noexcept;
/// CRC-16, polynomial 0x8005, init 0, MSB-first (FLAC frame footer).
std::uint16_t crc16(std::span<const std::uint8_t> data, std::uint16_t crc = 0) noexcept;
/// CRC-32 (IEEE 802.3, reflected), as used by the EBML CRC-32 element.
std::uint32_t crc32(std::span<const std::uint8_t> data) noexcept;

using Md5Digest = std::array<std::uint8_t, 16>;

/// Incremental MD5 (backed by OpenSSL's EVP interface).
class Md5 {
 public:
  Md5();
  ~Md5();
  Md5(const Md5&) = delete;
  Md5& operator=(const Md5&) = delete;

  void update(std::span<const std::uint8_t> data);
  Md5Digest finish();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace tsc
