#include "tsc/checksum.hpp"

#include <openssl/evp.h>

#include "tsc/error.hpp"

namespace tsc {
namespace {

constexpr std::array<std::uint8_t, 256> make_crc8_table() {
  std::array<std::uint8_t, 256> table{};
  for (unsigned i = 0; i < 256; ++i) {
    unsigned c = i;
    for (int b = 0; b < 8; ++b) c = (c & 0x80) != 0 ? ((c << 1) ^ 0x07) : (c << 1);
    table[i] = static_cast<std::uint8_t>(c);
  }
  return table;
}

constexpr std::array<std::uint16_t, 256> make_crc16_table() {
  std::array<std::uint16_t, 256> table{};
  for (unsigned i = 0; i < 256; ++i) {
    unsigned c = i << 8;
    for (int b = 0; b < 8; ++b) c = (c & 0x8000) != 0 ? ((c << 1) ^ 0x8005) : (c << 1);
    table[i] = static_cast<std::uint16_t>(c);
  }
  return table;
}

constexpr std::array<std::uint32_t, 256> make_crc32_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int b = 0; b < 8; ++b) c = (c & 1) != 0 ? (0xEDB88320u ^ (c >> 1)) : (c >> 1);
    table[i] = c;
  }
  return table;
}

constexpr auto kCrc8 = make_crc8_table();
constexpr auto kCrc16 = make_crc16_table();
constexpr auto kCrc32 = make_crc32_table();

}  // namespace

std::uint8_t crc8(std::span<const std::uint8_t> data, std::uint8_t crc) noexcept {
  for (std::uint8_t b : data) crc = kCrc8[crc ^ b];
  return crc;
}

std::uint16_t crc16(std::span<const std::uint8_t> data, std::uint16_t crc) noexcept {
  for (std::uint8_t b : data) crc = static_cast<std::uint16_t>((crc << 8) ^ kCrc16[(crc >> 8) ^ b]);
  return crc;
}

std::uint32_t crc32(std::span<const std::uint8_t> data) noexcept {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::uint8_t b : data) crc = kCrc32[(crc ^ b) & 0xFF] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

struct Md5::State {
  EVP_MD_CTX* ctx = nullptr;
};

Md5::Md5() : state_(std::make_unique<State>()) {
  state_->ctx = EVP_MD_CTX_new();
  if (state_->ctx == nullptr || EVP_DigestInit_ex(state_->ctx, EVP_md5(), nullptr) != 1) {
    throw Error(Errc::unsupported, "MD5 digest unavailable");
  }
}

Md5::~Md5() {
  if (state_ && state_->ctx != nullptr) EVP_MD_CTX_free(state_->ctx);
}

void Md5::update(std::span<const std::uint8_t> data) {
  if (!data.empty()) EVP_DigestUpdate(state_->ctx, data.data(), data.size());
}

Md5Digest Md5::finish() {
  Md5Digest digest{};
  unsigned len = 0;
  EVP_DigestFinal_ex(state_->ctx, digest.data(), &len);
  return digest;
}

}  // namespace tsc
