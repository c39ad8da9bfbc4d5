#include <gtest/gtest.h>

#include <random>
#include <string_view>

#include "tsc/bitstream.hpp"
#include "tsc/checksum.hpp"
#include "tsc/error.hpp"

namespace tsc {
namespace {

std::span<const std::uint8_t> bytes_of(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// Bit-at-a-time CRC, straight from the polynomial definitions.
std::uint32_t slow_crc(std::span<const std::uint8_t> data, int width, std::uint32_t poly) {
  const std::uint32_t top = 1u << (width - 1);
  const std::uint32_t mask = width == 32 ? 0xFFFFFFFFu : (1u << width) - 1;
  std::uint32_t crc = 0;
  for (std::uint8_t b : data) {
    for (int i = 7; i >= 0; --i) {
      const bool bit = ((b >> i) & 1) != 0;
      const bool msb = (crc & top) != 0;
      crc = (crc << 1) & mask;
      if (bit != msb) crc ^= poly;
    }
  }
  return crc;
}

TEST(Crc, CheckValues) {
  const auto check = bytes_of("123456789");
  EXPECT_EQ(crc8(check), 0xF4);
  EXPECT_EQ(crc16(check), 0xFEE8);
  EXPECT_EQ(crc32(check), 0xCBF43926u);
  EXPECT_EQ(crc32({}), 0u);
}

TEST(Crc, MatchesBitwiseDefinition) {
  std::mt19937 rng(3);
  for (int n = 0; n < 200; ++n) {
    std::vector<std::uint8_t> d(rng() % 64);
    for (auto& b : d) b = static_cast<std::uint8_t>(rng());
    EXPECT_EQ(crc8(d), slow_crc(d, 8, 0x07));
    EXPECT_EQ(crc16(d), slow_crc(d, 16, 0x8005));
  }
}

TEST(Crc, Incremental) {
  const auto all = bytes_of("hello, sensor world");
  const auto a = all.subspan(0, 7), b = all.subspan(7);
  EXPECT_EQ(crc8(b, crc8(a)), crc8(all));
  EXPECT_EQ(crc16(b, crc16(a)), crc16(all));
}

TEST(Md5, KnownDigests) {
  auto hex = [](const Md5Digest& d) {
    std::string s;
    char buf[3];
    for (auto b : d) {
      std::snprintf(buf, sizeof buf, "%02x", b);
      s += buf;
    }
    return s;
  };
  Md5 empty;
  EXPECT_EQ(hex(empty.finish()), "d41d8cd98f00b204e9800998ecf8427e");
  Md5 abc;
  abc.update(bytes_of("a"));
  abc.update(bytes_of("bc"));
  EXPECT_EQ(hex(abc.finish()), "900150983cd24fb0d6963f7d28e17f72");
}

TEST(BitStream, RandomFieldsRoundTrip) {
  std::mt19937_64 rng(9);
  std::vector<std::pair<std::uint64_t, int>> fields;
  BitWriter w;
  for (int i = 0; i < 5000; ++i) {
    const int n = static_cast<int>(rng() % 65);
    const std::uint64_t v = n == 64 ? rng() : rng() & ((std::uint64_t{1} << n) - 1);
    fields.emplace_back(v, n);
    w.write_bits(v, n);
  }
  const std::size_t bits = w.bit_length();
  const auto bytes = w.take();
  BitReader r(bytes, bits);
  for (const auto& [v, n] : fields) ASSERT_EQ(r.read_bits(n), v);
  EXPECT_EQ(r.bits_left(), 0u);
}

TEST(BitStream, SignedAndRuns) {
  BitWriter w;
  w.write_signed(-3, 5);
  w.write_run(true, 70);
  w.write_run(false, 3);
  w.write_signed(7, 4);
  const std::size_t bits = w.bit_length();
  const auto bytes = w.take();
  BitReader r(bytes, bits);
  EXPECT_EQ(r.read_signed(5), -3);
  EXPECT_EQ(r.read_run(true), 70u);
  EXPECT_EQ(r.read_run(false), 3u);
  EXPECT_EQ(r.read_signed(4), 7);
}

TEST(BitStream, MsbFirstLayout) {
  BitWriter w;
  w.write_bits(0b101, 3);
  w.write_bits(0b11111, 5);
  w.write_bits(1, 1);
  EXPECT_EQ(to_bit_string(w.bytes(), 8), "10111111");
  const auto b = w.take();
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[1], 0x80);
}

TEST(BitStream, TruncationReportsBitOffset) {
  const std::vector<std::uint8_t> data{0xFF, 0x00};
  BitReader r(data, 12);
  r.read_bits(10);
  try {
    r.read_bits(5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::truncated);
    EXPECT_EQ(e.location(), 10u);
  }
  const std::vector<std::uint8_t> all_ones{0xFF};
  BitReader ones(all_ones, 8);
  EXPECT_THROW(ones.read_run(true), Error);
}

}  // namespace
}  // namespace tsc
