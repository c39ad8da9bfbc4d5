#include <gtest/gtest.h>

#include <random>

#include "tsc/checksum.hpp"
#include "tsc/ebml.hpp"
#include "tsc/error.hpp"

namespace tsc::mkv {
namespace {

using Bytes = std::vector<std::uint8_t>;

TEST(Vint, ReferenceEncodings) {
  EXPECT_EQ(vint_write(1), Bytes{0x81});
  EXPECT_EQ(vint_write(0), Bytes{0x80});
  EXPECT_EQ(vint_write(126), Bytes{0xFE});
  EXPECT_EQ(vint_write(127), (Bytes{0x40, 0x7F}));
  EXPECT_EQ(vint_write(1, 4), (Bytes{0x10, 0x00, 0x00, 0x01}));
  EXPECT_EQ(vint_width(127), 2);
  EXPECT_EQ(vint_width(16382), 2);
  EXPECT_EQ(vint_width(16383), 3);
}

TEST(Vint, ExhaustiveSmallRange) {
  for (std::uint64_t v = 0; v <= (1u << 21); ++v) {
    const Bytes b = vint_write(v);
    const Vint r = vint_read(b);
    ASSERT_EQ(r.value, v);
    ASSERT_EQ(static_cast<std::size_t>(r.width), b.size());
    ASSERT_EQ(r.width, vint_width(v));
  }
}

TEST(Vint, EveryWidthAtItsBoundaries) {
  for (int w = 1; w <= 8; ++w) {
    const std::uint64_t top = (std::uint64_t{1} << (7 * w)) - 2;  // largest non-reserved value
    for (std::uint64_t v : {std::uint64_t{0}, top / 2, top}) {
      const Bytes b = vint_write(v, w);
      ASSERT_EQ(b.size(), static_cast<std::size_t>(w));
      ASSERT_EQ(vint_read(b).value, v);
    }
    EXPECT_THROW(vint_write(top + 1, w), Error);
  }
  EXPECT_THROW(vint_write(kMaxVint + 1), Error);
}

TEST(Vint, ReservedAndInvalidPatterns) {
  EXPECT_EQ(vint_read(Bytes{0xFF}).value, kUnknownSize);
  EXPECT_EQ(vint_read(Bytes{0x01, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF}).value, kUnknownSize);
  try {
    vint_read(Bytes{0x00, 0x01}, 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::malformed);
    EXPECT_EQ(e.location(), 100u);
  }
  try {
    vint_read(Bytes{0x20, 0x00}, 50);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::truncated);
    EXPECT_EQ(e.location(), 50u);
  }
}

TEST(ElementId, KeepsMarker) {
  const Bytes b{0x1A, 0x45, 0xDF, 0xA3};
  EXPECT_EQ(id_read(b).value, id::EBML);
  EXPECT_EQ(id_read(b).width, 4);
  EXPECT_EQ(id_read(Bytes{0xEC}).value, id::Void);
  EXPECT_THROW(id_read(Bytes{0x08, 0, 0, 0, 0}), Error);
}

TEST(Elements, BuildAndParse) {
  Bytes inner;
  put_uint(inner, id::TrackNumber, 3);
  put_string(inner, id::CodecID, "A_FLAC");
  put_float(inner, id::SamplingFrequency, 44100.5);
  put_uint(inner, id::TrackUID, 0);
  put_uint(inner, id::TimestampScale, 1'000'000, 8);
  Bytes outer;
  put_master(outer, id::TrackEntry, inner);
  const auto top = children(outer, 0);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].header.id, id::TrackEntry);
  const auto kids = children(top[0].data, top[0].header.data_offset);
  ASSERT_EQ(kids.size(), 5u);
  EXPECT_EQ(read_uint(kids[0]), 3u);
  EXPECT_EQ(kids[0].data.size(), 1u);
  EXPECT_EQ(read_string(kids[1]), "A_FLAC");
  EXPECT_EQ(read_float(kids[2]), 44100.5);
  EXPECT_EQ(read_uint(kids[3]), 0u);
  EXPECT_EQ(kids[4].data.size(), 8u);
  EXPECT_EQ(read_uint(kids[4]), 1'000'000u);
  EXPECT_EQ(kids[1].header.offset, kids[0].header.offset + 3);
}

TEST(Elements, CrcChildIsVerified) {
  Bytes inner;
  put_string(inner, id::Title, "hello");
  Bytes outer;
  put_master(outer, id::Info, inner, true);
  const auto top = children(outer, 0);
  const auto kids = children(top[0].data, top[0].header.data_offset);
  // The verified CRC-32 child is consumed; its little-endian value covers the rest.
  ASSERT_EQ(kids.size(), 1u);
  EXPECT_EQ(read_string(kids[0]), "hello");
  const auto raw = top[0].data;
  ASSERT_EQ(raw[0], 0xBF);
  ASSERT_EQ(raw[1], 0x84);
  const std::uint32_t stored = raw[2] | raw[3] << 8 | raw[4] << 16 | static_cast<std::uint32_t>(raw[5]) << 24;
  EXPECT_EQ(stored, crc32(inner));
  outer.back() ^= 1;
  const auto bad = children(outer, 0);
  try {
    children(bad[0].data, bad[0].header.data_offset);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::crc32_mismatch);
  }
}

TEST(Elements, OverrunReportsOffset) {
  Bytes inner;
  put_string(inner, id::Title, "abcdef");
  inner.resize(inner.size() - 2);
  try {
    children(inner, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::truncated);
    ASSERT_TRUE(e.location().has_value());
    EXPECT_GE(*e.location(), 1000u);
  }
}

TEST(Registry, NamesKnownIds) {
  EXPECT_EQ(element_name(id::SimpleBlock), "SimpleBlock");
  EXPECT_EQ(element_name(id::Cluster), "Cluster");
  EXPECT_FALSE(element_name(0x12345678).has_value());
  for (const auto& e : registry()) EXPECT_EQ(element_name(e.id), e.name);
}

TEST(ByteSource, CountsAndBoundsReads) {
  MemorySource m(Bytes{1, 2, 3, 4, 5});
  EXPECT_EQ(m.read(1, 3), (Bytes{2, 3, 4}));
  EXPECT_EQ(m.bytes_read(), 3u);
  EXPECT_THROW(m.read(3, 3), Error);
  m.reset_counter();
  EXPECT_EQ(m.bytes_read(), 0u);
  EXPECT_THROW(FileSource("/nonexistent/file.mkv"), Error);
}

}  // namespace
}  // namespace tsc::mkv
