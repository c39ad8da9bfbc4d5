#include <gtest/gtest.h>

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <new>
#include <random>

#include "helpers.hpp"
#include "tsc/csv.hpp"
#include "tsc/error.hpp"
#include "tsc/validate.hpp"

namespace {
std::atomic<bool> g_counting{false};
std::atomic<std::size_t> g_allocated{0};
}  // namespace

void* operator new(std::size_t n) {
  if (g_counting.load(std::memory_order_relaxed)) g_allocated.fetch_add(n, std::memory_order_relaxed);
  if (void* p = std::malloc(n == 0 ? 1 : n)) return p;
  throw std::bad_alloc();
}
void operator delete(void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }

namespace tsc {
namespace {

StreamTarget named(std::string name, SampleFormat f = SampleFormat(SampleKind::float32)) {
  StreamTarget t;
  t.name = std::move(name);
  t.format = f;
  return t;
}

Errc error_of(auto&& fn, std::optional<std::uint64_t>* location = nullptr, std::string* message = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (location) *location = e.location();
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::invalid_argument;
}

TEST(Csv, TimeCodedExample) {
  CsvSpec spec;
  spec.time_column = 0;
  const auto s = read_timecoded_csv("0.0,1\n0.01,2\n", spec);
  EXPECT_EQ(s.timestamps, (std::vector<double>{0.0, 0.01}));
  EXPECT_EQ(s.channels, 1);
  EXPECT_EQ(s.values, (std::vector<double>{1, 2}));
}

TEST(Csv, ConstantRateExample) {
  const auto s = read_uniform_csv("1\n2\n3\n", CsvSpec{}, Rational(100));
  EXPECT_EQ(s.rate_hz(), Rational(100));
  EXPECT_EQ(s.channels(), 1);
  EXPECT_EQ(std::vector<float>(s.float_samples().begin(), s.float_samples().end()), (std::vector<float>{1, 2, 3}));
}

TEST(Csv, RaggedRowNamesLine) {
  std::optional<std::uint64_t> line;
  EXPECT_EQ(error_of([] { read_uniform_csv("0,1\n0,1,2\n", CsvSpec{}, Rational(1)); }, &line), Errc::ragged_row);
  EXPECT_EQ(line, 2u);
}

TEST(Csv, NonNumericNamesLineAndColumn) {
  std::optional<std::uint64_t> line;
  std::string msg;
  EXPECT_EQ(error_of([] { read_uniform_csv("1,2\n3,x\n", CsvSpec{}, Rational(1)); }, &line, &msg), Errc::non_numeric);
  EXPECT_EQ(line, 2u);
  EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
}

TEST(Csv, EmptyFileIsAnError) {
  EXPECT_EQ(error_of([] { read_uniform_csv("", CsvSpec{}, Rational(1)); }), Errc::empty_input);
  EXPECT_EQ(error_of([] { read_uniform_csv("\n\n", CsvSpec{}, Rational(1)); }), Errc::empty_input);
  CsvSpec header;
  header.has_header = true;
  EXPECT_EQ(error_of([&] { read_uniform_csv("a,b\n", header, Rational(1)); }), Errc::empty_input);
}

TEST(Csv, Conventions) {
  CsvSpec spec;
  spec.has_header = true;
  spec.delimiter = ';';
  const auto s = read_uniform_csv("x;y\r\n1e-3;-2.5E2\r\n\r\n+4;.5\r\n", spec, Rational(2));
  EXPECT_EQ(s.channels(), 2);
  EXPECT_EQ(std::vector<float>(s.float_samples().begin(), s.float_samples().end()),
            (std::vector<float>{0.001f, -250.0f, 4.0f, 0.5f}));
  CsvSpec bad;
  bad.delimiter = '.';
  EXPECT_THROW(bad.validate(), Error);
  bad.delimiter = '-';
  EXPECT_THROW(bad.validate(), Error);
  EXPECT_THROW(read_uniform_csv("1\n", CsvSpec{}, Rational(0)), Error);
}

TEST(Csv, IntegerTargets) {
  StreamTarget t;
  t.format = SampleFormat(SampleKind::int16);
  const auto s = read_uniform_csv("1\n-7\n", CsvSpec{}, Rational(1), t);
  EXPECT_EQ(std::vector<std::int32_t>(s.int_samples().begin(), s.int_samples().end()), (std::vector<std::int32_t>{1, -7}));
  EXPECT_EQ(write_csv(s), "1\n-7\n");
  EXPECT_THROW(read_uniform_csv("1.5\n", CsvSpec{}, Rational(1), t), Error);
  EXPECT_THROW(read_uniform_csv("40000\n", CsvSpec{}, Rational(1), t), Error);
}

TEST(Csv, WriteFixedPoint) {
  const UniformStream s("s", Rational(1), 1, SampleFormat(SampleKind::float32), Rational(0), std::vector<float>{1, 2});
  EXPECT_EQ(write_csv(s), "1.000000\n2.000000\n");
  CsvSpec spec;
  spec.time_column = 0;
  spec.decimal_digits = 2;
  const UniformStream t("s", Rational(4), 1, SampleFormat(SampleKind::float32), Rational(1), std::vector<float>{1, 2});
  EXPECT_EQ(write_csv(t, spec), "1.00,1.00\n1.25,2.00\n");
}

TEST(Csv, ShortDecimalsRoundTripExactly) {
  std::mt19937 rng(8);
  std::vector<float> v(5000);
  for (auto& x : v) x = static_cast<float>(static_cast<int>(rng() % 2000001) - 1000000) / 1e4f;
  const UniformStream s("s", Rational(10), 2, SampleFormat(SampleKind::float32), Rational(0), v);
  const auto back = read_uniform_csv(write_csv(s), CsvSpec{}, Rational(10), named("s"));
  EXPECT_TRUE(stream_equal(s, back).equal) << stream_equal(s, back).difference;
}

TEST(Csv, NoiseRoundTripWithinTextPrecision) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<float> d(-1.0f, 1.0f);
  std::vector<float> v(100000);
  for (auto& x : v) x = d(rng);
  const UniformStream s("s", Rational(10), 1, SampleFormat(SampleKind::float32), Rational(0), v);
  const std::string text = write_csv(s);
  const auto back = read_uniform_csv(text, CsvSpec{}, Rational(10));
  // The text is within 5e-7 of every value; storing it back as float32 adds
  // at most half an ulp on top.
  std::size_t pos = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t eol = text.find('\n', pos);
    const double t = std::stod(text.substr(pos, eol - pos));
    pos = eol + 1;
    ASSERT_LE(std::abs(t - v[i]), 5e-7 + 1e-12);
    const double half_ulp = 0.5 * (std::nextafter(std::abs(v[i]), 2.0f) - std::abs(v[i]));
    ASSERT_LE(std::abs(static_cast<double>(back.float_samples()[i]) - v[i]), 5e-7 + half_ulp) << i;
  }
}

TEST(Csv, TimeCodedWriteRead) {
  TimecodedSeries s{"t", {0.0, 0.5, 0.5, 2.0}, 2, {1, 2, 3, 4, 5, 6, 7, 8}};
  CsvSpec spec;
  spec.time_column = 0;
  const auto back = read_timecoded_csv(write_csv(s, spec), spec);
  EXPECT_EQ(back.timestamps, s.timestamps);  // duplicates kept
  EXPECT_EQ(back.values, s.values);
  spec.time_column = 1;
  const auto mid = read_timecoded_csv("1,0.25,2\n", spec);
  EXPECT_EQ(mid.timestamps, std::vector<double>{0.25});
  EXPECT_EQ(mid.values, (std::vector<double>{1, 2}));
  EXPECT_EQ(error_of([&] { read_timecoded_csv("1,abc,2\n", spec); }), Errc::non_numeric);
  EXPECT_EQ(error_of([&] { read_timecoded_csv("1,inf,2\n", spec); }), Errc::bad_timestamp);
}

TEST(RawF32, ReferenceBytes) {
  const UniformStream one("s", Rational(1), 1, SampleFormat(SampleKind::float32), Rational(0), std::vector<float>{1.0f});
  EXPECT_EQ(write_f32(one), (std::vector<std::uint8_t>{0x00, 0x00, 0x80, 0x3F}));
  const UniformStream none("s", Rational(1), 1, SampleFormat(SampleKind::float32), Rational(0), std::vector<float>{});
  EXPECT_TRUE(write_f32(none).empty());
  const std::vector<std::uint8_t> five(5);
  EXPECT_THROW(read_f32(five, 1, Rational(1)), Error);
  const std::vector<std::uint8_t> four(4);
  EXPECT_THROW(read_f32(four, 2, Rational(1)), Error);
}

TEST(RawF32, RandomBitPatternsRoundTrip) {
  std::mt19937 rng(10);
  std::vector<float> v(100000);
  for (auto& x : v) x = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
  const UniformStream s("s", Rational(50), 4, SampleFormat(SampleKind::float32), Rational(0), v);
  const auto back = read_f32(write_f32(s), 4, Rational(50), named("s"));
  EXPECT_TRUE(stream_equal(s, back).equal);
}

TEST(Raw, IntegerWidths) {
  for (SampleKind k : {SampleKind::int8, SampleKind::int16, SampleKind::int24, SampleKind::int32}) {
    const SampleFormat f(k);
    const auto s = test::random_stream("s", f, 3, 777, Rational(5), static_cast<std::uint32_t>(k));
    const auto bytes = write_raw(s);
    EXPECT_EQ(bytes.size(), 3u * 777u * static_cast<std::size_t>(f.bits_per_sample() / 8));
    EXPECT_TRUE(stream_equal(s, read_raw(bytes, f, 3, Rational(5), named("s", f))).equal) << f.name();
  }
}

TEST(Csv, ParserAllocationBudget) {
  std::string text;
  std::mt19937 rng(12);
  for (int i = 0; i < 50000; ++i) {
    text += std::to_string(rng() % 1000) + "." + std::to_string(rng() % 1000000) + "," +
            std::to_string(static_cast<int>(rng() % 2000) - 1000) + ".5\n";
  }
  g_allocated = 0;
  g_counting = true;
  const auto s = read_uniform_csv(text, CsvSpec{}, Rational(100));
  g_counting = false;
  EXPECT_EQ(s.frame_count(), 50000u);
  EXPECT_LE(g_allocated.load(), 2 * text.size()) << "allocated " << g_allocated.load() << " for " << text.size();
}

}  // namespace
}  // namespace tsc
