#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "tsc/error.hpp"
#include "tsc/rational.hpp"
#include "tsc/validate.hpp"

namespace tsc {
namespace {

TEST(Rational, NormalizesAndCompares) {
  EXPECT_EQ(Rational(2, 4), Rational(1, 2));
  EXPECT_EQ(Rational(1, -3), Rational(-1, 3));
  EXPECT_LT(Rational(1, 3), Rational(1, 2));
  EXPECT_EQ(Rational(1, 3) + Rational(1, 6), Rational(1, 2));
  EXPECT_EQ(Rational(7, 2).floor(), 3);
  EXPECT_EQ(Rational(-7, 2).floor(), -4);
  EXPECT_EQ(Rational(7, 2).ceil(), 4);
  EXPECT_THROW(Rational(1, 0), Error);
}

TEST(Rational, ParseIsExact) {
  EXPECT_EQ(Rational::parse("0.01"), Rational(1, 100));
  EXPECT_EQ(Rational::parse("1000/3"), Rational(1000, 3));
  EXPECT_EQ(Rational::parse("-2.5e-3"), Rational(-1, 400));
  EXPECT_EQ(Rational::parse("12"), Rational(12));
  EXPECT_THROW(Rational::parse("abc"), Error);
  EXPECT_THROW(Rational::parse("1/0"), Error);
  EXPECT_THROW(Rational::parse(""), Error);
  for (const Rational r : {Rational(1, 3), Rational(-5, 8), Rational(100), Rational(981, 100000)}) {
    EXPECT_EQ(Rational::parse(r.to_string()), r) << r.to_string();
  }
}

TEST(SampleFormat, BitsFollowKind) {
  EXPECT_EQ(SampleFormat(SampleKind::int8).bits_per_sample(), 8);
  EXPECT_EQ(SampleFormat(SampleKind::int16).bits_per_sample(), 16);
  EXPECT_EQ(SampleFormat(SampleKind::int24).bits_per_sample(), 24);
  EXPECT_EQ(SampleFormat(SampleKind::int32).bits_per_sample(), 32);
  EXPECT_EQ(SampleFormat(SampleKind::float32).bits_per_sample(), 32);
  EXPECT_EQ(SampleFormat(SampleKind::int24).min_value(), -(1 << 23));
  EXPECT_EQ(SampleFormat(SampleKind::int24).max_value(), (1 << 23) - 1);
  EXPECT_EQ(SampleFormat::parse("f32"), SampleFormat(SampleKind::float32));
  EXPECT_EQ(SampleFormat::parse("int24").name(), "int24");
  EXPECT_THROW(SampleFormat::parse("int12"), Error);
}

TEST(UniformStream, RejectsBrokenInvariants) {
  const SampleFormat i16(SampleKind::int16);
  EXPECT_THROW(UniformStream("s", Rational(0), 1, i16, Rational(0), std::vector<std::int32_t>{}), Error);
  EXPECT_THROW(UniformStream("s", Rational(10), 0, i16, Rational(0), std::vector<std::int32_t>{}), Error);
  EXPECT_THROW(UniformStream("s", Rational(10), 2, i16, Rational(0), std::vector<std::int32_t>{1, 2, 3}), Error);
  EXPECT_THROW(UniformStream("s", Rational(10), 1, i16, Rational(-1), std::vector<std::int32_t>{}), Error);
  EXPECT_THROW(UniformStream("s", Rational(10), 1, i16, Rational(0), std::vector<float>{1.0f}), Error);
  EXPECT_THROW(UniformStream("s", Rational(10), 1, SampleFormat(SampleKind::int8), Rational(0),
                             std::vector<std::int32_t>{200}),
               Error);
  StreamMeta m;
  m.range_min = Rational(2);
  m.range_max = Rational(1);
  EXPECT_THROW(UniformStream("s", Rational(10), 1, i16, Rational(0), std::vector<std::int32_t>{}, m), Error);
}

TEST(UniformStream, TimeOfSample) {
  const UniformStream s("s", Rational(3), 2, SampleFormat(SampleKind::int16), Rational(1, 2),
                        std::vector<std::int32_t>(12, 0));
  EXPECT_EQ(s.frame_count(), 6u);
  EXPECT_EQ(s.time_of(3), Rational(3, 2));
  EXPECT_EQ(s.end_time_s(), Rational(5, 2));
}

TEST(SparseTrack, SortsStablyByTime) {
  std::vector<Event> ev{{Rational(2), Rational(0), "b", {}}, {Rational(1), Rational(0), "a", {}},
                        {Rational(2), Rational(0), "c", {}}};
  const SparseTrack t("t", ev);
  ASSERT_EQ(t.events().size(), 3u);
  EXPECT_EQ(t.events()[0].payload, "a");
  EXPECT_EQ(t.events()[1].payload, "b");
  EXPECT_EQ(t.events()[2].payload, "c");
  EXPECT_THROW(SparseTrack("t", {{Rational(-1), Rational(0), "x", {}}}), Error);
  EXPECT_THROW(SparseTrack("t", {{Rational(1), Rational(0), "x\ty", {}}}), Error);
}

TEST(Dataset, NamesMustBeUnique) {
  const auto s = test::random_stream("x", SampleFormat(SampleKind::int8), 1, 4, Rational(1), 1);
  EXPECT_THROW(Dataset({}, {s, s}, {}), Error);
  EXPECT_THROW(Dataset({}, {s}, {SparseTrack("x", {})}), Error);
}

TEST(ValidateUniform, ExactGrid) {
  const std::vector<double> t{0, 0.01, 0.02};
  const auto r = validate_uniform(t, Rational(100));
  EXPECT_TRUE(r.valid);
  EXPECT_TRUE(r.violations.empty());
}

TEST(ValidateUniform, LateSampleIsViolation) {
  const std::vector<double> t{0, 0.01, 0.05};
  const auto r = validate_uniform(t, Rational(100));
  EXPECT_FALSE(r.valid);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].index, 1u);
  EXPECT_NEAR(r.violations[0].delta_s, 0.04, 1e-12);
  EXPECT_NEAR(r.violations[0].limit_s, 0.01, 1e-15);
}

TEST(ValidateUniform, EarlySamplesAreAllowed) {
  const std::vector<double> t{0, 0.004, 0.009, 0.010};
  EXPECT_TRUE(validate_uniform(t, Rational(100)).valid);
}

TEST(ValidateUniform, NonMonotonicNamesIndex) {
  const std::vector<double> t{0, 0.01, 0.005, 0.02};
  try {
    validate_uniform(t, Rational(100));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::non_monotonic);
    EXPECT_EQ(e.location(), 2u);
  }
}

TEST(ValidateUniform, InferredRate) {
  const std::vector<double> t{0, 0.5, 1.0, 1.5};
  EXPECT_EQ(validate_uniform(t, Rational(1)).inferred_rate_hz, Rational(2));
  const std::vector<double> one{3.0};
  EXPECT_EQ(validate_uniform(one, Rational(7)).inferred_rate_hz, Rational(7));
}

TEST(ValidateUniform, SlackAbsorbsTextRounding) {
  // 3 Hz written with six decimals.
  std::vector<double> t;
  for (int i = 0; i < 30; ++i) t.push_back(std::round(i / 3.0 * 1e6) / 1e6);
  EXPECT_FALSE(validate_uniform(t, Rational(3)).valid);
  EXPECT_TRUE(validate_uniform(t, Rational(3), kDefaultTimeSlack).valid);
}

TEST(ValidateUniform, ReconstructedGridIsAlwaysValid) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Rational rate(1 + static_cast<std::int64_t>(rng() % 5000), 1 + static_cast<std::int64_t>(rng() % 7));
    const Rational start(static_cast<std::int64_t>(rng() % 100000), 1000);
    const auto s = test::random_stream("s", SampleFormat(SampleKind::int16), 1, 1 + rng() % 3000, rate, trial, start);
    const auto r = validate_uniform(grid_timestamps(s), rate);
    ASSERT_TRUE(r.valid) << rate.to_string() << " start " << start.to_string();
    ASSERT_EQ(r.valid, r.violations.empty());
  }
}

TEST(DatasetEqual, ReflexiveAndDetectsBitFlip) {
  const auto a = test::random_stream("a", SampleFormat(SampleKind::int16), 2, 500, Rational(50), 1);
  const Dataset d({{"k", "v"}}, {a}, {test::sample_annotations("t", 10, 1)});
  EXPECT_TRUE(dataset_equal(d, d).equal);

  std::vector<std::int32_t> v(a.int_samples().begin(), a.int_samples().end());
  v[123] ^= 1;
  const Dataset e({{"k", "v"}}, {UniformStream("a", a.rate_hz(), 2, a.format(), a.start_time_s(), v)},
                  {test::sample_annotations("t", 10, 1)});
  const Comparison c = dataset_equal(d, e);
  EXPECT_FALSE(c.equal);
  EXPECT_NE(c.difference.find("'a'"), std::string::npos) << c.difference;
  EXPECT_NE(c.difference.find("123"), std::string::npos) << c.difference;
}

TEST(DatasetEqual, FloatsCompareByBitPattern) {
  const float qnan = std::numeric_limits<float>::quiet_NaN();
  const float other_nan = std::bit_cast<float>(std::bit_cast<std::uint32_t>(qnan) | 1u);
  auto s = [](std::vector<float> v) {
    return UniformStream("f", Rational(1), 1, SampleFormat(SampleKind::float32), Rational(0), std::move(v));
  };
  EXPECT_TRUE(stream_equal(s({qnan, 1.0f}), s({qnan, 1.0f})).equal);
  EXPECT_FALSE(stream_equal(s({qnan}), s({other_nan})).equal);
  EXPECT_FALSE(stream_equal(s({0.0f}), s({-0.0f})).equal);
}

TEST(DatasetEqual, IsAnEquivalenceOnSamples) {
  std::vector<Dataset> corpus;
  for (std::uint32_t seed = 0; seed < 6; ++seed) {
    corpus.emplace_back(MetaMap{}, std::vector<UniformStream>{test::random_stream(
                                       "s", SampleFormat(SampleKind::int8), 1, 20, Rational(10), seed % 3)},
                        std::vector<SparseTrack>{});
  }
  for (const auto& a : corpus) {
    EXPECT_TRUE(dataset_equal(a, a).equal);
    for (const auto& b : corpus) {
      EXPECT_EQ(dataset_equal(a, b).equal, dataset_equal(b, a).equal);
      for (const auto& c : corpus) {
        if (dataset_equal(a, b).equal && dataset_equal(b, c).equal) EXPECT_TRUE(dataset_equal(a, c).equal);
      }
    }
  }
}

TEST(JitterReport, RenderListsViolations) {
  const std::vector<double> t{0, 0.01, 0.05, 0.06, 0.2};
  const std::string text = render(validate_uniform(t, Rational(100)));
  EXPECT_NE(text.find("valid: no"), std::string::npos);
  EXPECT_NE(text.find("i=1"), std::string::npos);
  EXPECT_NE(text.find("i=3"), std::string::npos);
}

}  // namespace
}  // namespace tsc
