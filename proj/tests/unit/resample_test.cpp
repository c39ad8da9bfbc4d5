#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "tsc/error.hpp"
#include "tsc/resample.hpp"
#include "tsc/validate.hpp"

namespace tsc {
namespace {

std::vector<float> floats_of(const UniformStream& s) { return {s.float_samples().begin(), s.float_samples().end()}; }

ResampleStrategy strategy(Interpolation k) {
  ResampleStrategy s;
  s.kind = k;
  return s;
}

TimecodedSeries two_points() { return TimecodedSeries{"s", {0.0, 1.0}, 1, {0.0, 10.0}}; }

TEST(Resample, LinearExample) {
  ResampleStrategy st = strategy(Interpolation::linear);
  st.gap_threshold_s = Rational(2);
  const auto out = resample(two_points(), Rational(4), st);
  EXPECT_EQ(floats_of(out), (std::vector<float>{0, 2.5f, 5, 7.5f, 10}));
  EXPECT_EQ(out.rate_hz(), Rational(4));
}

TEST(Resample, HoldExample) {
  ResampleStrategy st = strategy(Interpolation::hold);
  st.gap_threshold_s = Rational(2);
  EXPECT_EQ(floats_of(resample(two_points(), Rational(4), st)), (std::vector<float>{0, 0, 0, 0, 10}));
}

TEST(Resample, NearestTiesGoEarlier) {
  const TimecodedSeries s{"s", {0.0, 0.5, 1.0}, 1, {1, 2, 3}};
  const auto out = resample(s, Rational(4), strategy(Interpolation::nearest));
  EXPECT_EQ(floats_of(out), (std::vector<float>{1, 1, 2, 2, 3}));
}

TEST(Resample, GridStartsAtCeil) {
  const TimecodedSeries s{"s", {0.3, 1.0}, 1, {3, 10}};
  ResampleStrategy st = strategy(Interpolation::linear);
  st.gap_threshold_s = Rational(5);
  const auto out = resample(s, Rational(2), st);
  EXPECT_EQ(out.start_time_s(), Rational(1, 2));
  EXPECT_EQ(out.frame_count(), 2u);
  EXPECT_NEAR(out.float_samples()[0], 5.0f, 1e-6);
}

TEST(Resample, GapPolicies) {
  const TimecodedSeries s{"s", {0.0, 0.1, 0.2, 1.0, 1.1}, 1, {1, 2, 3, 9, 10}};
  ResampleStrategy st = strategy(Interpolation::linear);
  st.gap_policy = GapPolicy::error;
  try {
    resample(s, Rational(10), st);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::gap_exceeded);
    EXPECT_NE(std::string(e.what()).find("0.2"), std::string::npos) << e.what();
  }
  st.gap_policy = GapPolicy::fill_hold;
  const auto held = floats_of(resample(s, Rational(10), st));
  ASSERT_EQ(held.size(), 12u);
  for (int i = 3; i < 10; ++i) EXPECT_EQ(held[static_cast<std::size_t>(i)], 3.0f) << i;
  st.gap_policy = GapPolicy::fill_nan;
  const auto nan = floats_of(resample(s, Rational(10), st));
  for (int i = 3; i < 10; ++i) EXPECT_TRUE(std::isnan(nan[static_cast<std::size_t>(i)])) << i;
  EXPECT_EQ(nan[10], 9.0f);
  StreamTarget t;
  t.format = SampleFormat(SampleKind::int16);
  EXPECT_THROW(resample(s, Rational(10), st, t), Error);
}

TEST(Resample, DefaultGapToleratesOneMissingSample) {
  const TimecodedSeries one_missing{"s", {0.0, 0.1, 0.3, 0.4}, 1, {1, 2, 3, 4}};
  ResampleStrategy st = strategy(Interpolation::linear);
  st.gap_policy = GapPolicy::error;
  EXPECT_NO_THROW(resample(one_missing, Rational(10), st));
  const TimecodedSeries two_missing{"s", {0.0, 0.1, 0.4, 0.5}, 1, {1, 2, 3, 4}};
  EXPECT_THROW(resample(two_missing, Rational(10), st), Error);
}

TEST(Resample, StrategyParse) {
  const auto s = ResampleStrategy::parse("nearest:fill_nan:0.5");
  EXPECT_EQ(s.kind, Interpolation::nearest);
  EXPECT_EQ(s.gap_policy, GapPolicy::fill_nan);
  EXPECT_EQ(s.gap_threshold_s, Rational(1, 2));
  EXPECT_EQ(ResampleStrategy::parse("hold").kind, Interpolation::hold);
  EXPECT_THROW(ResampleStrategy::parse("cubic"), Error);
  EXPECT_THROW(ResampleStrategy::parse("linear:sometimes"), Error);
}

TEST(Resample, Errors) {
  EXPECT_THROW(resample(TimecodedSeries{"s", {}, 1, {}}, Rational(1), ResampleStrategy{}), Error);
  EXPECT_THROW(resample(TimecodedSeries{"s", {1.0, 0.5}, 1, {1, 2}}, Rational(1), ResampleStrategy{}), Error);
}

TEST(Resample, AffineSignalIsReproduced) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> coef(-50, 50);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = coef(rng), b = coef(rng);
    TimecodedSeries s{"s", {}, 1, {}};
    double t = 0;
    for (int i = 0; i < 400; ++i) {
      t += 0.005 + 0.01 * (rng() % 100) / 100.0;
      s.timestamps.push_back(t);
      s.values.push_back(a * t + b);
    }
    ResampleStrategy st = strategy(Interpolation::linear);
    st.gap_threshold_s = Rational(1);
    const Rational rate(37 + trial);
    const auto out = resample(s, rate, st);
    for (std::size_t i = 0; i < out.frame_count(); ++i) {
      const double ti = out.time_of(i).to_double();
      const double want = a * ti + b;
      ASSERT_LE(std::abs(out.float_samples()[i] - want), 1e-6 * std::max(1.0, std::abs(want))) << trial << " " << i;
    }
  }
}

TEST(Resample, OutputIsAlwaysOnGrid) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    TimecodedSeries s{"s", {}, 2, {}};
    double t = (rng() % 1000) / 1000.0;
    const int n = 2 + static_cast<int>(rng() % 200);
    for (int i = 0; i < n; ++i) {
      t += (rng() % 500) / 1000.0;
      s.timestamps.push_back(t);
      s.values.push_back(static_cast<double>(rng() % 100));
      s.values.push_back(static_cast<double>(rng() % 100));
    }
    const auto kind = static_cast<Interpolation>(trial % 3);
    const Rational rate(1 + static_cast<std::int64_t>(rng() % 200), 1 + static_cast<std::int64_t>(rng() % 3));
    UniformStream out = resample(s, rate, strategy(kind));
    ASSERT_TRUE(validate_uniform(grid_timestamps(out), rate).valid);
    ASSERT_GE(out.time_of(0).to_double(), s.timestamps.front() - 1e-12);
  }
}

TEST(Resample, OwnRateIsIdentity) {
  const auto s = test::random_stream("s", SampleFormat(SampleKind::float32), 2, 1000, Rational(100, 3), 1);
  for (auto k : {Interpolation::hold, Interpolation::nearest, Interpolation::linear}) {
    EXPECT_TRUE(stream_equal(s, resample(s, Rational(100, 3), strategy(k))).equal);
  }
  const auto i = test::random_stream("i", SampleFormat(SampleKind::int24), 1, 100, Rational(7), 2);
  EXPECT_TRUE(stream_equal(i, resample(i, Rational(7), strategy(Interpolation::linear))).equal);
}

TEST(Resample, IntegerUpsampleStaysInRange) {
  const auto s = test::random_stream("i", SampleFormat(SampleKind::int8), 1, 200, Rational(10), 3);
  const auto up = resample(s, Rational(30), strategy(Interpolation::linear));
  EXPECT_EQ(up.format(), s.format());
  EXPECT_EQ(up.frame_count(), 598u);
  EXPECT_EQ(up.int_samples()[3], s.int_samples()[1]);
}

TEST(Align, LowAndHighRate) {
  const auto gps = test::random_stream("gps", SampleFormat(SampleKind::float32), 2, 30, Rational(3), 1);
  const auto acc = test::random_stream("acc", SampleFormat(SampleKind::int16), 3, 1000, Rational(100), 2);
  const auto out = align({gps, acc});
  ASSERT_EQ(out.size(), 2u);
  for (const auto& s : out) {
    EXPECT_EQ(s.rate_hz(), Rational(100));
    EXPECT_EQ(s.start_time_s(), out[0].start_time_s());
    EXPECT_EQ(s.frame_count(), out[0].frame_count());
  }
  EXPECT_EQ(out[0].name(), "gps");
  EXPECT_EQ(out[0].channels(), 2);
  EXPECT_EQ(out[1].format(), acc.format());
  // 30 samples at 3 Hz span [0, 29/3].
  EXPECT_EQ(out[0].frame_count(), 967u);
  for (std::size_t i = 0; i < out[1].frame_count() * 3; ++i) ASSERT_EQ(out[1].int_samples()[i], acc.int_samples()[i]);
}

TEST(Align, IdentityAndSymmetry) {
  const auto a = test::random_stream("a", SampleFormat(SampleKind::float32), 1, 500, Rational(50), 5);
  const auto one = align({a});
  EXPECT_TRUE(stream_equal(one[0], a).equal);
  auto b = UniformStream("b", a.rate_hz(), 1, a.format(), a.start_time_s(),
                         std::vector<float>(a.float_samples().begin(), a.float_samples().end()));
  const auto two = align({a, b});
  EXPECT_EQ(floats_of(two[0]), floats_of(two[1]));
}

TEST(Align, OffsetStartsAndExplicitRate) {
  const auto a = test::random_stream("a", SampleFormat(SampleKind::float32), 1, 100, Rational(10), 1, Rational(1));
  const auto b = test::random_stream("b", SampleFormat(SampleKind::float32), 1, 100, Rational(10), 2, Rational(3, 2));
  const auto out = align({a, b}, Rational(20));
  EXPECT_EQ(out[0].start_time_s(), Rational(3, 2));
  EXPECT_EQ(out[0].rate_hz(), Rational(20));
  EXPECT_EQ(out[0].frame_count(), out[1].frame_count());
  EXPECT_LE(out[0].time_of(out[0].frame_count() - 1), Rational(109, 10));
  const auto late = test::random_stream("c", SampleFormat(SampleKind::float32), 1, 10, Rational(10), 3, Rational(100));
  EXPECT_THROW(align({a, late}), Error);
}

}  // namespace
}  // namespace tsc
