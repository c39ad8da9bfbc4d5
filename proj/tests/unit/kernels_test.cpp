#include <gtest/gtest.h>

#include <random>

#include "tsc/kernels.hpp"

namespace tsc::kernels {
namespace {

std::vector<std::int32_t> random_values(std::mt19937& rng, std::size_t n, int bits) {
  std::vector<std::int32_t> v(n);
  for (auto& x : v) {
    const std::int64_t lo = -(std::int64_t{1} << (bits - 1));
    const std::uint64_t span = std::uint64_t{1} << bits;
    x = static_cast<std::int32_t>(lo + static_cast<std::int64_t>(((static_cast<std::uint64_t>(rng()) << 32) | rng()) % span));
  }
  return v;
}

class KernelEquivalence : public ::testing::TestWithParam<const KernelTable*> {};

TEST_P(KernelEquivalence, FixedResidualMatchesScalar) {
  const KernelTable& k = *GetParam();
  const KernelTable& ref = scalar();
  std::mt19937 rng(1);
  for (int bits : {8, 16, 24, 25, 32}) {
    for (std::size_t n : {0u, 1u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 33u, 64u, 100u, 1027u}) {
      const auto x = random_values(rng, n, bits);
      for (int order = 0; order <= 4; ++order) {
        if (n < static_cast<std::size_t>(order)) continue;
        const std::size_t m = n - static_cast<std::size_t>(order);
        if (bits <= 25) {
          std::vector<std::int32_t> a(m), b(m);
          ref.fixed_residual_i32(x, order, a);
          k.fixed_residual_i32(x, order, b);
          ASSERT_EQ(a, b) << k.name << " bits=" << bits << " n=" << n << " order=" << order;
        }
        std::vector<std::int64_t> a64(m), b64(m);
        ref.fixed_residual_i64(x, order, a64);
        k.fixed_residual_i64(x, order, b64);
        ASSERT_EQ(a64, b64) << k.name << " bits=" << bits << " n=" << n << " order=" << order;
      }
    }
  }
}

TEST_P(KernelEquivalence, ShiftSumsMatchScalar) {
  const KernelTable& k = *GetParam();
  std::mt19937 rng(2);
  for (int bits : {1, 4, 12, 24, 32}) {
    for (std::size_t n : {0u, 1u, 3u, 8u, 13u, 64u, 4096u}) {
      const auto r = random_values(rng, n, bits);
      ShiftSums a{}, b{};
      scalar().rice_shift_sums_i32(r, a);
      k.rice_shift_sums_i32(r, b);
      ASSERT_EQ(a, b) << k.name << " n=" << n;

      std::vector<std::int64_t> r64(r.begin(), r.end());
      for (auto& v : r64) v *= 3;  // beyond 32 bits
      scalar().rice_shift_sums_i64(r64, a);
      k.rice_shift_sums_i64(r64, b);
      ASSERT_EQ(a, b) << k.name << " n=" << n;
    }
  }
}

TEST_P(KernelEquivalence, OrReduceMatchesScalar) {
  const KernelTable& k = *GetParam();
  std::mt19937 rng(3);
  for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 31u, 1000u}) {
    auto x = random_values(rng, n, 16);
    for (auto& v : x) v &= ~0x7;  // three wasted bits
    ASSERT_EQ(scalar().or_reduce(x), k.or_reduce(x)) << k.name;
  }
}

TEST(Kernels, ScalarOracle) {
  // Residuals from the closed-form polynomial definitions.
  const std::vector<std::int32_t> x{3, -7, 12, 40, -2, 9, 9, 100};
  for (int order = 0; order <= 4; ++order) {
    std::vector<std::int64_t> out(x.size() - static_cast<std::size_t>(order));
    scalar().fixed_residual_i64(x, order, out);
    for (std::size_t j = 0; j < out.size(); ++j) {
      const std::size_t i = j + static_cast<std::size_t>(order);
      std::int64_t e = 0;
      switch (order) {
        case 0: e = x[i]; break;
        case 1: e = std::int64_t{x[i]} - x[i - 1]; break;
        case 2: e = std::int64_t{x[i]} - 2LL * x[i - 1] + x[i - 2]; break;
        case 3: e = std::int64_t{x[i]} - 3LL * x[i - 1] + 3LL * x[i - 2] - x[i - 3]; break;
        case 4: e = std::int64_t{x[i]} - 4LL * x[i - 1] + 6LL * x[i - 2] - 4LL * x[i - 3] + x[i - 4]; break;
      }
      EXPECT_EQ(out[j], e) << "order " << order << " j " << j;
    }
  }
  ShiftSums s{};
  const std::vector<std::int32_t> r{0, -1, 5};  // zigzag 0, 1, 10
  scalar().rice_shift_sums_i32(r, s);
  EXPECT_EQ(s[0], 11u);
  EXPECT_EQ(s[1], 5u);
  EXPECT_EQ(s[3], 1u);
  EXPECT_EQ(s[4], 0u);
}

TEST(Kernels, ActiveIsAvailable) {
  const auto all = available();
  ASSERT_FALSE(all.empty());
  EXPECT_EQ(all.front(), &scalar());
  EXPECT_NE(std::find(all.begin(), all.end(), &active()), all.end());
}

INSTANTIATE_TEST_SUITE_P(Available, KernelEquivalence, ::testing::ValuesIn(available()),
                         [](const auto& info) { return std::string(info.param->name); });

}  // namespace
}  // namespace tsc::kernels
