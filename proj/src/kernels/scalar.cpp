#include <bit>

#include "kernels_impl.hpp"

namespace tsc::kernels::detail {

void fixed_residual_i32_scalar(std::span<const std::int32_t> x, int order, std::span<std::int32_t> out) {
  const std::size_t n = x.size();
  auto u = [&](std::size_t i) { return static_cast<std::uint32_t>(x[i]); };
  for (std::size_t i = static_cast<std::size_t>(order); i < n; ++i) {
    std::uint32_t e = 0;
    switch (order) {
      case 0: e = u(i); break;
      case 1: e = u(i) - u(i - 1); break;
      case 2: e = u(i) - 2u * u(i - 1) + u(i - 2); break;
      case 3: e = u(i) - 3u * u(i - 1) + 3u * u(i - 2) - u(i - 3); break;
      default: e = u(i) - 4u * u(i - 1) + 6u * u(i - 2) - 4u * u(i - 3) + u(i - 4); break;
    }
    out[i - static_cast<std::size_t>(order)] = static_cast<std::int32_t>(e);
  }
}

void fixed_residual_i64_scalar(std::span<const std::int32_t> x, int order, std::span<std::int64_t> out) {
  const std::size_t n = x.size();
  auto v = [&](std::size_t i) { return static_cast<std::int64_t>(x[i]); };
  for (std::size_t i = static_cast<std::size_t>(order); i < n; ++i) {
    std::int64_t e = 0;
    switch (order) {
      case 0: e = v(i); break;
      case 1: e = v(i) - v(i - 1); break;
      case 2: e = v(i) - 2 * v(i - 1) + v(i - 2); break;
      case 3: e = v(i) - 3 * v(i - 1) + 3 * v(i - 2) - v(i - 3); break;
      default: e = v(i) - 4 * v(i - 1) + 6 * v(i - 2) - 4 * v(i - 3) + v(i - 4); break;
    }
    out[i - static_cast<std::size_t>(order)] = e;
  }
}

void rice_shift_sums_i32_scalar(std::span<const std::int32_t> r, ShiftSums& sums) {
  sums.fill(0);
  for (std::int32_t v : r) {
    std::uint64_t z = zigzag32(v);
    for (int k = 0; k < kRiceParams && z != 0; ++k, z >>= 1) sums[static_cast<std::size_t>(k)] += z;
  }
}

void rice_shift_sums_i64_scalar(std::span<const std::int64_t> r, ShiftSums& sums) {
  sums.fill(0);
  for (std::int64_t v : r) {
    std::uint64_t z = zigzag64(v);
    for (int k = 0; k < kRiceParams && z != 0; ++k, z >>= 1) sums[static_cast<std::size_t>(k)] += z;
  }
}

std::uint32_t or_reduce_scalar(std::span<const std::int32_t> x) {
  std::uint32_t acc = 0;
  for (std::int32_t v : x) acc |= static_cast<std::uint32_t>(v);
  return acc;
}

}  // namespace tsc::kernels::detail
