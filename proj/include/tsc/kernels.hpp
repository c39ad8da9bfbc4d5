#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

// Data-parallel inner loops of the codecs. Each variant must produce results
// identical to the scalar reference for every input; tests/unit/test_kernels
// checks that for every variant the running CPU supports.

namespace tsc::kernels {

/// Rice parameters 0..30 are representable; sums are kept for each.
inline constexpr int kRiceParams = 31;
using ShiftSums = std::array<std::uint64_t, kRiceParams>;

struct KernelTable {
  const char* name;

  /// out[j] = fixed-predictor residual of x[j + order], order 0..4.
  /// out.size() must equal x.size() - order. Arithmetic wraps modulo 2^32;
  /// inputs within 25 bits never wrap.
  void (*fixed_residual_i32)(std::span<const std::int32_t> x, int order, std::span<std::int32_t> out);

  /// Same predictor evaluated exactly in 64 bits (full-range 32-bit inputs).
  void (*fixed_residual_i64)(std::span<const std::int32_t> x, int order, std::span<std::int64_t> out);

  /// sums[k] = sum over r of (zigzag(r) >> k), k in [0, kRiceParams).
  void (*rice_shift_sums_i32)(std::span<const std::int32_t> r, ShiftSums& sums);
  void (*rice_shift_sums_i64)(std::span<const std::int64_t> r, ShiftSums& sums);

  /// Bitwise OR of all values (wasted-bits detection).
  std::uint32_t (*or_reduce)(std::span<const std::int32_t> x);
};

const KernelTable& scalar();
/// nullptr when not compiled in or not supported by this CPU.
const KernelTable* avx2();
const KernelTable* neon();

/// Best supported table, chosen once. TSC_KERNELS=scalar forces the reference.
const KernelTable& active();

/// Every table usable on this machine, scalar first.
std::vector<const KernelTable*> available();

inline constexpr std::uint32_t zigzag32(std::int32_t v) noexcept {
  return (static_cast<std::uint32_t>(v) << 1) ^ static_cast<std::uint32_t>(v >> 31);
}

inline constexpr std::uint64_t zigzag64(std::int64_t v) noexcept {
  return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

}  // namespace tsc::kernels
