// AArch64 only; NEON is part of the base ISA there, so no runtime check.
#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace tsc::kernels::detail {
namespace {

inline int64x2_t widen_lo(const std::int32_t* p) { return vmovl_s32(vld1_s32(p)); }

void fixed_residual_i32_neon(std::span<const std::int32_t> x, int order, std::span<std::int32_t> out) {
  const std::size_t n = x.size();
  const std::size_t first = static_cast<std::size_t>(order);
  const std::int32_t* p = x.data();
  std::size_t i = first;
  for (; i + 4 <= n; i += 4) {
    int32x4_t e;
    const int32x4_t x0 = vld1q_s32(p + i);
    switch (order) {
      case 0: e = x0; break;
      case 1: e = vsubq_s32(x0, vld1q_s32(p + i - 1)); break;
      case 2: e = vaddq_s32(vsubq_s32(x0, vshlq_n_s32(vld1q_s32(p + i - 1), 1)), vld1q_s32(p + i - 2)); break;
      case 3: {
        const int32x4_t d = vsubq_s32(vld1q_s32(p + i - 2), vld1q_s32(p + i - 1));
        e = vmlaq_n_s32(vsubq_s32(x0, vld1q_s32(p + i - 3)), d, 3);
        break;
      }
      default: {
        const int32x4_t outer = vaddq_s32(x0, vld1q_s32(p + i - 4));
        const int32x4_t inner = vaddq_s32(vld1q_s32(p + i - 1), vld1q_s32(p + i - 3));
        e = vmlaq_n_s32(vmlsq_n_s32(outer, inner, 4), vld1q_s32(p + i - 2), 6);
        break;
      }
    }
    vst1q_s32(out.data() + (i - first), e);
  }
  if (i < n) fixed_residual_i32_scalar(x.subspan(i - first), order, out.subspan(i - first));
}

void fixed_residual_i64_neon(std::span<const std::int32_t> x, int order, std::span<std::int64_t> out) {
  const std::size_t n = x.size();
  const std::size_t first = static_cast<std::size_t>(order);
  const std::int32_t* p = x.data();
  std::size_t i = first;
  for (; i + 2 <= n; i += 2) {
    int64x2_t e;
    const int64x2_t x0 = widen_lo(p + i);
    switch (order) {
      case 0: e = x0; break;
      case 1: e = vsubq_s64(x0, widen_lo(p + i - 1)); break;
      case 2: e = vaddq_s64(vsubq_s64(x0, vshlq_n_s64(widen_lo(p + i - 1), 1)), widen_lo(p + i - 2)); break;
      case 3: {
        const int64x2_t d = vsubq_s64(widen_lo(p + i - 2), widen_lo(p + i - 1));
        e = vaddq_s64(vsubq_s64(x0, widen_lo(p + i - 3)), vaddq_s64(vshlq_n_s64(d, 1), d));
        break;
      }
      default: {
        const int64x2_t outer = vaddq_s64(x0, widen_lo(p + i - 4));
        const int64x2_t inner = vaddq_s64(widen_lo(p + i - 1), widen_lo(p + i - 3));
        const int64x2_t mid = widen_lo(p + i - 2);
        const int64x2_t mid6 = vaddq_s64(vshlq_n_s64(mid, 2), vshlq_n_s64(mid, 1));
        e = vaddq_s64(vsubq_s64(outer, vshlq_n_s64(inner, 2)), mid6);
        break;
      }
    }
    vst1q_s64(out.data() + (i - first), e);
  }
  if (i < n) fixed_residual_i64_scalar(x.subspan(i - first), order, out.subspan(i - first));
}

inline uint32x4_t zigzag_s32(int32x4_t v) {
  return veorq_u32(vreinterpretq_u32_s32(vshlq_n_s32(v, 1)), vreinterpretq_u32_s32(vshrq_n_s32(v, 31)));
}

inline uint64x2_t zigzag_s64(int64x2_t v) {
  return veorq_u64(vreinterpretq_u64_s64(vshlq_n_s64(v, 1)), vreinterpretq_u64_s64(vshrq_n_s64(v, 63)));
}

void rice_shift_sums_i32_neon(std::span<const std::int32_t> r, ShiftSums& sums) {
  sums.fill(0);
  const std::size_t n = r.size();
  const std::size_t vec_end = n - n % 4;
  uint32x4_t any = vdupq_n_u32(0);
  for (std::size_t i = 0; i < vec_end; i += 4) any = vorrq_u32(any, zigzag_s32(vld1q_s32(r.data() + i)));
  const std::uint32_t all = vgetq_lane_u32(any, 0) | vgetq_lane_u32(any, 1) | vgetq_lane_u32(any, 2) | vgetq_lane_u32(any, 3);
  int k_end = 0;
  while (k_end < kRiceParams && (all >> k_end) != 0) ++k_end;
  for (int k = 0; k < k_end; ++k) {
    const int32x4_t shift = vdupq_n_s32(-k);
    uint64x2_t acc = vdupq_n_u64(0);
    for (std::size_t i = 0; i < vec_end; i += 4) {
      acc = vpadalq_u32(acc, vshlq_u32(zigzag_s32(vld1q_s32(r.data() + i)), shift));
    }
    sums[static_cast<std::size_t>(k)] = vgetq_lane_u64(acc, 0) + vgetq_lane_u64(acc, 1);
  }
  if (vec_end < n) {
    ShiftSums tail;
    rice_shift_sums_i32_scalar(r.subspan(vec_end), tail);
    for (std::size_t k = 0; k < sums.size(); ++k) sums[k] += tail[k];
  }
}

void rice_shift_sums_i64_neon(std::span<const std::int64_t> r, ShiftSums& sums) {
  sums.fill(0);
  const std::size_t n = r.size();
  const std::size_t vec_end = n - n % 2;
  uint64x2_t any = vdupq_n_u64(0);
  for (std::size_t i = 0; i < vec_end; i += 2) any = vorrq_u64(any, zigzag_s64(vld1q_s64(r.data() + i)));
  const std::uint64_t all = vgetq_lane_u64(any, 0) | vgetq_lane_u64(any, 1);
  int k_end = 0;
  while (k_end < kRiceParams && (all >> k_end) != 0) ++k_end;
  for (int k = 0; k < k_end; ++k) {
    const int64x2_t shift = vdupq_n_s64(-k);
    uint64x2_t acc = vdupq_n_u64(0);
    for (std::size_t i = 0; i < vec_end; i += 2) {
      acc = vaddq_u64(acc, vshlq_u64(zigzag_s64(vld1q_s64(r.data() + i)), shift));
    }
    sums[static_cast<std::size_t>(k)] = vgetq_lane_u64(acc, 0) + vgetq_lane_u64(acc, 1);
  }
  if (vec_end < n) {
    ShiftSums tail;
    rice_shift_sums_i64_scalar(r.subspan(vec_end), tail);
    for (std::size_t k = 0; k < sums.size(); ++k) sums[k] += tail[k];
  }
}

std::uint32_t or_reduce_neon(std::span<const std::int32_t> x) {
  const std::size_t n = x.size();
  const std::size_t vec_end = n - n % 4;
  uint32x4_t acc = vdupq_n_u32(0);
  for (std::size_t i = 0; i < vec_end; i += 4) acc = vorrq_u32(acc, vreinterpretq_u32_s32(vld1q_s32(x.data() + i)));
  const std::uint32_t all = vgetq_lane_u32(acc, 0) | vgetq_lane_u32(acc, 1) | vgetq_lane_u32(acc, 2) | vgetq_lane_u32(acc, 3);
  return all | or_reduce_scalar(x.subspan(vec_end));
}

}  // namespace

const KernelTable kNeonTable{
    "neon",
    fixed_residual_i32_neon,
    fixed_residual_i64_neon,
    rice_shift_sums_i32_neon,
    rice_shift_sums_i64_neon,
    or_reduce_neon,
};

}  // namespace tsc::kernels::detail
