// Compiled with -mavx2; only reached after a runtime CPU check.
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace tsc::kernels::detail {
namespace {

inline __m256i load8(const std::int32_t* p) { return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p)); }
inline __m256i load4_wide(const std::int32_t* p) {
  return _mm256_cvtepi32_epi64(_mm_loadu_si128(reinterpret_cast<const __m128i*>(p)));
}

inline std::uint64_t hsum_u64(__m256i v) {
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), v);
  return lanes[0] + lanes[1] + lanes[2] + lanes[3];
}

void fixed_residual_i32_avx2(std::span<const std::int32_t> x, int order, std::span<std::int32_t> out) {
  const std::size_t n = x.size();
  const std::size_t first = static_cast<std::size_t>(order);
  const std::int32_t* p = x.data();
  std::size_t i = first;
  const __m256i three = _mm256_set1_epi32(3);
  const __m256i four = _mm256_set1_epi32(4);
  const __m256i six = _mm256_set1_epi32(6);
  for (; i + 8 <= n; i += 8) {
    __m256i e;
    const __m256i x0 = load8(p + i);
    switch (order) {
      case 0: e = x0; break;
      case 1: e = _mm256_sub_epi32(x0, load8(p + i - 1)); break;
      case 2:
        e = _mm256_add_epi32(_mm256_sub_epi32(x0, _mm256_slli_epi32(load8(p + i - 1), 1)), load8(p + i - 2));
        break;
      case 3: {
        const __m256i d = _mm256_sub_epi32(load8(p + i - 2), load8(p + i - 1));
        e = _mm256_add_epi32(_mm256_sub_epi32(x0, load8(p + i - 3)), _mm256_mullo_epi32(d, three));
        break;
      }
      default: {
        const __m256i outer = _mm256_add_epi32(x0, load8(p + i - 4));
        const __m256i inner = _mm256_add_epi32(load8(p + i - 1), load8(p + i - 3));
        e = _mm256_add_epi32(_mm256_sub_epi32(outer, _mm256_mullo_epi32(inner, four)),
                             _mm256_mullo_epi32(load8(p + i - 2), six));
        break;
      }
    }
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out.data() + (i - first)), e);
  }
  if (i < n) {
    // Scalar tail over the remaining suffix, with its warm-up history.
    fixed_residual_i32_scalar(x.subspan(i - first), order, out.subspan(i - first));
  }
}

void fixed_residual_i64_avx2(std::span<const std::int32_t> x, int order, std::span<std::int64_t> out) {
  const std::size_t n = x.size();
  const std::size_t first = static_cast<std::size_t>(order);
  const std::int32_t* p = x.data();
  std::size_t i = first;
  for (; i + 4 <= n; i += 4) {
    __m256i e;
    const __m256i x0 = load4_wide(p + i);
    switch (order) {
      case 0: e = x0; break;
      case 1: e = _mm256_sub_epi64(x0, load4_wide(p + i - 1)); break;
      case 2:
        e = _mm256_add_epi64(_mm256_sub_epi64(x0, _mm256_slli_epi64(load4_wide(p + i - 1), 1)), load4_wide(p + i - 2));
        break;
      case 3: {
        const __m256i d = _mm256_sub_epi64(load4_wide(p + i - 2), load4_wide(p + i - 1));
        const __m256i d3 = _mm256_add_epi64(_mm256_slli_epi64(d, 1), d);
        e = _mm256_add_epi64(_mm256_sub_epi64(x0, load4_wide(p + i - 3)), d3);
        break;
      }
      default: {
        const __m256i outer = _mm256_add_epi64(x0, load4_wide(p + i - 4));
        const __m256i inner = _mm256_add_epi64(load4_wide(p + i - 1), load4_wide(p + i - 3));
        const __m256i mid = load4_wide(p + i - 2);
        const __m256i mid6 = _mm256_add_epi64(_mm256_slli_epi64(mid, 2), _mm256_slli_epi64(mid, 1));
        e = _mm256_add_epi64(_mm256_sub_epi64(outer, _mm256_slli_epi64(inner, 2)), mid6);
        break;
      }
    }
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out.data() + (i - first)), e);
  }
  if (i < n) fixed_residual_i64_scalar(x.subspan(i - first), order, out.subspan(i - first));
}

void rice_shift_sums_i32_avx2(std::span<const std::int32_t> r, ShiftSums& sums) {
  sums.fill(0);
  const std::size_t n = r.size();
  const std::size_t vec_end = n - n % 8;

  // Pass 1: maximum zigzag value bounds the number of non-zero sums.
  __m256i any = _mm256_setzero_si256();
  for (std::size_t i = 0; i < vec_end; i += 8) {
    const __m256i v = load8(r.data() + i);
    any = _mm256_or_si256(any, _mm256_xor_si256(_mm256_slli_epi32(v, 1), _mm256_srai_epi32(v, 31)));
  }
  alignas(32) std::uint32_t lanes[8];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), any);
  std::uint32_t all = 0;
  for (std::uint32_t l : lanes) all |= l;
  int k_end = 0;
  while (k_end < kRiceParams && (all >> k_end) != 0) ++k_end;

  for (int k = 0; k < k_end; ++k) {
    const __m128i count = _mm_cvtsi32_si128(k);
    __m256i acc = _mm256_setzero_si256();
    for (std::size_t i = 0; i < vec_end; i += 8) {
      const __m256i v = load8(r.data() + i);
      const __m256i z = _mm256_srl_epi32(_mm256_xor_si256(_mm256_slli_epi32(v, 1), _mm256_srai_epi32(v, 31)), count);
      acc = _mm256_add_epi64(acc, _mm256_cvtepu32_epi64(_mm256_castsi256_si128(z)));
      acc = _mm256_add_epi64(acc, _mm256_cvtepu32_epi64(_mm256_extracti128_si256(z, 1)));
    }
    sums[static_cast<std::size_t>(k)] = hsum_u64(acc);
  }
  if (vec_end < n) {
    ShiftSums tail;
    rice_shift_sums_i32_scalar(r.subspan(vec_end), tail);
    for (std::size_t k = 0; k < sums.size(); ++k) sums[k] += tail[k];
  }
}

void rice_shift_sums_i64_avx2(std::span<const std::int64_t> r, ShiftSums& sums) {
  sums.fill(0);
  const std::size_t n = r.size();
  const std::size_t vec_end = n - n % 4;
  const __m256i zero = _mm256_setzero_si256();
  auto zigzag = [&](const std::int64_t* p) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
    return _mm256_xor_si256(_mm256_slli_epi64(v, 1), _mm256_cmpgt_epi64(zero, v));
  };

  __m256i any = zero;
  for (std::size_t i = 0; i < vec_end; i += 4) any = _mm256_or_si256(any, zigzag(r.data() + i));
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), any);
  const std::uint64_t all = lanes[0] | lanes[1] | lanes[2] | lanes[3];
  int k_end = 0;
  while (k_end < kRiceParams && (all >> k_end) != 0) ++k_end;

  for (int k = 0; k < k_end; ++k) {
    const __m128i count = _mm_cvtsi32_si128(k);
    __m256i acc = zero;
    for (std::size_t i = 0; i < vec_end; i += 4) acc = _mm256_add_epi64(acc, _mm256_srl_epi64(zigzag(r.data() + i), count));
    sums[static_cast<std::size_t>(k)] = hsum_u64(acc);
  }
  if (vec_end < n) {
    ShiftSums tail;
    rice_shift_sums_i64_scalar(r.subspan(vec_end), tail);
    for (std::size_t k = 0; k < sums.size(); ++k) sums[k] += tail[k];
  }
}

std::uint32_t or_reduce_avx2(std::span<const std::int32_t> x) {
  const std::size_t n = x.size();
  const std::size_t vec_end = n - n % 8;
  __m256i acc = _mm256_setzero_si256();
  for (std::size_t i = 0; i < vec_end; i += 8) acc = _mm256_or_si256(acc, load8(x.data() + i));
  alignas(32) std::uint32_t lanes[8];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint32_t all = 0;
  for (std::uint32_t l : lanes) all |= l;
  return all | or_reduce_scalar(x.subspan(vec_end));
}

}  // namespace

const KernelTable kAvx2Table{
    "avx2",
    fixed_residual_i32_avx2,
    fixed_residual_i64_avx2,
    rice_shift_sums_i32_avx2,
    rice_shift_sums_i64_avx2,
    or_reduce_avx2,
};

}  // namespace tsc::kernels::detail
