#pragma once

#include "tsc/kernels.hpp"

namespace tsc::kernels::detail {

void fixed_residual_i32_scalar(std::span<const std::int32_t> x, int order, std::span<std::int32_t> out);
void fixed_residual_i64_scalar(std::span<const std::int32_t> x, int order, std::span<std::int64_t> out);
void rice_shift_sums_i32_scalar(std::span<const std::int32_t> r, ShiftSums& sums);
void rice_shift_sums_i64_scalar(std::span<const std::int64_t> r, ShiftSums& sums);
std::uint32_t or_reduce_scalar(std::span<const std::int32_t> x);

#if defined(TSC_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
#if defined(TSC_HAVE_NEON)
extern const KernelTable kNeonTable;
#endif

}  // namespace tsc::kernels::detail
