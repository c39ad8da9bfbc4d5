#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace tsc::kernels {
namespace {

const KernelTable kScalarTable{
    "scalar",
    detail::fixed_residual_i32_scalar,
    detail::fixed_residual_i64_scalar,
    detail::rice_shift_sums_i32_scalar,
    detail::rice_shift_sums_i64_scalar,
    detail::or_reduce_scalar,
};

const KernelTable& choose() {
  if (const char* forced = std::getenv("TSC_KERNELS"); forced != nullptr && std::string_view(forced) == "scalar") {
    return kScalarTable;
  }
  if (const KernelTable* t = avx2()) return *t;
  if (const KernelTable* t = neon()) return *t;
  return kScalarTable;
}

}  // namespace

const KernelTable& scalar() { return kScalarTable; }

const KernelTable* avx2() {
#if defined(TSC_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &detail::kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon() {
#if defined(TSC_HAVE_NEON)
  return &detail::kNeonTable;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = choose();
  return table;
}

std::vector<const KernelTable*> available() {
  std::vector<const KernelTable*> out{&kScalarTable};
  if (const KernelTable* t = avx2()) out.push_back(t);
  if (const KernelTable* t = neon()) out.push_back(t);
  return out;
}

}  // namespace tsc::kernels
