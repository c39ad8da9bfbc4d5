#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tsc::codec {

inline constexpr int kMaxFixedOrder = 4;

struct FixedPrediction {
  std::vector<std::int32_t> warmup;     // first `order` samples, verbatim
  std::vector<std::int64_t> residuals;  // one per remaining sample
};

/// Polynomial predictor residuals: order 1 is the first difference, order 2
/// the second, and so on up to 4. Requires samples.size() >= order.
FixedPrediction fixed_predict(std::span<const std::int32_t> samples, int order);

/// Inverse of fixed_predict, computed in 64-bit.
std::vector<std::int64_t> fixed_unpredict(std::span<const std::int32_t> warmup, std::span<const std::int64_t> residuals,
                                          int order);

/// In-place restoration: signal[0..order) holds warm-up, signal[order..) holds
/// residuals on entry and reconstructed samples on return.
void fixed_restore(std::span<std::int64_t> signal, int order) noexcept;

}  // namespace tsc::codec
