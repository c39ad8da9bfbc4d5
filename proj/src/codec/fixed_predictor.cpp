#include "tsc/fixed_predictor.hpp"

#include "tsc/error.hpp"
#include "tsc/kernels.hpp"

namespace tsc::codec {

FixedPrediction fixed_predict(std::span<const std::int32_t> samples, int order) {
  if (order < 0 || order > kMaxFixedOrder) throw Error(Errc::invalid_argument, "fixed predictor order must be 0..4");
  if (samples.size() < static_cast<std::size_t>(order)) {
    throw Error(Errc::invalid_argument, "fewer samples than predictor order");
  }
  FixedPrediction out;
  out.warmup.assign(samples.begin(), samples.begin() + order);
  out.residuals.resize(samples.size() - static_cast<std::size_t>(order));
  kernels::active().fixed_residual_i64(samples, order, out.residuals);
  return out;
}

void fixed_restore(std::span<std::int64_t> s, int order) noexcept {
  const std::size_t n = s.size();
  switch (order) {
    case 0: break;
    case 1:
      for (std::size_t i = 1; i < n; ++i) s[i] += s[i - 1];
      break;
    case 2:
      for (std::size_t i = 2; i < n; ++i) s[i] += 2 * s[i - 1] - s[i - 2];
      break;
    case 3:
      for (std::size_t i = 3; i < n; ++i) s[i] += 3 * s[i - 1] - 3 * s[i - 2] + s[i - 3];
      break;
    default:
      for (std::size_t i = 4; i < n; ++i) s[i] += 4 * s[i - 1] - 6 * s[i - 2] + 4 * s[i - 3] - s[i - 4];
      break;
  }
}

std::vector<std::int64_t> fixed_unpredict(std::span<const std::int32_t> warmup, std::span<const std::int64_t> residuals,
                                          int order) {
  if (order < 0 || order > kMaxFixedOrder || warmup.size() != static_cast<std::size_t>(order)) {
    throw Error(Errc::invalid_argument, "warm-up length must equal predictor order 0..4");
  }
  std::vector<std::int64_t> signal;
  signal.reserve(warmup.size() + residuals.size());
  signal.insert(signal.end(), warmup.begin(), warmup.end());
  signal.insert(signal.end(), residuals.begin(), residuals.end());
  fixed_restore(signal, order);
  return signal;
}

}  // namespace tsc::codec
