#include "tsc/rice.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include "tsc/error.hpp"

namespace tsc::codec {
namespace {

constexpr std::int64_t unzigzag(std::uint64_t m) noexcept {
  return static_cast<std::int64_t>(m >> 1) ^ -static_cast<std::int64_t>(m & 1);
}

void shift_sums(std::span<const std::int32_t> r, kernels::ShiftSums& sums) {
  kernels::active().rice_shift_sums_i32(r, sums);
}
void shift_sums(std::span<const std::int64_t> r, kernels::ShiftSums& sums) {
  kernels::active().rice_shift_sums_i64(r, sums);
}

int max_partition_order(std::size_t block_size, int predictor_order, int limit) {
  for (int p = limit; p > 0; --p) {
    const std::size_t parts = std::size_t{1} << p;
    if (block_size % parts == 0 && (block_size >> p) > static_cast<std::size_t>(predictor_order)) return p;
  }
  return 0;
}

// Residual-index range of partition j at a level with partitions of length len.
std::pair<std::size_t, std::size_t> partition_range(std::size_t j, std::size_t len, int predictor_order) {
  const auto order = static_cast<std::size_t>(predictor_order);
  const std::size_t start = j == 0 ? 0 : j * len - order;
  const std::size_t end = (j + 1) * len - order;
  return {start, end};
}

}  // namespace

void rice_write(BitWriter& out, std::int64_t residual, int k, Unary unary) {
  const std::uint64_t m = kernels::zigzag64(residual);
  out.write_run(unary == Unary::ones_then_zero, m >> k);
  out.write_bits(m, k);
}

std::int64_t rice_read(BitReader& in, int k, Unary unary) {
  const std::size_t at = in.position();
  const std::uint64_t q = in.read_run(unary == Unary::ones_then_zero);
  if (q > (std::numeric_limits<std::uint64_t>::max() >> (k + 1))) {
    throw Error(Errc::malformed, "rice quotient out of range at bit " + std::to_string(at), at);
  }
  const std::uint64_t m = (q << k) | in.read_bits(k);
  return unzigzag(m);
}

BitString rice_encode(std::span<const std::int64_t> residuals, int k, Unary unary) {
  if (k < 0 || k > kMaxRiceParam) throw Error(Errc::invalid_argument, "rice parameter out of range");
  BitWriter w;
  for (std::int64_t r : residuals) rice_write(w, r, k, unary);
  BitString out;
  out.bits = w.bit_length();
  out.bytes = w.take();
  return out;
}

std::vector<std::int64_t> rice_decode(const BitString& bits, std::size_t count, int k, Unary unary) {
  if (k < 0 || k > kMaxRiceParam) throw Error(Errc::invalid_argument, "rice parameter out of range");
  BitReader in(bits.bytes, bits.bits);
  std::vector<std::int64_t> out;
  out.reserve(std::min<std::size_t>(count, bits.bits));
  for (std::size_t i = 0; i < count; ++i) out.push_back(rice_read(in, k, unary));
  return out;
}

int best_param(const kernels::ShiftSums& sums, std::size_t count, int max_param) {
  int best = 0;
  std::uint64_t best_cost = rice_cost(sums, count, 0);
  for (int k = 1; k <= max_param; ++k) {
    const std::uint64_t c = rice_cost(sums, count, k);
    if (c < best_cost) {
      best_cost = c;
      best = k;
    }
  }
  return best;
}

int choose_rice_k(std::span<const std::int64_t> residuals) {
  kernels::ShiftSums sums;
  shift_sums(residuals, sums);
  return best_param(sums, residuals.size());
}

int choose_rice_k(std::span<const std::int32_t> residuals) {
  kernels::ShiftSums sums;
  shift_sums(residuals, sums);
  return best_param(sums, residuals.size());
}

int signed_width(std::int64_t v) noexcept {
  if (v == 0) return 0;
  const std::uint64_t mag = v < 0 ? ~static_cast<std::uint64_t>(v) : static_cast<std::uint64_t>(v);
  return 65 - std::countl_zero(mag);
}

template <typename Residual>
ResidualPlan plan_residual(std::span<const Residual> residuals, std::size_t block_size, int predictor_order,
                           const ResidualFormat& format) {
  const int finest = max_partition_order(block_size, predictor_order, format.max_partition_order);
  std::size_t parts = std::size_t{1} << finest;
  std::size_t len = block_size >> finest;

  std::vector<kernels::ShiftSums> sums(parts);
  std::vector<int> widths(parts, 0);
  std::vector<std::size_t> counts(parts, 0);
  for (std::size_t j = 0; j < parts; ++j) {
    const auto [start, end] = partition_range(j, len, predictor_order);
    const auto slice = residuals.subspan(start, end - start);
    shift_sums(slice, sums[j]);
    int w = 0;
    for (Residual r : slice) w = std::max(w, signed_width(r));
    widths[j] = w;
    counts[j] = slice.size();
  }

  ResidualPlan best;
  best.bits = std::numeric_limits<std::uint64_t>::max();
  for (int p = finest;; --p) {
    for (int param_bits : {4, 5}) {
      const int max_param = param_bits == 4 ? 14 : kMaxRiceParam;
      ResidualPlan plan;
      plan.partition_order = p;
      plan.param_bits = param_bits;
      plan.escape_width_bits = format.escape_width_bits;
      plan.bits = 2 + 4;
      bool uses_wide_param = false;
      for (std::size_t j = 0; j < parts; ++j) {
        const int k = best_param(sums[j], counts[j], max_param);
        const std::uint64_t rice_bits = rice_cost(sums[j], counts[j], k);
        const std::uint64_t raw_bits =
            static_cast<std::uint64_t>(format.escape_width_bits) + counts[j] * static_cast<std::uint64_t>(widths[j]);
        const bool width_fits = widths[j] < (1 << format.escape_width_bits);
        if (width_fits && raw_bits < rice_bits) {
          plan.params.push_back(-1);
          plan.raw_widths.push_back(widths[j]);
          plan.bits += static_cast<std::uint64_t>(param_bits) + raw_bits;
        } else {
          plan.params.push_back(k);
          plan.raw_widths.push_back(0);
          plan.bits += static_cast<std::uint64_t>(param_bits) + rice_bits;
          uses_wide_param |= k > 14;
        }
      }
      if (param_bits == 5 || !uses_wide_param) {
        if (plan.bits < best.bits) best = std::move(plan);
      }
    }
    if (p == 0) break;
    // Merge sibling partitions into the next coarser level.
    parts /= 2;
    len *= 2;
    for (std::size_t j = 0; j < parts; ++j) {
      for (std::size_t k = 0; k < kernels::kRiceParams; ++k) sums[j][k] = sums[2 * j][k] + sums[2 * j + 1][k];
      widths[j] = std::max(widths[2 * j], widths[2 * j + 1]);
      counts[j] = counts[2 * j] + counts[2 * j + 1];
    }
    sums.resize(parts);
    widths.resize(parts);
    counts.resize(parts);
  }
  return best;
}

template <typename Residual>
void write_residual(BitWriter& out, std::span<const Residual> residuals, std::size_t block_size,
                    int predictor_order, const ResidualPlan& plan) {
  out.write_bits(plan.param_bits == 4 ? 0u : 1u, 2);
  out.write_bits(static_cast<std::uint64_t>(plan.partition_order), 4);
  const std::size_t parts = std::size_t{1} << plan.partition_order;
  const std::size_t len = block_size >> plan.partition_order;
  const std::uint64_t escape = (std::uint64_t{1} << plan.param_bits) - 1;
  for (std::size_t j = 0; j < parts; ++j) {
    const auto [start, end] = partition_range(j, len, predictor_order);
    const int k = plan.params[j];
    if (k < 0) {
      const int w = plan.raw_widths[j];
      out.write_bits(escape, plan.param_bits);
      out.write_bits(static_cast<std::uint64_t>(w), plan.escape_width_bits);
      for (std::size_t i = start; i < end; ++i) out.write_signed(residuals[i], w);
    } else {
      out.write_bits(static_cast<std::uint64_t>(k), plan.param_bits);
      for (std::size_t i = start; i < end; ++i) rice_write(out, residuals[i], k, Unary::zeros_then_one);
    }
  }
}

void read_residual(BitReader& in, std::size_t block_size, int predictor_order, const ResidualFormat& format,
                   std::vector<std::int64_t>& out) {
  const std::size_t at = in.position();
  const auto method = in.read_bits(2);
  if (method > 1) throw Error(Errc::unsupported, "reserved residual coding method at bit " + std::to_string(at), at);
  const int param_bits = method == 0 ? 4 : 5;
  const int p = static_cast<int>(in.read_bits(4));
  const std::size_t parts = std::size_t{1} << p;
  const std::size_t len = block_size >> p;
  if (block_size % parts != 0 || len < static_cast<std::size_t>(predictor_order) || (p > 0 && len == 0)) {
    throw Error(Errc::malformed, "invalid partition order " + std::to_string(p) + " at bit " + std::to_string(at), at);
  }
  const std::uint64_t escape = (std::uint64_t{1} << param_bits) - 1;
  out.clear();
  out.reserve(block_size - static_cast<std::size_t>(predictor_order));
  for (std::size_t j = 0; j < parts; ++j) {
    const auto [start, end] = partition_range(j, len, predictor_order);
    const std::uint64_t k = in.read_bits(param_bits);
    if (k == escape) {
      const int w = static_cast<int>(in.read_bits(format.escape_width_bits));
      for (std::size_t i = start; i < end; ++i) out.push_back(in.read_signed(w));
    } else {
      for (std::size_t i = start; i < end; ++i) out.push_back(rice_read(in, static_cast<int>(k), Unary::zeros_then_one));
    }
  }
}

template ResidualPlan plan_residual<std::int32_t>(std::span<const std::int32_t>, std::size_t, int, const ResidualFormat&);
template ResidualPlan plan_residual<std::int64_t>(std::span<const std::int64_t>, std::size_t, int, const ResidualFormat&);
template void write_residual<std::int32_t>(BitWriter&, std::span<const std::int32_t>, std::size_t, int, const ResidualPlan&);
template void write_residual<std::int64_t>(BitWriter&, std::span<const std::int64_t>, std::size_t, int, const ResidualPlan&);

}  // namespace tsc::codec
