#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tsc/bitstream.hpp"
#include "tsc/kernels.hpp"

namespace tsc::codec {

inline constexpr int kMaxRiceParam = 30;

/// Unary quotient convention. The standalone coder defaults to a run of ones
/// closed by a zero; the FLAC bitstream uses a run of zeros closed by a one.
enum class Unary { ones_then_zero, zeros_then_one };

struct BitString {
  std::vector<std::uint8_t> bytes;
  std::size_t bits = 0;

  std::string to_string() const { return to_bit_string(bytes, bits); }
};

void rice_write(BitWriter& out, std::int64_t residual, int k, Unary unary);
std::int64_t rice_read(BitReader& in, int k, Unary unary);

BitString rice_encode(std::span<const std::int64_t> residuals, int k, Unary unary = Unary::ones_then_zero);
/// Throws Errc::truncated with the bit offset when the bits run out.
std::vector<std::int64_t> rice_decode(const BitString& bits, std::size_t count, int k,
                                      Unary unary = Unary::ones_then_zero);

/// Exact encoded size from precomputed shift sums.
inline std::uint64_t rice_cost(const kernels::ShiftSums& sums, std::size_t count, int k) noexcept {
  return static_cast<std::uint64_t>(count) * static_cast<std::uint64_t>(k + 1) + sums[static_cast<std::size_t>(k)];
}

/// k in [0, 30] with the smallest exact encoded length; smallest k on ties.
int choose_rice_k(std::span<const std::int64_t> residuals);
int choose_rice_k(std::span<const std::int32_t> residuals);
int best_param(const kernels::ShiftSums& sums, std::size_t count, int max_param = kMaxRiceParam);

/// Layout knobs of the partitioned residual section (FLAC's residual coding
/// method 0/1, generalized to a wider escape field for 32-bit data).
struct ResidualFormat {
  int escape_width_bits = 5;
  int max_partition_order = 8;
};

/// Encoder decision for one residual block.
struct ResidualPlan {
  int partition_order = 0;
  int param_bits = 4;       // 4 (method 0) or 5 (method 1)
  std::vector<int> params;  // per partition; -1 = escaped, raw width in raw_widths
  std::vector<int> raw_widths;
  int escape_width_bits = 5;
  std::uint64_t bits = 0;   // exact size of the whole residual section
};

/// Signed width of v: 0 for v == 0, else the smallest w with v in [-2^(w-1), 2^(w-1)).
int signed_width(std::int64_t v) noexcept;

template <typename Residual>
ResidualPlan plan_residual(std::span<const Residual> residuals, std::size_t block_size, int predictor_order,
                           const ResidualFormat& format);

template <typename Residual>
void write_residual(BitWriter& out, std::span<const Residual> residuals, std::size_t block_size,
                    int predictor_order, const ResidualPlan& plan);

/// Decodes block_size - predictor_order residuals into `out`.
void read_residual(BitReader& in, std::size_t block_size, int predictor_order, const ResidualFormat& format,
                   std::vector<std::int64_t>& out);

}  // namespace tsc::codec
