#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tsc {

enum class Errc {
  invalid_argument,
  io,
  // text inputs
  empty_input,
  ragged_row,
  non_numeric,
  bad_timestamp,
  missing_format,
  non_monotonic,
  gap_exceeded,
  // binary inputs
  truncated,
  bad_magic,
  header_crc,
  frame_crc,
  md5_mismatch,
  crc32_mismatch,
  unknown_size,
  unsupported,
  malformed,
};

std::string_view errc_name(Errc code) noexcept;

/// Library-wide exception. `location()` carries the line number, sample index,
/// bit offset or byte offset that the error message refers to, when one exists.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message,
        std::optional<std::uint64_t> location = std::nullopt);

  Errc code() const noexcept { return code_; }
  std::optional<std::uint64_t> location() const noexcept { return location_; }

 private:
  Errc code_;
  std::optional<std::uint64_t> location_;
};

}  // namespace tsc
