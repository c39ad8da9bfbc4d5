#include "tsc/error.hpp"

namespace tsc {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::io: return "io";
    case Errc::empty_input: return "empty_input";
    case Errc::ragged_row: return "ragged_row";
    case Errc::non_numeric: return "non_numeric";
    case Errc::bad_timestamp: return "bad_timestamp";
    case Errc::missing_format: return "missing_format";
    case Errc::non_monotonic: return "non_monotonic";
    case Errc::gap_exceeded: return "gap_exceeded";
    case Errc::truncated: return "truncated";
    case Errc::bad_magic: return "bad_magic";
    case Errc::header_crc: return "header_crc";
    case Errc::frame_crc: return "frame_crc";
    case Errc::md5_mismatch: return "md5_mismatch";
    case Errc::crc32_mismatch: return "crc32_mismatch";
    case Errc::unknown_size: return "unknown_size";
    case Errc::unsupported: return "unsupported";
    case Errc::malformed: return "malformed";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message, std::optional<std::uint64_t> location)
    : std::runtime_error(message), code_(code), location_(location) {}

}  // namespace tsc
