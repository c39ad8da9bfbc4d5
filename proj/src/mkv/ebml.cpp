#include "tsc/ebml.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "tsc/checksum.hpp"
#include "tsc/error.hpp"

namespace tsc::mkv {
namespace {

constexpr RegistryEntry kRegistry[] = {
    {id::EBML, "EBML"},
    {id::EBMLVersion, "EBMLVersion"},
    {id::EBMLReadVersion, "EBMLReadVersion"},
    {id::EBMLMaxIDLength, "EBMLMaxIDLength"},
    {id::EBMLMaxSizeLength, "EBMLMaxSizeLength"},
    {id::DocType, "DocType"},
    {id::DocTypeVersion, "DocTypeVersion"},
    {id::DocTypeReadVersion, "DocTypeReadVersion"},
    {id::Void, "Void"},
    {id::CRC32, "CRC-32"},
    {id::Segment, "Segment"},
    {id::SeekHead, "SeekHead"},
    {id::Seek, "Seek"},
    {id::SeekID, "SeekID"},
    {id::SeekPosition, "SeekPosition"},
    {id::Info, "Info"},
    {id::TimestampScale, "TimestampScale"},
    {id::Duration, "Duration"},
    {id::MuxingApp, "MuxingApp"},
    {id::WritingApp, "WritingApp"},
    {id::Title, "Title"},
    {id::Tracks, "Tracks"},
    {id::TrackEntry, "TrackEntry"},
    {id::TrackNumber, "TrackNumber"},
    {id::TrackUID, "TrackUID"},
    {id::TrackType, "TrackType"},
    {id::FlagLacing, "FlagLacing"},
    {id::Name, "Name"},
    {id::Language, "Language"},
    {id::CodecID, "CodecID"},
    {id::CodecPrivate, "CodecPrivate"},
    {id::Audio, "Audio"},
    {id::SamplingFrequency, "SamplingFrequency"},
    {id::Channels, "Channels"},
    {id::BitDepth, "BitDepth"},
    {id::Cluster, "Cluster"},
    {id::Timestamp, "Timestamp"},
    {id::SimpleBlock, "SimpleBlock"},
    {id::BlockGroup, "BlockGroup"},
    {id::Block, "Block"},
    {id::BlockDuration, "BlockDuration"},
    {id::Cues, "Cues"},
    {id::CuePoint, "CuePoint"},
    {id::CueTime, "CueTime"},
    {id::CueTrackPositions, "CueTrackPositions"},
    {id::CueTrack, "CueTrack"},
    {id::CueClusterPosition, "CueClusterPosition"},
    {id::CueRelativePosition, "CueRelativePosition"},
    {id::Tags, "Tags"},
    {id::Tag, "Tag"},
    {id::Targets, "Targets"},
    {id::TargetTypeValue, "TargetTypeValue"},
    {id::TagTrackUID, "TagTrackUID"},
    {id::SimpleTag, "SimpleTag"},
    {id::TagName, "TagName"},
    {id::TagString, "TagString"},
};

[[noreturn]] void truncated(std::uint64_t offset, const std::string& what) {
  throw Error(Errc::truncated, what + " truncated at byte " + std::to_string(offset), offset);
}

}  // namespace

std::span<const RegistryEntry> registry() { return kRegistry; }

std::optional<std::string_view> element_name(std::uint32_t value) {
  for (const auto& e : kRegistry) {
    if (e.id == value) return e.name;
  }
  return std::nullopt;
}

int vint_width(std::uint64_t value) {
  for (int w = 1; w <= 8; ++w) {
    if (value <= (std::uint64_t{1} << (7 * w)) - 2) return w;
  }
  throw Error(Errc::invalid_argument, "value " + std::to_string(value) + " too large for an EBML vint");
}

void vint_append(std::vector<std::uint8_t>& out, std::uint64_t value, int width) {
  if (width == 0) width = vint_width(value);
  if (width < 1 || width > 8) throw Error(Errc::invalid_argument, "EBML vint width must be 1..8");
  if (value > (std::uint64_t{1} << (7 * width)) - 2) {
    throw Error(Errc::invalid_argument,
                "value " + std::to_string(value) + " does not fit a " + std::to_string(width) + "-byte vint");
  }
  const std::uint64_t coded = value | (std::uint64_t{1} << (7 * width));
  for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(coded >> (8 * i)));
}

std::vector<std::uint8_t> vint_write(std::uint64_t value, int width) {
  std::vector<std::uint8_t> out;
  vint_append(out, value, width);
  return out;
}

Vint vint_read(std::span<const std::uint8_t> data, std::uint64_t base) {
  if (data.empty()) truncated(base, "EBML size");
  const std::uint8_t first = data[0];
  if (first == 0) throw Error(Errc::malformed, "invalid EBML vint at byte " + std::to_string(base), base);
  const int w = std::countl_zero(first) + 1;
  if (data.size() < static_cast<std::size_t>(w)) truncated(base, "EBML size");
  std::uint64_t v = first & (0xFFu >> w);
  for (int i = 1; i < w; ++i) v = (v << 8) | data[static_cast<std::size_t>(i)];
  if (v == (std::uint64_t{1} << (7 * w)) - 1) v = kUnknownSize;
  return {v, w};
}

Vint id_read(std::span<const std::uint8_t> data, std::uint64_t base) {
  if (data.empty()) truncated(base, "EBML element ID");
  const std::uint8_t first = data[0];
  const int w = std::countl_zero(first) + 1;
  if (first == 0 || w > 4) throw Error(Errc::malformed, "invalid EBML element ID at byte " + std::to_string(base), base);
  if (data.size() < static_cast<std::size_t>(w)) truncated(base, "EBML element ID");
  std::uint64_t v = 0;
  for (int i = 0; i < w; ++i) v = (v << 8) | data[static_cast<std::size_t>(i)];
  return {v, w};
}

void put_id(std::vector<std::uint8_t>& out, std::uint32_t value) {
  const int bytes = value > 0xFFFFFF ? 4 : value > 0xFFFF ? 3 : value > 0xFF ? 2 : 1;
  for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

void put_uint(std::vector<std::uint8_t>& out, std::uint32_t element, std::uint64_t value, int payload_bytes) {
  int n = payload_bytes;
  if (n == 0) {
    n = 1;
    while (n < 8 && (value >> (8 * n)) != 0) ++n;
  }
  put_id(out, element);
  vint_append(out, static_cast<std::uint64_t>(n));
  for (int i = n - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

void put_float(std::vector<std::uint8_t>& out, std::uint32_t element, double value) {
  put_id(out, element);
  vint_append(out, 8);
  const auto bits = std::bit_cast<std::uint64_t>(value);
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

void put_string(std::vector<std::uint8_t>& out, std::uint32_t element, std::string_view value) {
  put_id(out, element);
  vint_append(out, value.size());
  out.insert(out.end(), value.begin(), value.end());
}

void put_binary(std::vector<std::uint8_t>& out, std::uint32_t element, std::span<const std::uint8_t> value) {
  put_id(out, element);
  vint_append(out, value.size());
  out.insert(out.end(), value.begin(), value.end());
}

void put_master(std::vector<std::uint8_t>& out, std::uint32_t element, std::span<const std::uint8_t> kids, bool crc) {
  put_id(out, element);
  vint_append(out, kids.size() + (crc ? 6 : 0));
  if (crc) {
    const std::uint32_t c = crc32(kids);
    out.push_back(static_cast<std::uint8_t>(id::CRC32));
    out.push_back(0x84);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(c >> (8 * i)));
  }
  out.insert(out.end(), kids.begin(), kids.end());
}

std::vector<Element> children(std::span<const std::uint8_t> payload, std::uint64_t base) {
  std::vector<Element> out;
  std::size_t pos = 0;
  while (pos < payload.size()) {
    Element e;
    e.header.offset = base + pos;
    const Vint idv = id_read(payload.subspan(pos), base + pos);
    const Vint sz = vint_read(payload.subspan(pos + static_cast<std::size_t>(idv.width)), base + pos + static_cast<std::size_t>(idv.width));
    e.header.id = static_cast<std::uint32_t>(idv.value);
    e.header.size = sz.value;
    const std::size_t data_pos = pos + static_cast<std::size_t>(idv.width + sz.width);
    e.header.data_offset = base + data_pos;
    if (sz.value == kUnknownSize) {
      throw Error(Errc::unknown_size, "unknown-size element at byte " + std::to_string(e.header.offset), e.header.offset);
    }
    if (sz.value > payload.size() - data_pos) truncated(e.header.offset, "element");
    e.data = payload.subspan(data_pos, static_cast<std::size_t>(sz.value));
    pos = data_pos + static_cast<std::size_t>(sz.value);
    if (e.header.id == id::CRC32) {
      if (!out.empty() || e.data.size() != 4) {
        throw Error(Errc::malformed, "misplaced CRC-32 element at byte " + std::to_string(e.header.offset), e.header.offset);
      }
      const std::uint32_t stored = static_cast<std::uint32_t>(e.data[0]) | (static_cast<std::uint32_t>(e.data[1]) << 8) |
                                   (static_cast<std::uint32_t>(e.data[2]) << 16) | (static_cast<std::uint32_t>(e.data[3]) << 24);
      if (crc32(payload.subspan(pos)) != stored) {
        throw Error(Errc::crc32_mismatch, "CRC-32 mismatch in element at byte " + std::to_string(base), base);
      }
      continue;
    }
    out.push_back(e);
  }
  return out;
}

std::uint64_t read_uint(const Element& e) {
  if (e.data.size() > 8) {
    throw Error(Errc::malformed, "integer element wider than 8 bytes at byte " + std::to_string(e.header.offset), e.header.offset);
  }
  std::uint64_t v = 0;
  for (std::uint8_t b : e.data) v = (v << 8) | b;
  return v;
}

std::int64_t read_int(const Element& e) {
  const std::uint64_t u = read_uint(e);
  const std::size_t n = e.data.size();
  if (n == 0 || n == 8) return static_cast<std::int64_t>(u);
  const std::uint64_t sign = std::uint64_t{1} << (8 * n - 1);
  return static_cast<std::int64_t>((u ^ sign) - sign);
}

double read_float(const Element& e) {
  if (e.data.size() == 4) return std::bit_cast<float>(static_cast<std::uint32_t>(read_uint(e)));
  if (e.data.size() == 8) return std::bit_cast<double>(read_uint(e));
  if (e.data.empty()) return 0.0;
  throw Error(Errc::malformed, "float element of invalid size at byte " + std::to_string(e.header.offset), e.header.offset);
}

std::string read_string(const Element& e) {
  const auto end = std::find(e.data.begin(), e.data.end(), std::uint8_t{0});
  return std::string(e.data.begin(), end);
}

void ByteSource::read(std::uint64_t offset, std::span<std::uint8_t> out) {
  if (offset > size() || out.size() > size() - offset) {
    truncated(std::min<std::uint64_t>(offset + out.size(), size()), "read of " + std::to_string(out.size()) + " bytes at " + std::to_string(offset) + ":");
  }
  do_read(offset, out);
  bytes_read_.fetch_add(out.size(), std::memory_order_relaxed);
}

std::vector<std::uint8_t> ByteSource::read(std::uint64_t offset, std::size_t count) {
  std::vector<std::uint8_t> out(count);
  read(offset, std::span(out));
  return out;
}

void MemorySource::do_read(std::uint64_t offset, std::span<std::uint8_t> out) {
  std::memcpy(out.data(), bytes_.data() + offset, out.size());
}

FileSource::FileSource(const std::string& path) : file_(std::fopen(path.c_str(), "rb")) {
  if (file_ == nullptr) throw Error(Errc::io, "cannot open '" + path + "'");
  std::fseek(file_, 0, SEEK_END);
  size_ = static_cast<std::uint64_t>(ftello(file_));
}

FileSource::~FileSource() {
  if (file_ != nullptr) std::fclose(file_);
}

void FileSource::do_read(std::uint64_t offset, std::span<std::uint8_t> out) {
  std::lock_guard lock(mutex_);
  if (fseeko(file_, static_cast<off_t>(offset), SEEK_SET) != 0 || std::fread(out.data(), 1, out.size(), file_) != out.size()) {
    throw Error(Errc::io, "read failed at byte " + std::to_string(offset), offset);
  }
}

ElementHeader read_header(ByteSource& src, std::uint64_t offset) {
  if (offset >= src.size()) truncated(offset, "element header");
  std::uint8_t buf[12];
  const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(sizeof buf, src.size() - offset));
  src.read(offset, std::span(buf, n));
  const std::span<const std::uint8_t> view(buf, n);
  const Vint idv = id_read(view, offset);
  const Vint sz = vint_read(view.subspan(static_cast<std::size_t>(idv.width)), offset + static_cast<std::uint64_t>(idv.width));
  ElementHeader h;
  h.id = static_cast<std::uint32_t>(idv.value);
  h.size = sz.value;
  h.offset = offset;
  h.data_offset = offset + static_cast<std::uint64_t>(idv.width + sz.width);
  return h;
}

}  // namespace tsc::mkv
