#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsc::mkv {

namespace id {
// EBML header
inline constexpr std::uint32_t EBML = 0x1A45DFA3;
inline constexpr std::uint32_t EBMLVersion = 0x4286;
inline constexpr std::uint32_t EBMLReadVersion = 0x42F7;
inline constexpr std::uint32_t EBMLMaxIDLength = 0x42F2;
inline constexpr std::uint32_t EBMLMaxSizeLength = 0x42F3;
inline constexpr std::uint32_t DocType = 0x4282;
inline constexpr std::uint32_t DocTypeVersion = 0x4287;
inline constexpr std::uint32_t DocTypeReadVersion = 0x4285;
// global
inline constexpr std::uint32_t Void = 0xEC;
inline constexpr std::uint32_t CRC32 = 0xBF;
// segment
inline constexpr std::uint32_t Segment = 0x18538067;
inline constexpr std::uint32_t SeekHead = 0x114D9B74;
inline constexpr std::uint32_t Seek = 0x4DBB;
inline constexpr std::uint32_t SeekID = 0x53AB;
inline constexpr std::uint32_t SeekPosition = 0x53AC;
inline constexpr std::uint32_t Info = 0x1549A966;
inline constexpr std::uint32_t TimestampScale = 0x2AD7B1;
inline constexpr std::uint32_t Duration = 0x4489;
inline constexpr std::uint32_t MuxingApp = 0x4D80;
inline constexpr std::uint32_t WritingApp = 0x5741;
inline constexpr std::uint32_t Title = 0x7BA9;
inline constexpr std::uint32_t Tracks = 0x1654AE6B;
inline constexpr std::uint32_t TrackEntry = 0xAE;
inline constexpr std::uint32_t TrackNumber = 0xD7;
inline constexpr std::uint32_t TrackUID = 0x73C5;
inline constexpr std::uint32_t TrackType = 0x83;
inline constexpr std::uint32_t FlagLacing = 0x9C;
inline constexpr std::uint32_t Name = 0x536E;
inline constexpr std::uint32_t Language = 0x22B59C;
inline constexpr std::uint32_t CodecID = 0x86;
inline constexpr std::uint32_t CodecPrivate = 0x63A2;
inline constexpr std::uint32_t Audio = 0xE1;
inline constexpr std::uint32_t SamplingFrequency = 0xB5;
inline constexpr std::uint32_t Channels = 0x9F;
inline constexpr std::uint32_t BitDepth = 0x6264;
inline constexpr std::uint32_t Cluster = 0x1F43B675;
inline constexpr std::uint32_t Timestamp = 0xE7;
inline constexpr std::uint32_t SimpleBlock = 0xA3;
inline constexpr std::uint32_t BlockGroup = 0xA0;
inline constexpr std::uint32_t Block = 0xA1;
inline constexpr std::uint32_t BlockDuration = 0x9B;
inline constexpr std::uint32_t Cues = 0x1C53BB6B;
inline constexpr std::uint32_t CuePoint = 0xBB;
inline constexpr std::uint32_t CueTime = 0xB3;
inline constexpr std::uint32_t CueTrackPositions = 0xB7;
inline constexpr std::uint32_t CueTrack = 0xF7;
inline constexpr std::uint32_t CueClusterPosition = 0xF1;
inline constexpr std::uint32_t CueRelativePosition = 0xF0;
inline constexpr std::uint32_t Tags = 0x1254C367;
inline constexpr std::uint32_t Tag = 0x7373;
inline constexpr std::uint32_t Targets = 0x63C0;
inline constexpr std::uint32_t TargetTypeValue = 0x68CA;
inline constexpr std::uint32_t TagTrackUID = 0x63C5;
inline constexpr std::uint32_t SimpleTag = 0x67C8;
inline constexpr std::uint32_t TagName = 0x45A3;
inline constexpr std::uint32_t TagString = 0x4487;
}  // namespace id

struct RegistryEntry {
  std::uint32_t id;
  std::string_view name;
};

/// Every element ID this library reads or writes, with its registry name.
std::span<const RegistryEntry> registry();
std::optional<std::string_view> element_name(std::uint32_t id);

inline constexpr std::uint64_t kMaxVint = (std::uint64_t{1} << 56) - 2;
inline constexpr std::uint64_t kUnknownSize = ~std::uint64_t{0};

/// Smallest width whose all-ones pattern stays above `value`.
int vint_width(std::uint64_t value);
/// EBML variable-size integer; width 0 picks the minimal width.
std::vector<std::uint8_t> vint_write(std::uint64_t value, int width = 0);
void vint_append(std::vector<std::uint8_t>& out, std::uint64_t value, int width = 0);

struct Vint {
  std::uint64_t value = 0;  // marker bit removed; kUnknownSize for the all-ones pattern
  int width = 0;
};

/// Decodes a size vint at data[0]. Throws truncated/malformed with the
/// offset `base` + position.
Vint vint_read(std::span<const std::uint8_t> data, std::uint64_t base = 0);
/// Element ID: marker bits kept, 1 to 4 bytes.
Vint id_read(std::span<const std::uint8_t> data, std::uint64_t base = 0);

// Element construction. Each call appends one complete element.
void put_id(std::vector<std::uint8_t>& out, std::uint32_t id);
void put_uint(std::vector<std::uint8_t>& out, std::uint32_t id, std::uint64_t value, int payload_bytes = 0);
void put_float(std::vector<std::uint8_t>& out, std::uint32_t id, double value);
void put_string(std::vector<std::uint8_t>& out, std::uint32_t id, std::string_view value);
void put_binary(std::vector<std::uint8_t>& out, std::uint32_t id, std::span<const std::uint8_t> value);
/// Master element; with `crc` a CRC-32 child covering the payload comes first.
void put_master(std::vector<std::uint8_t>& out, std::uint32_t id, std::span<const std::uint8_t> children,
                bool crc = false);

/// One parsed element header.
struct ElementHeader {
  std::uint32_t id = 0;
  std::uint64_t size = 0;        // kUnknownSize when unknown
  std::uint64_t offset = 0;      // absolute offset of the ID
  std::uint64_t data_offset = 0; // absolute offset of the payload
  bool unknown_size() const noexcept { return size == kUnknownSize; }
};

/// In-memory child element.
struct Element {
  ElementHeader header;
  std::span<const std::uint8_t> data;
};

/// Children of a master payload that starts at absolute offset `base`.
/// Verifies a leading CRC-32 child when present; throws on overruns.
std::vector<Element> children(std::span<const std::uint8_t> payload, std::uint64_t base);

std::uint64_t read_uint(const Element& e);
std::int64_t read_int(const Element& e);
double read_float(const Element& e);
std::string read_string(const Element& e);

/// Random-access byte provider with a read counter. Reads are internally
/// synchronized, so several frame readers may share one source.
class ByteSource {
 public:
  virtual ~ByteSource() = default;
  virtual std::uint64_t size() const = 0;
  /// Reads exactly out.size() bytes or throws truncated with the offset.
  void read(std::uint64_t offset, std::span<std::uint8_t> out);
  std::vector<std::uint8_t> read(std::uint64_t offset, std::size_t count);

  std::uint64_t bytes_read() const noexcept { return bytes_read_.load(std::memory_order_relaxed); }
  void reset_counter() noexcept { bytes_read_.store(0, std::memory_order_relaxed); }

 protected:
  virtual void do_read(std::uint64_t offset, std::span<std::uint8_t> out) = 0;

 private:
  std::atomic<std::uint64_t> bytes_read_{0};
};

class MemorySource final : public ByteSource {
 public:
  explicit MemorySource(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}
  std::uint64_t size() const override { return bytes_.size(); }
  std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }

 protected:
  void do_read(std::uint64_t offset, std::span<std::uint8_t> out) override;

 private:
  std::vector<std::uint8_t> bytes_;
};

class FileSource final : public ByteSource {
 public:
  explicit FileSource(const std::string& path);
  ~FileSource() override;
  std::uint64_t size() const override { return size_; }

 protected:
  void do_read(std::uint64_t offset, std::span<std::uint8_t> out) override;

 private:
  std::FILE* file_ = nullptr;
  std::uint64_t size_ = 0;
  std::mutex mutex_;
};

/// Reads the ID and size at `offset` without touching the payload.
ElementHeader read_header(ByteSource& src, std::uint64_t offset);

}  // namespace tsc::mkv
