#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <set>
#include <thread>

#include "helpers.hpp"
#include "tsc/csv.hpp"
#include "tsc/error.hpp"
#include "tsc/mkv.hpp"
#include "tsc/session.hpp"
#include "tsc/validate.hpp"

namespace tsc::mkv {
namespace {

using Bytes = std::vector<std::uint8_t>;

Dataset mixed_dataset() {
  return Dataset({{"subject", "s01"}, {"site", "kitchen, lab 2"}},
                 {test::random_stream("acc", SampleFormat(SampleKind::int16), 3, 3000, Rational(100), 1),
                  test::random_stream("gps", SampleFormat(SampleKind::float32), 2, 90, Rational(3), 2, Rational(1, 3)),
                  test::random_stream("mic", SampleFormat(SampleKind::int24), 1, 20000, Rational(1000), 3)},
                 {test::sample_annotations("labels", 60, 4)});
}

Bytes pack_bytes(const Dataset& d, PackOptions opt = {}) { return pack(d, opt).container; }

// Offsets of the Segment header and its top-level children.
struct Layout {
  ElementHeader segment;
  std::vector<ElementHeader> top;
};

Layout layout(const Bytes& file) {
  Layout l;
  const auto root = children(file, 0);
  l.segment = root.at(1).header;
  for (const auto& e : children(root[1].data, root[1].header.data_offset)) l.top.push_back(e.header);
  return l;
}

void patch_segment_size(Bytes& file, const Layout& l, std::uint64_t new_size) {
  const int width = static_cast<int>(l.segment.data_offset - l.segment.offset - 4);
  const Bytes v = vint_write(new_size, width);
  std::copy(v.begin(), v.end(), file.begin() + static_cast<std::ptrdiff_t>(l.segment.offset + 4));
}

TEST(Mkv, EmptyDatasetIsValidContainer) {
  const Bytes file = mux({}, {});
  const auto d = Demuxer::from_bytes(file);
  EXPECT_EQ(d.info().doc_type, "matroska");
  EXPECT_TRUE(d.info().tracks.empty());
  EXPECT_EQ(d.info().timestamp_scale, kTimestampScale);
  EXPECT_EQ(d.info().writing_app, kWritingApp);
}

TEST(Mkv, FlacPlusSubtitleRoundTrip) {
  const Dataset d({}, {test::random_stream("acc", SampleFormat(SampleKind::int16), 1, 500, Rational(50), 1)},
                  {test::sample_annotations("labels", 10, 1)});
  const auto back = unpack(pack_bytes(d));
  const auto cmp = dataset_equal(d, back);
  EXPECT_TRUE(cmp.equal) << cmp.difference;
}

TEST(Mkv, MixedDatasetRoundTripAndSkeleton) {
  const Dataset d = mixed_dataset();
  const Bytes file = pack_bytes(d);
  const auto demux = Demuxer::from_bytes(file);
  const auto sk = skeleton(demux);
  EXPECT_EQ(sk.session_meta, d.session_meta());
  ASSERT_EQ(sk.streams.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& s = d.streams()[i];
    EXPECT_EQ(sk.streams[i].name, s.name());
    EXPECT_EQ(sk.streams[i].rate_hz, s.rate_hz());
    EXPECT_EQ(sk.streams[i].channels, s.channels());
    EXPECT_EQ(sk.streams[i].format, s.format());
    EXPECT_EQ(sk.streams[i].start_time_s, s.start_time_s());
  }
  EXPECT_EQ(sk.streams[0].codec_id, kCodecFlac);
  EXPECT_EQ(sk.streams[1].codec_id, kCodecRice32);
  ASSERT_EQ(sk.tracks.size(), 1u);
  EXPECT_EQ(sk.tracks[0].name, "labels");
  const auto cmp = dataset_equal(d, unpack(demux));
  EXPECT_TRUE(cmp.equal) << cmp.difference;
  // Track numbers are dense from 1.
  for (std::size_t i = 0; i < demux.info().tracks.size(); ++i) EXPECT_EQ(demux.info().tracks[i].number, i + 1);
}

TEST(Mkv, UnknownTopLevelElementIsSkipped) {
  Bytes file = pack_bytes(mixed_dataset());
  const Layout l = layout(file);
  Bytes junk;
  put_binary(junk, 0x1F00AB01 & 0x1FFFFFFF, Bytes(37, 0x5A));
  put_binary(junk, 0x4321, Bytes(5, 1));
  patch_segment_size(file, l, l.segment.size + junk.size());
  file.insert(file.end(), junk.begin(), junk.end());
  const auto demux = Demuxer::from_bytes(file);
  EXPECT_TRUE(dataset_equal(mixed_dataset(), unpack(demux)).equal);
  EXPECT_EQ(demux.info().segment_end, file.size());
}

TEST(Mkv, WebmDocTypeIsRead) {
  Bytes file = pack_bytes(mixed_dataset());
  const std::string from = "matroska";
  auto at = std::search(file.begin(), file.begin() + 64, from.begin(), from.end());
  ASSERT_NE(at, file.begin() + 64);
  // "webm" padded with NUL to the same 8-byte string length.
  const char webm[8] = {'w', 'e', 'b', 'm', 0, 0, 0, 0};
  std::copy(webm, webm + 8, at);
  const auto demux = Demuxer::from_bytes(file);
  EXPECT_EQ(demux.info().doc_type, "webm");
  EXPECT_TRUE(dataset_equal(mixed_dataset(), unpack(demux)).equal);
  std::copy(std::begin("mp4boxes"), std::begin("mp4boxes") + 8, at);
  EXPECT_THROW(Demuxer::from_bytes(file), Error);
}

TEST(Mkv, TruncationFuzzAlwaysReportsOffset) {
  const Bytes file = pack_bytes(mixed_dataset());
  std::mt19937 rng(99);
  for (int i = 0; i < 100; ++i) {
    const std::size_t cut = i == 0 ? file.size() * 9 / 10 : 1 + rng() % (file.size() - 1);
    Bytes t(file.begin(), file.begin() + static_cast<std::ptrdiff_t>(cut));
    try {
      unpack(t);
      FAIL() << "cut at " << cut << " decoded";
    } catch (const Error& e) {
      ASSERT_TRUE(e.location().has_value()) << "cut " << cut << ": " << e.what();
      EXPECT_LE(*e.location(), file.size()) << e.what();
    }
  }
}

TEST(Mkv, MutationFuzzNeverEscapesErrorType) {
  const Bytes file = pack_bytes(mixed_dataset());
  std::mt19937 rng(5);
  int rejected = 0;
  for (int i = 0; i < 300; ++i) {
    Bytes m = file;
    for (int k = 0; k < 1 + static_cast<int>(rng() % 4); ++k) m[rng() % m.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    try {
      unpack(m);
    } catch (const Error&) {
      ++rejected;
    }
  }
  EXPECT_GT(rejected, 0);
}

TEST(Mkv, Crc32Elements) {
  PackOptions opt;
  opt.mux.crc32 = true;
  const Dataset d = mixed_dataset();
  Bytes file = pack_bytes(d, opt);
  EXPECT_TRUE(dataset_equal(d, unpack(file)).equal);
  const Layout l = layout(file);
  const ElementHeader* cluster = nullptr;
  for (const auto& h : l.top) {
    if (h.id == id::Cluster) {
      cluster = &h;
      break;
    }
  }
  ASSERT_NE(cluster, nullptr);
  file[cluster->data_offset + cluster->size / 2] ^= 0x01;
  try {
    unpack(file);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::crc32_mismatch);
  }
}

TEST(Mkv, ClusterInvariants) {
  PackOptions opt;
  opt.mux.cluster_duration_s = Rational(5);
  const Bytes file = pack_bytes(mixed_dataset(), opt);
  const auto demux = Demuxer::from_bytes(file);
  auto reader = demux.frames();
  std::int64_t last = -1;
  std::size_t clusters = 0;
  while (auto c = reader.next_cluster()) {
    EXPECT_GT(c->time, last);
    last = c->time;
    ++clusters;
    for (const auto& f : c->frames) {
      EXPECT_GE(f.time, c->time);
      EXPECT_LT(f.time - c->time, 5000);
    }
  }
  EXPECT_GE(clusters, 6u);  // 30 s of acc data in 5 s clusters
}

void collect_ids(std::span<const std::uint8_t> payload, std::uint64_t base, std::set<std::uint32_t>& ids) {
  static const std::set<std::uint32_t> masters{id::EBML,       id::Segment,  id::SeekHead, id::Seek,
                                               id::Info,       id::Tracks,   id::TrackEntry, id::Audio,
                                               id::Cluster,    id::BlockGroup, id::Cues,   id::CuePoint,
                                               id::CueTrackPositions, id::Tags, id::Tag,   id::Targets,
                                               id::SimpleTag};
  for (const auto& e : children(payload, base)) {
    ids.insert(e.header.id);
    if (masters.count(e.header.id)) collect_ids(e.data, e.header.data_offset, ids);
  }
}

TEST(Mkv, EveryEmittedIdIsRegistered) {
  PackOptions opt;
  opt.mux.crc32 = true;
  const Bytes file = pack_bytes(mixed_dataset(), opt);
  std::set<std::uint32_t> ids;
  collect_ids(file, 0, ids);
  EXPECT_GT(ids.size(), 30u);
  for (std::uint32_t i : ids) EXPECT_TRUE(element_name(i).has_value()) << std::hex << i;
}

Bytes long_file() {
  const Dataset d({}, {test::random_stream("imu", SampleFormat(SampleKind::int16), 3, 60000, Rational(100), 8)},
                  {test::sample_annotations("labels", 100, 8)});
  return pack_bytes(d);
}

TEST(Mkv, SeekWindowReadsUnderFivePercent) {
  const Bytes file = long_file();
  auto src = std::make_shared<MemorySource>(file);
  const Demuxer demux(src);
  ASSERT_GE(demux.info().cues.size(), 100u);
  const auto w = seek_window(demux, 1, Rational(10), Rational(11));
  EXPECT_TRUE(w.used_cues);
  EXPECT_FALSE(w.frames.empty());
  EXPECT_LT(static_cast<double>(src->bytes_read()), 0.05 * static_cast<double>(file.size()))
      << src->bytes_read() << " of " << file.size();

  src->reset_counter();
  const auto sw = decode_stream_window(demux, 1, Rational(10), Rational(11));
  EXPECT_EQ(sw.stream.frame_count(), 100u);
  EXPECT_EQ(sw.stream.start_time_s(), Rational(10));
  EXPECT_LT(static_cast<double>(src->bytes_read()), 0.05 * static_cast<double>(file.size()));
  const auto full = decode_stream(demux, 1);
  for (std::size_t i = 0; i < 300; ++i) ASSERT_EQ(sw.stream.int_samples()[i], full.int_samples()[3000 + i]);
}

TEST(Mkv, DegenerateWindows) {
  const Dataset d({}, {test::random_stream("s", SampleFormat(SampleKind::int8), 1, 2000, Rational(100), 1, Rational(100))},
                  {});
  const auto demux = Demuxer::from_bytes(pack_bytes(d));
  EXPECT_TRUE(seek_window(demux, 1, Rational(0), Rational(50)).frames.empty());
  const auto all = seek_window(demux, 1, Rational(0), Rational(1000));
  const auto ref = demux.read_all(1);
  ASSERT_EQ(all.frames.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_EQ(all.frames[i].data, ref[i].data);
}

TEST(Mkv, MissingCuesFallsBackToScan) {
  Bytes file = long_file();
  const Layout l = layout(file);
  const auto cues = std::find_if(l.top.begin(), l.top.end(), [](const ElementHeader& h) { return h.id == id::Cues; });
  ASSERT_NE(cues, l.top.end());
  // Overwrite Cues with a Void element of the same total length.
  const std::uint64_t total = cues->data_offset + cues->size - cues->offset;
  Bytes v{0xEC};
  vint_append(v, total - 9, 8);
  std::copy(v.begin(), v.end(), file.begin() + static_cast<std::ptrdiff_t>(cues->offset));
  const auto demux = Demuxer::from_bytes(file);
  EXPECT_FALSE(demux.info().has_cues);
  const auto w = seek_window(demux, 1, Rational(10), Rational(11));
  EXPECT_FALSE(w.used_cues);
  const auto ref = seek_window(Demuxer::from_bytes(long_file()), 1, Rational(10), Rational(11));
  ASSERT_EQ(w.frames.size(), ref.frames.size());
  for (std::size_t i = 0; i < w.frames.size(); ++i) EXPECT_EQ(w.frames[i].data, ref.frames[i].data);
}

TEST(Mkv, SharedFileSourceAcrossThreads) {
  const Dataset d = mixed_dataset();
  const auto path = std::filesystem::temp_directory_path() / "tsc_threads.mkv";
  write_file(path.string(), pack_bytes(d));
  const auto demux = Demuxer::from_file(path.string());
  std::vector<std::size_t> counts(demux.info().tracks.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    threads.emplace_back([&, t] {
      auto r = demux.frames({demux.info().tracks[t].number});
      Frame f;
      while (r.next(f)) counts[t] += f.data.size();
    });
  }
  for (auto& t : threads) t.join();
  for (std::size_t t = 0; t < counts.size(); ++t) {
    std::size_t ref = 0;
    for (const auto& f : demux.read_all(demux.info().tracks[t].number)) ref += f.data.size();
    EXPECT_EQ(counts[t], ref);
  }
  std::filesystem::remove(path);
}

TEST(Mkv, ExternalValidatorAcceptsOutput) {
  const bool mkvalidator = std::system("command -v mkvalidator >/dev/null 2>&1") == 0;
  const bool mkvinfo = std::system("command -v mkvinfo >/dev/null 2>&1") == 0;
  if (!mkvalidator && !mkvinfo) GTEST_SKIP() << "no Matroska validator installed";
  const auto path = std::filesystem::temp_directory_path() / "tsc_validate.mkv";
  write_file(path.string(), pack_bytes(mixed_dataset()));
  const std::string cmd = (mkvalidator ? "mkvalidator --quiet " : "mkvinfo ") + path.string() + " >/dev/null 2>&1";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace tsc::mkv
