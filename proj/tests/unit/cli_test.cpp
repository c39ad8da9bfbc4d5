#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "tsc/bench.hpp"
#include "tsc/cli.hpp"
#include "tsc/csv.hpp"
#include "tsc/mkv.hpp"

namespace tsc::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result tsc(std::vector<std::string> args) {
  args.insert(args.begin(), "tsc");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / (std::string("tsc_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override {
    unsetenv("TSC_INSTRUMENT");
    fs::remove_all(dir);
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  void put(const std::string& name, const std::string& text) const { write_file(path(name), text); }

  // 3 Hz GPS with timestamps, 100 Hz accelerometer, one SSA file.
  std::string session() const {
    std::string gps, acc;
    char buf[64];
    for (int i = 0; i < 60; ++i) {
      std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f\n", i / 3.0, 48.1 + i * 1e-4, 11.5 - i * 2e-4);
      gps += buf;
    }
    for (int i = 0; i < 2000; ++i) acc += std::to_string((i * 7) % 41 - 20) + "," + std::to_string(i % 9) + "\n";
    put("gps.csv", gps);
    put("acc.csv", acc);
    put("labels.ass",
        "[Script Info]\nScriptType: v4.00+\n\n[Events]\n"
        "Format: Layer, Start, End, Style, Name, MarginL, MarginR, MarginV, Effect, Text\n"
        "Dialogue: 0,0:00:01.00,0:00:03.00,Default,,0,0,0,,walking\n"
        "Dialogue: 0,0:00:05.00,0:00:05.01,Default,,0,0,0,,door\n");
    put("session.ini",
        "[session]\nsubject = s01\n[output]\npath = session.mkv\n"
        "[input gps]\npath = gps.csv\ntime_column = 0\nrate = 3\nunits = deg\n"
        "[input acc]\npath = acc.csv\nrate = 100\nformat = int16\nunits = m/s^2\nsi_factor = 0.01\n"
        "[annotation labels]\npath = labels.ass\n");
    return path("session.ini");
  }
  fs::path dir;
};

TEST_F(Cli, HelpAndUsage) {
  EXPECT_EQ(tsc({"--help"}).code, kExitOk);
  EXPECT_EQ(tsc({}).code, kExitUsage);
  EXPECT_EQ(tsc({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(tsc({"unpack"}).code, kExitUsage);
}

TEST_F(Cli, PackTwoRatesAndSsa) {
  const auto r = tsc({"pack", session()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("acc"), std::string::npos);
  const auto d = mkv::Demuxer::from_file(path("session.mkv"));
  int audio = 0, subtitle = 0;
  for (const auto& t : d.info().tracks) {
    audio += t.type == 2;
    subtitle += t.type == 17;
  }
  EXPECT_EQ(audio, 2);
  EXPECT_EQ(subtitle, 1);
}

TEST_F(Cli, PackErrors) {
  put("empty.ini", "[session]\na = b\n");
  EXPECT_EQ(tsc({"pack", path("empty.ini")}).code, kExitUsage);
  put("kind.ini", "[input a]\npath = a.csv\nkind = hdf5\nrate = 1\n");
  EXPECT_EQ(tsc({"pack", path("kind.ini")}).code, kExitUsage);
  EXPECT_EQ(tsc({"pack", path("nope.ini")}).code, kExitUsage);
  put("missing.ini", "[input a]\npath = missing.csv\nrate = 1\n");
  EXPECT_EQ(tsc({"pack", path("missing.ini")}).code, kExitUsage);
  put("bad.csv", "1\n2\nx\n");
  put("bad.ini", "[input a]\npath = bad.csv\nrate = 1\n");
  EXPECT_EQ(tsc({"pack", path("bad.ini"), "-o", path("bad.mkv")}).code, kExitData);
}

TEST_F(Cli, JitterExitsTwoUnlessRepair) {
  put("j.csv", "0,1\n0.1,2\n0.5,3\n0.6,4\n");
  put("j.ini", "[input j]\npath = j.csv\ntime_column = 0\nrate = 10\n[output]\npath = j.mkv\n");
  const auto r = tsc({"pack", path("j.ini")});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("valid: no"), std::string::npos) << r.err;
  EXPECT_EQ(tsc({"pack", path("j.ini"), "--repair"}).code, kExitOk);
}

TEST_F(Cli, UnpackRoundTripAtDeclaredDigits) {
  put("v.csv", "0.125000,-3.500000\n1.000000,2.000001\n-0.000001,0.333333\n");
  put("i.csv", "1,-2\n300,-32768\n7,7\n");
  put("rt.ini",
      "[output]\npath = rt.mkv\nalign = false\n"
      "[input v]\npath = v.csv\nrate = 4\n[input i]\npath = i.csv\nrate = 4\nformat = int16\n");
  ASSERT_EQ(tsc({"pack", path("rt.ini")}).code, kExitOk);
  const auto r = tsc({"unpack", path("rt.mkv"), "-o", path("out")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(read_file(path("out/v.csv")), read_file(path("v.csv")));
  EXPECT_EQ(read_file(path("out/i.csv")), read_file(path("i.csv")));
  // The emitted manifest repacks to the same data.
  ASSERT_TRUE(fs::exists(path("out/manifest.ini")));
  ASSERT_EQ(tsc({"pack", path("out/manifest.ini"), "-o", path("again.mkv")}).code, kExitOk);
  ASSERT_EQ(tsc({"unpack", path("again.mkv"), "-o", path("out2")}).code, kExitOk);
  EXPECT_EQ(read_file(path("out2/v.csv")), read_file(path("v.csv")));
}

TEST_F(Cli, UnpackFormatsAndTracks) {
  ASSERT_EQ(tsc({"pack", session()}).code, kExitOk);
  auto r = tsc({"unpack", path("session.mkv"), "-o", path("f"), "--format", "f32", "--tracks", "gps,labels"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(path("f/gps.f32")));
  EXPECT_TRUE(fs::exists(path("f/labels.ass")));
  EXPECT_FALSE(fs::exists(path("f/acc.raw")));
  EXPECT_NE(read_file(path("f/labels.ass")).find("walking"), std::string::npos);
  r = tsc({"unpack", path("session.mkv"), "-o", path("g"), "--tracks", "acc", "--format", "f32"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_TRUE(fs::exists(path("g/acc.raw")));
  r = tsc({"unpack", path("session.mkv"), "-o", path("h"), "--tracks", "nonexistent"});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("gps"), std::string::npos) << r.err;
  EXPECT_EQ(tsc({"unpack", path("nothing.mkv")}).code, kExitUsage);
  EXPECT_EQ(tsc({"unpack", path("session.mkv"), "--window", "5"}).code, kExitUsage);
}

TEST_F(Cli, InfoListsTracks) {
  ASSERT_EQ(tsc({"pack", session()}).code, kExitOk);
  const auto r = tsc({"info", path("session.mkv")});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("TimestampScale: 1000000"), std::string::npos) << r.out;
  for (const char* name : {"gps", "acc", "labels", "A_FLAC", "A_TS/RICE32", "S_TEXT/ASS", "UNITS", "subject"}) {
    EXPECT_NE(r.out.find(name), std::string::npos) << name;
  }
  put("junk.mkv", "not a container");
  EXPECT_EQ(tsc({"info", path("junk.mkv")}).code, kExitData);
  EXPECT_EQ(tsc({"info", path("absent.mkv")}).code, kExitUsage);
}

TEST_F(Cli, ValidateExitCodes) {
  put("ok.csv", "0,1\n0.01,2\n0.02,3\n");
  put("late.csv", "0,1\n0.01,2\n0.05,3\n");
  EXPECT_EQ(tsc({"validate", path("ok.csv"), "--rate", "100"}).code, kExitOk);
  const auto r = tsc({"validate", path("late.csv"), "--rate", "100"});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.out.find("i=1"), std::string::npos) << r.out;
  EXPECT_EQ(tsc({"validate", path("absent.csv"), "--rate", "100"}).code, kExitUsage);
  EXPECT_EQ(tsc({"validate", path("ok.csv")}).code, kExitUsage);
}

TEST_F(Cli, WindowReadsLittleUnderInstrumentation) {
  std::string acc;
  for (int i = 0; i < 60000; ++i) acc += std::to_string((i * 13) % 101 - 50) + "," + std::to_string(i % 31) + "," + std::to_string(i % 7) + "\n";
  put("acc.csv", acc);
  put("w.ini", "[output]\npath = w.mkv\n[input acc]\npath = acc.csv\nrate = 100\nformat = int16\n");
  ASSERT_EQ(tsc({"pack", path("w.ini")}).code, kExitOk);
  setenv("TSC_INSTRUMENT", "1", 1);
  const auto r = tsc({"unpack", path("w.mkv"), "-o", path("win"), "--window", "10:11"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto at = r.err.find("fraction=");
  ASSERT_NE(at, std::string::npos) << r.err;
  EXPECT_LT(std::stod(r.err.substr(at + 9)), 0.05) << r.err;
  const std::string out = read_file(path("win/acc.csv"));
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 100);
  const int i = 1000;  // first sample at t = 10 s
  EXPECT_EQ(out.substr(0, out.find('\n')), "10.000000," + std::to_string((i * 13) % 101 - 50) + "," +
                                                std::to_string(i % 31) + "," + std::to_string(i % 7));
}

TEST_F(Cli, BenchSmokeIsParseable) {
  const auto r = tsc({"bench", "--profiles", "runlength8", "--sizes", "1e3", "--trials", "1", "--out", path("bench.txt")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto report = bench::parse_machine(read_file(path("bench.txt")));
  EXPECT_FALSE(report.rows.empty());
  EXPECT_NE(r.out.find("runlength8"), std::string::npos);
  EXPECT_EQ(tsc({"bench", "--profiles", "nope"}).code, kExitUsage);
}

}  // namespace
}  // namespace tsc::cli
