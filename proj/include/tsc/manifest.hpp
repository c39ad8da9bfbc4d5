#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsc/error.hpp"
#include "tsc/model.hpp"
#include "tsc/resample.hpp"
#include "tsc/session.hpp"
#include "tsc/validate.hpp"

// Pack manifest: line-oriented "key = value" pairs under [section] headers.
//
//   [session]               free-form session metadata
//   [output]                path, rate, strategy, align, codec, block_size, cluster_s, crc32
//   [input <name>]          one sensor stream
//   [annotation <name>]     one .ass/.ssa or annotation .csv file
//
// Lines starting with '#' or ';' are comments. Relative paths resolve against
// the manifest's directory. Streams and annotations are ordered by name, so
// section order does not matter.

namespace tsc {

enum class InputKind { csv, f32 };

struct InputSpec {
  std::string name;
  std::string path;
  InputKind kind = InputKind::csv;
  std::optional<Rational> rate_hz;
  std::optional<int> time_column;
  std::optional<int> channels;
  std::optional<SampleFormat> format;
  char delimiter = ',';
  bool header = false;
  Rational start_time_s{0};
  StreamMeta meta;
  std::optional<ResampleStrategy> strategy;
  double time_slack_s = kDefaultTimeSlack;  // absolute slack on the 1/rate bound
};

struct AnnotationSpec {
  std::string name;
  std::string path;
};

struct PackManifest {
  std::vector<InputSpec> inputs;
  std::vector<AnnotationSpec> annotations;
  MetaMap session;
  std::string output;
  std::optional<Rational> rate_hz;  // align target
  std::optional<ResampleStrategy> strategy;
  bool align = true;
  PackOptions pack;
};

/// `base_dir` prefixes relative paths. Errors are Errc::invalid_argument with the line number.
PackManifest parse_manifest(std::string_view text, const std::string& base_dir = {});
PackManifest load_manifest(const std::string& path);
std::string render_manifest(const PackManifest& manifest);

/// Thrown by build_dataset when a time-coded input violates its rate and
/// repair is off.
class JitterError : public Error {
 public:
  JitterError(std::string input, JitterReport report);
  const std::string& input() const noexcept { return input_; }
  const JitterReport& report() const noexcept { return report_; }

 private:
  std::string input_;
  JitterReport report_;
};

struct BuildOptions {
  bool repair = false;  // resample jittery inputs instead of failing
};

/// Ingest, rate validation, resampling of time-coded inputs, then align.
Dataset build_dataset(const PackManifest& manifest, const BuildOptions& options = {});

/// "time, duration, text" rows (text runs to the end of the line). A first
/// row whose time is not numeric is taken as a header.
SparseTrack read_annotation_csv(std::string_view text, std::string name, char delimiter = ',');

}  // namespace tsc
