#include "tsc/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <set>

#include "tsc/csv.hpp"
#include "tsc/error.hpp"
#include "tsc/ssa.hpp"

namespace tsc {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(std::size_t line, const std::string& what) {
  throw Error(Errc::invalid_argument, "manifest line " + std::to_string(line) + ": " + what, line);
}

bool parse_bool(std::string_view v, std::size_t line) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  bad(line, "expected a boolean, got '" + std::string(v) + "'");
}

int parse_int(std::string_view v, std::size_t line) {
  int out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad(line, "expected an integer, got '" + std::string(v) + "'");
  return out;
}

template <typename F>
auto checked(std::size_t line, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    bad(line, e.what());
  }
}

std::string resolve(const std::string& base, std::string_view path) {
  std::filesystem::path p{std::string(path)};
  if (p.is_absolute() || base.empty()) return p.string();
  return (std::filesystem::path(base) / p).string();
}

char parse_delimiter(std::string_view v, std::size_t line) {
  if (v == "tab" || v == "\\t") return '\t';
  if (v == "comma") return ',';
  if (v == "semicolon") return ';';
  if (v == "space") return ' ';
  if (v.size() != 1) bad(line, "delimiter must be one character, 'tab', 'comma', 'semicolon' or 'space'");
  return v[0];
}

std::string delimiter_text(char c) {
  switch (c) {
    case '\t': return "tab";
    case ',': return "comma";
    case ';': return "semicolon";
    case ' ': return "space";
    default: return std::string(1, c);
  }
}

void set_input(InputSpec& in, std::string_view key, std::string_view v, std::size_t line, const std::string& base) {
  if (key == "path") in.path = resolve(base, v);
  else if (key == "kind") {
    if (v == "csv") in.kind = InputKind::csv;
    else if (v == "f32" || v == "raw") in.kind = InputKind::f32;
    else bad(line, "unknown input kind '" + std::string(v) + "' (csv, f32)");
  } else if (key == "rate_hz" || key == "rate") in.rate_hz = checked(line, [&] { return Rational::parse(v); });
  else if (key == "time_column") in.time_column = parse_int(v, line);
  else if (key == "channels") in.channels = parse_int(v, line);
  else if (key == "format") in.format = checked(line, [&] { return SampleFormat::parse(v); });
  else if (key == "delimiter") in.delimiter = parse_delimiter(v, line);
  else if (key == "header") in.header = parse_bool(v, line);
  else if (key == "start_time" || key == "start") in.start_time_s = checked(line, [&] { return Rational::parse(v); });
  else if (key == "units") in.meta.units = std::string(v);
  else if (key == "si_factor") in.meta.si_conversion_factor = checked(line, [&] { return Rational::parse(v); });
  else if (key == "range_min") in.meta.range_min = checked(line, [&] { return Rational::parse(v); });
  else if (key == "range_max") in.meta.range_max = checked(line, [&] { return Rational::parse(v); });
  else if (key == "range") {
    const auto colon = v.find(':');
    if (colon == std::string_view::npos) bad(line, "range must be 'min:max'");
    in.meta.range_min = checked(line, [&] { return Rational::parse(trim(v.substr(0, colon))); });
    in.meta.range_max = checked(line, [&] { return Rational::parse(trim(v.substr(colon + 1))); });
  } else if (key == "strategy") in.strategy = checked(line, [&] { return ResampleStrategy::parse(v); });
  else if (key == "time_slack_s") {
    in.time_slack_s = checked(line, [&] { return Rational::parse(v).to_double(); });
    if (in.time_slack_s < 0) bad(line, "time_slack_s must be non-negative");
  } else if (key.starts_with("extra.")) in.meta.extra[std::string(key.substr(6))] = std::string(v);
  else bad(line, "unknown input key '" + std::string(key) + "'");
}

void set_output(PackManifest& m, std::string_view key, std::string_view v, std::size_t line, const std::string& base) {
  if (key == "path") m.output = resolve(base, v);
  else if (key == "rate" || key == "rate_hz") m.rate_hz = checked(line, [&] { return Rational::parse(v); });
  else if (key == "strategy") m.strategy = checked(line, [&] { return ResampleStrategy::parse(v); });
  else if (key == "align") m.align = parse_bool(v, line);
  else if (key == "codec") m.pack.codec = checked(line, [&] { return parse_codec_choice(v); });
  else if (key == "block_size") {
    const int b = parse_int(v, line);
    if (b < 16 || b > 65535) bad(line, "block_size must be in [16, 65535]");
    m.pack.block_size = static_cast<std::uint32_t>(b);
  } else if (key == "cluster_s") {
    m.pack.mux.cluster_duration_s = checked(line, [&] { return Rational::parse(v); });
    if (m.pack.mux.cluster_duration_s <= Rational(0)) bad(line, "cluster_s must be positive");
  } else if (key == "crc32") m.pack.mux.crc32 = parse_bool(v, line);
  else bad(line, "unknown output key '" + std::string(key) + "'");
}

std::string codec_key(CodecChoice c) { return std::string(codec_choice_name(c)); }

std::string strategy_text(const ResampleStrategy& s) {
  std::string out(interpolation_name(s.kind));
  switch (s.gap_policy) {
    case GapPolicy::fill_hold: out += ":fill_hold"; break;
    case GapPolicy::fill_nan: out += ":fill_nan"; break;
    case GapPolicy::error: out += ":error"; break;
  }
  if (s.gap_threshold_s) out += ":" + s.gap_threshold_s->to_string();
  return out;
}

UniformStream load_input(const InputSpec& in, const PackManifest& m, const BuildOptions& options) {
  StreamTarget target;
  target.name = in.name;
  target.format = in.format.value_or(SampleFormat(SampleKind::float32));
  target.start_time_s = in.start_time_s;
  target.meta = in.meta;
  const std::string data = read_file(in.path);

  if (in.kind == InputKind::f32) {
    const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(data.data()), data.size());
    return read_raw(bytes, *in.format, *in.channels, *in.rate_hz, target);
  }
  CsvSpec spec;
  spec.delimiter = in.delimiter;
  spec.has_header = in.header;
  spec.time_column = in.time_column;
  if (!in.time_column) return read_uniform_csv(data, spec, *in.rate_hz, target);

  TimecodedSeries series = read_timecoded_csv(data, spec, in.name);
  if (series.rows() == 0) throw Error(Errc::empty_input, "input '" + in.name + "' has no rows");
  Rational rate;
  if (in.rate_hz) {
    rate = *in.rate_hz;
  } else {
    const double span = series.timestamps.back() - series.timestamps.front();
    if (series.rows() < 2 || !(span > 0)) {
      throw Error(Errc::invalid_argument, "input '" + in.name + "' needs rate_hz: its rate cannot be inferred");
    }
    rate = Rational::from_double(static_cast<double>(series.rows() - 1) / span, 1000);
  }
  const JitterReport report = validate_uniform(series.timestamps, rate, in.time_slack_s);
  if (!report.valid && !options.repair) throw JitterError(in.name, report);
  const ResampleStrategy strategy = in.strategy.value_or(m.strategy.value_or(default_strategy(target.format)));
  return resample(series, rate, strategy, target);
}

}  // namespace

JitterError::JitterError(std::string input, JitterReport report)
    : Error(Errc::gap_exceeded,
            "input '" + input + "' violates its rate bound at " + std::to_string(report.violations.size()) +
                " places (use --repair to resample)"),
      input_(std::move(input)),
      report_(std::move(report)) {}

PackManifest parse_manifest(std::string_view text, const std::string& base_dir) {
  PackManifest m;
  enum class Sec { none, session, output, input, annotation } sec = Sec::none;
  std::set<std::string> stream_names, track_names;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad(line_no, "unterminated section header");
      const std::string_view inner = trim(line.substr(1, line.size() - 2));
      const auto space = inner.find_first_of(" \t");
      const std::string_view head = inner.substr(0, space);
      const std::string name = space == std::string_view::npos ? std::string() : std::string(trim(inner.substr(space)));
      if (head == "session" || head == "output") {
        if (!name.empty()) bad(line_no, "[" + std::string(head) + "] takes no name");
        sec = head == "session" ? Sec::session : Sec::output;
      } else if (head == "input" || head == "annotation") {
        if (name.empty()) bad(line_no, "[" + std::string(head) + "] needs a name, e.g. [" + std::string(head) + " acc]");
        auto& names = head == "input" ? stream_names : track_names;
        if (!names.insert(name).second) bad(line_no, "duplicate " + std::string(head) + " '" + name + "'");
        if (head == "input") {
          sec = Sec::input;
          m.inputs.push_back(InputSpec{});
          m.inputs.back().name = name;
        } else {
          sec = Sec::annotation;
          m.annotations.push_back(AnnotationSpec{name, {}});
        }
      } else {
        bad(line_no, "unknown section [" + std::string(head) + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) bad(line_no, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) bad(line_no, "empty key");
    switch (sec) {
      case Sec::none: bad(line_no, "key outside any section");
      case Sec::session: m.session[std::string(key)] = std::string(value); break;
      case Sec::output: set_output(m, key, value, line_no, base_dir); break;
      case Sec::input: set_input(m.inputs.back(), key, value, line_no, base_dir); break;
      case Sec::annotation:
        if (key != "path") bad(line_no, "unknown annotation key '" + std::string(key) + "'");
        m.annotations.back().path = resolve(base_dir, value);
        break;
    }
  }

  for (const auto& in : m.inputs) {
    const std::string where = "input '" + in.name + "'";
    if (in.path.empty()) throw Error(Errc::invalid_argument, where + " has no path");
    if (in.kind == InputKind::f32 && (!in.channels || !in.format || !in.rate_hz)) {
      throw Error(Errc::invalid_argument, where + " is binary and must declare channels, format and rate_hz");
    }
    if (in.kind == InputKind::csv && !in.time_column && !in.rate_hz) {
      throw Error(Errc::invalid_argument, where + " has no time_column and must declare rate_hz");
    }
    if (in.channels && *in.channels < 1) throw Error(Errc::invalid_argument, where + " needs channels >= 1");
  }
  for (const auto& a : m.annotations) {
    if (a.path.empty()) throw Error(Errc::invalid_argument, "annotation '" + a.name + "' has no path");
  }
  auto by_name = [](const auto& a, const auto& b) { return a.name < b.name; };
  std::sort(m.inputs.begin(), m.inputs.end(), by_name);
  std::sort(m.annotations.begin(), m.annotations.end(), by_name);
  return m;
}

PackManifest load_manifest(const std::string& path) {
  const std::string text = read_file(path);
  return parse_manifest(text, std::filesystem::path(path).parent_path().string());
}

std::string render_manifest(const PackManifest& m) {
  std::string out;
  auto kv = [&](std::string_view k, std::string_view v) {
    out.append(k).append(" = ").append(v).append("\n");
  };
  if (!m.session.empty()) {
    out += "[session]\n";
    for (const auto& [k, v] : m.session) kv(k, v);
    out += "\n";
  }
  out += "[output]\n";
  if (!m.output.empty()) kv("path", m.output);
  kv("align", m.align ? "true" : "false");
  if (m.rate_hz) kv("rate", m.rate_hz->to_string());
  if (m.strategy) kv("strategy", strategy_text(*m.strategy));
  kv("codec", codec_key(m.pack.codec));
  if (m.pack.block_size) kv("block_size", std::to_string(*m.pack.block_size));
  kv("cluster_s", m.pack.mux.cluster_duration_s.to_string());
  if (m.pack.mux.crc32) kv("crc32", "true");
  for (const auto& in : m.inputs) {
    out += "\n[input " + in.name + "]\n";
    kv("path", in.path);
    kv("kind", in.kind == InputKind::csv ? "csv" : "f32");
    if (in.rate_hz) kv("rate_hz", in.rate_hz->to_string());
    if (in.time_column) kv("time_column", std::to_string(*in.time_column));
    if (in.channels) kv("channels", std::to_string(*in.channels));
    if (in.format) kv("format", in.format->name());
    if (in.delimiter != ',') kv("delimiter", delimiter_text(in.delimiter));
    if (in.header) kv("header", "true");
    if (in.start_time_s != Rational(0)) kv("start_time", in.start_time_s.to_string());
    if (!in.meta.units.empty()) kv("units", in.meta.units);
    if (in.meta.si_conversion_factor) kv("si_factor", in.meta.si_conversion_factor->to_string());
    if (in.meta.range_min) kv("range_min", in.meta.range_min->to_string());
    if (in.meta.range_max) kv("range_max", in.meta.range_max->to_string());
    if (in.strategy) kv("strategy", strategy_text(*in.strategy));
    if (in.time_slack_s != kDefaultTimeSlack) kv("time_slack_s", Rational::from_double(in.time_slack_s, 1'000'000'000).to_string());
    for (const auto& [k, v] : in.meta.extra) kv("extra." + k, v);
  }
  for (const auto& a : m.annotations) {
    out += "\n[annotation " + a.name + "]\n";
    kv("path", a.path);
  }
  return out;
}

Dataset build_dataset(const PackManifest& m, const BuildOptions& options) {
  if (m.inputs.empty() && m.annotations.empty()) {
    throw Error(Errc::invalid_argument, "manifest lists no inputs and no annotations");
  }
  std::vector<UniformStream> streams;
  for (const auto& in : m.inputs) streams.push_back(load_input(in, m, options));
  if (m.align && !streams.empty()) streams = align(streams, m.rate_hz, m.strategy);

  std::vector<SparseTrack> tracks;
  for (const auto& a : m.annotations) {
    const std::string text = read_file(a.path);
    const std::string ext = std::filesystem::path(a.path).extension().string();
    if (ext == ".csv" || ext == ".tsv") {
      tracks.push_back(read_annotation_csv(text, a.name, ext == ".tsv" ? '\t' : ','));
    } else {
      tracks.push_back(ssa::parse(text, a.name));
    }
  }
  return Dataset(m.session, std::move(streams), std::move(tracks));
}

SparseTrack read_annotation_csv(std::string_view text, std::string name, char delimiter) {
  std::vector<Event> events;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    const auto d1 = line.find(delimiter);
    const auto d2 = d1 == std::string_view::npos ? d1 : line.find(delimiter, d1 + 1);
    const std::string_view t = trim(line.substr(0, d1));
    Rational time;
    try {
      time = Rational::parse(t);
    } catch (const Error&) {
      if (first) {
        first = false;
        continue;
      }
      throw Error(Errc::non_numeric, "annotation line " + std::to_string(line_no) + ": time '" + std::string(t) +
                                         "' is not a number", line_no);
    }
    first = false;
    if (d1 == std::string_view::npos || d2 == std::string_view::npos) {
      throw Error(Errc::ragged_row, "annotation line " + std::to_string(line_no) + " needs time, duration and text",
                  line_no);
    }
    Event e;
    e.time_s = time;
    const std::string_view dur = trim(line.substr(d1 + 1, d2 - d1 - 1));
    try {
      e.duration_s = dur.empty() ? Rational(0) : Rational::parse(dur);
    } catch (const Error&) {
      throw Error(Errc::non_numeric, "annotation line " + std::to_string(line_no) + ": bad duration", line_no);
    }
    if (e.time_s < Rational(0) || e.duration_s < Rational(0)) {
      throw Error(Errc::bad_timestamp, "annotation line " + std::to_string(line_no) + " has a negative time", line_no);
    }
    e.payload = std::string(line.substr(d2 + 1));
    events.push_back(std::move(e));
  }
  return SparseTrack(std::move(name), std::move(events));
}

}  // namespace tsc
