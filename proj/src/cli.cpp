#include "tsc/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "tsc/bench.hpp"
#include "tsc/csv.hpp"
#include "tsc/error.hpp"
#include "tsc/manifest.hpp"
#include "tsc/mkv.hpp"
#include "tsc/session.hpp"
#include "tsc/ssa.hpp"
#include "tsc/validate.hpp"

namespace tsc::cli {
namespace {

int exit_code(Errc code) {
  switch (code) {
    case Errc::io:
    case Errc::invalid_argument: return kExitUsage;
    default: return kExitData;
  }
}

bool instrumented() {
  const char* v = std::getenv("TSC_INSTRUMENT");
  return v != nullptr && std::string_view(v) == "1";
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::pair<Rational, Rational> parse_window(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(Errc::invalid_argument, "--window takes t0:t1 in seconds");
  const Rational a = Rational::parse(text.substr(0, colon));
  const Rational b = Rational::parse(text.substr(colon + 1));
  if (b < a) throw Error(Errc::invalid_argument, "--window end precedes its start");
  return {a, b};
}

std::string fmt_double(double v, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

std::string safe_file_name(const std::string& name) {
  std::string out;
  for (char c : name) out.push_back((std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_');
  return out.empty() ? "track" : out;
}

void report_bytes(const mkv::Demuxer& demux, std::ostream& err) {
  if (!instrumented()) return;
  const auto read = demux.source().bytes_read();
  const auto size = demux.source().size();
  err << "bytes_read=" << read << " file_bytes=" << size << " fraction="
      << fmt_double(size == 0 ? 0.0 : static_cast<double>(read) / static_cast<double>(size)) << "\n";
}

struct PackArgs {
  std::string manifest;
  std::string output;
  bool repair = false;
  std::string rate;
  std::string strategy;
  std::string codec;
  bool crc32 = false;
};

int cmd_pack(const PackArgs& a, std::ostream& out, std::ostream& err) {
  PackManifest m = load_manifest(a.manifest);
  if (!a.output.empty()) m.output = a.output;
  if (!a.rate.empty()) m.rate_hz = Rational::parse(a.rate);
  if (!a.strategy.empty()) m.strategy = ResampleStrategy::parse(a.strategy);
  if (!a.codec.empty()) m.pack.codec = parse_codec_choice(a.codec);
  if (a.crc32) m.pack.mux.crc32 = true;
  if (m.output.empty()) throw Error(Errc::invalid_argument, "no output path: set [output] path or pass -o");

  Dataset d;
  try {
    d = build_dataset(m, BuildOptions{a.repair});
  } catch (const JitterError& e) {
    err << "error: " << e.what() << "\n" << render(e.report());
    return kExitData;
  }
  const PackResult r = pack(d, m.pack);
  write_file(m.output, r.container);

  out << "wrote " << m.output << " (" << r.container.size() << " bytes, " << r.tracks.size() << " tracks)\n";
  out << std::left << std::setw(20) << "track" << std::setw(20) << "codec" << std::right << std::setw(12) << "raw"
      << std::setw(12) << "encoded" << std::setw(9) << "factor" << "\n";
  for (const auto& t : r.tracks) {
    out << std::left << std::setw(20) << t.name << std::setw(20) << t.codec_id << std::right << std::setw(12)
        << t.raw_bytes << std::setw(12) << t.encoded_bytes << std::setw(9) << std::fixed << std::setprecision(4)
        << t.factor() << std::defaultfloat << "\n";
  }
  return kExitOk;
}

struct UnpackArgs {
  std::string container;
  std::string outdir = ".";
  std::string format = "csv";
  std::string tracks;
  std::string window;
  int digits = 6;
};

int cmd_unpack(const UnpackArgs& a, std::ostream& out, std::ostream& err) {
  if (a.format != "csv" && a.format != "f32") throw Error(Errc::invalid_argument, "--format must be csv or f32");
  if (a.digits < 0 || a.digits > 17) throw Error(Errc::invalid_argument, "--digits must be in [0, 17]");
  const auto demux = mkv::Demuxer::from_file(a.container);
  const Skeleton sk = skeleton(demux);

  std::vector<std::uint64_t> selected;
  if (a.tracks.empty()) {
    for (const auto& s : sk.streams) selected.push_back(s.track);
    for (const auto& t : sk.tracks) selected.push_back(t.track);
  } else {
    for (const auto& name : split_list(a.tracks)) {
      const auto* t = demux.find_track(name);
      const bool known = t != nullptr && (std::any_of(sk.streams.begin(), sk.streams.end(), [&](const auto& s) { return s.track == t->number; }) ||
                                          std::any_of(sk.tracks.begin(), sk.tracks.end(), [&](const auto& s) { return s.track == t->number; }));
      if (!known) {
        err << "error: no track named '" << name << "'. Available tracks:\n";
        for (const auto& s : sk.streams) err << "  " << s.name << "\n";
        for (const auto& s : sk.tracks) err << "  " << s.name << "\n";
        return kExitData;
      }
      selected.push_back(t->number);
    }
  }
  std::optional<std::pair<Rational, Rational>> window;
  if (!a.window.empty()) window = parse_window(a.window);

  std::filesystem::create_directories(a.outdir);
  const std::filesystem::path dir(a.outdir);
  PackManifest m;
  m.session = sk.session_meta;
  m.align = false;
  CsvSpec spec;
  spec.decimal_digits = a.digits;
  bool fallback = false;

  // Without a window every selected track is decoded in one pass.
  std::optional<Dataset> full;
  if (!window) full = unpack(demux, selected);

  for (std::uint64_t number : selected) {
    const auto* info = demux.track(number);
    if (info->codec_id == kCodecAss) {
      const SparseTrack t = window ? decode_track_window(demux, number, window->first, window->second).track
                                   : *full->find_track(info->name);
      const std::string file = safe_file_name(info->name) + ".ass";
      write_file((dir / file).string(), ssa::serialize(t));
      m.annotations.push_back(AnnotationSpec{info->name, file});
      out << info->name << " -> " << (dir / file).string() << " (" << t.events().size() << " events)\n";
      continue;
    }
    std::optional<UniformStream> stream;
    if (window) {
      auto w = decode_stream_window(demux, number, window->first, window->second);
      fallback |= !w.used_cues;
      stream.emplace(std::move(w.stream));
    } else {
      stream.emplace(*full->find_stream(info->name));
    }
    InputSpec in;
    in.name = stream->name();
    in.rate_hz = stream->rate_hz();
    in.channels = stream->channels();
    in.format = stream->format();
    in.start_time_s = stream->start_time_s();
    in.meta = stream->meta();
    std::string file;
    if (a.format == "csv") {
      CsvSpec s = spec;
      if (window) {
        // Windows keep their timestamps; start_time is then implied by the rows.
        s.time_column = 0;
        in.time_column = 0;
        in.start_time_s = Rational(0);
      }
      file = safe_file_name(stream->name()) + ".csv";
      write_file((dir / file).string(), write_csv(*stream, s));
      in.kind = InputKind::csv;
    } else {
      file = safe_file_name(stream->name()) + (stream->format().is_integer() ? ".raw" : ".f32");
      write_file((dir / file).string(), write_raw(*stream));
      in.kind = InputKind::f32;
    }
    in.path = file;
    m.inputs.push_back(std::move(in));
    out << stream->name() << " -> " << (dir / file).string() << " (" << stream->frame_count() << " frames)\n";
  }
  write_file((dir / "manifest.ini").string(), render_manifest(m));
  if (fallback) err << "warning: container has no cues; the window was found by a linear scan\n";
  report_bytes(demux, err);
  return kExitOk;
}

int cmd_info(const std::string& path, std::ostream& out, std::ostream& err) {
  const auto demux = mkv::Demuxer::from_file(path);
  const auto& ci = demux.info();
  out << "file: " << path << " (" << demux.source().size() << " bytes)\n";
  out << "doc_type: " << ci.doc_type << " v" << ci.doc_type_version << "\n";
  out << "TimestampScale: " << ci.timestamp_scale << "\n";
  out << "duration_s: " << demux.ticks_to_seconds(static_cast<std::int64_t>(ci.duration)).to_double() << "\n";
  out << "muxing_app: " << ci.muxing_app << "\nwriting_app: " << ci.writing_app << "\n";
  out << "cues: " << ci.cues.size() << (ci.has_cues ? "" : " (no Cues element)") << "\n";
  if (ci.skipped_elements > 0) out << "skipped_elements: " << ci.skipped_elements << "\n";
  for (const auto& [k, v] : ci.session_tags) out << "session." << k << ": " << v << "\n";
  out << "tracks: " << ci.tracks.size() << "\n";
  for (const auto& t : ci.tracks) {
    out << "  #" << t.number << " " << t.name << " type=" << (t.type == 2 ? "audio" : t.type == 17 ? "subtitle" : std::to_string(t.type))
        << " codec=" << t.codec_id;
    if (t.type == 2) {
      out << " rate=" << fmt_double(t.sampling_frequency, 12) << " channels=" << t.channels << " bit_depth=" << t.bit_depth;
    }
    out << "\n";
    for (const auto& [k, v] : t.tags) out << "      " << k << "=" << v << "\n";
  }
  report_bytes(demux, err);
  return kExitOk;
}

struct ValidateArgs {
  std::string path;
  std::string rate;
  int time_column = 0;
  std::string delimiter = ",";
  bool header = false;
  double slack = kDefaultTimeSlack;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  if (a.delimiter.size() != 1) throw Error(Errc::invalid_argument, "--delimiter takes one character");
  CsvSpec spec;
  spec.delimiter = a.delimiter[0];
  spec.has_header = a.header;
  spec.time_column = a.time_column;
  const TimecodedSeries s = read_timecoded_csv(read_file(a.path), spec, a.path);
  const JitterReport r = validate_uniform(s.timestamps, Rational::parse(a.rate), a.slack);
  out << render(r);
  return r.valid ? kExitOk : kExitData;
}

struct BenchArgs {
  std::string profiles;
  std::string sizes = "1e3,1e5";
  std::string formats;
  std::string out;
  int trials = 5;
  int digits = 6;
  std::uint64_t seed = 1;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  bench::BenchPlan plan;
  if (!a.profiles.empty()) {
    plan.profiles.clear();
    for (const auto& p : split_list(a.profiles)) plan.profiles.push_back(bench::parse_profile(p));
  }
  plan.sizes.clear();
  for (const auto& s : split_list(a.sizes)) {
    double v = 0;
    try {
      v = std::stod(s);
    } catch (const std::exception&) {
      throw Error(Errc::invalid_argument, "bad size '" + s + "'");
    }
    if (!(v >= 1 && v <= 1e9)) throw Error(Errc::invalid_argument, "size '" + s + "' out of range");
    plan.sizes.push_back(static_cast<std::size_t>(v));
  }
  if (!a.formats.empty()) {
    plan.formats.clear();
    for (const auto& f : split_list(a.formats)) plan.formats.push_back(bench::parse_format(f));
  }
  if (a.trials < 1) throw Error(Errc::invalid_argument, "--trials must be at least 1");
  plan.options.trials = a.trials;
  plan.options.decimal_digits = a.digits;
  plan.seed = a.seed;
  const bench::BenchReport r = bench::run(plan);
  const std::string machine = bench::render_machine(r);
  out << bench::render_text(r) << "\n" << machine;
  if (!a.out.empty()) write_file(a.out, machine);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pack time-series sessions into Matroska files", "tsc"};
  app.require_subcommand(1);

  PackArgs pa;
  auto* pack_cmd = app.add_subcommand("pack", "Pack the inputs listed in a manifest into one .mkv");
  pack_cmd->add_option("manifest", pa.manifest, "Manifest file")->required();
  pack_cmd->add_option("-o,--output", pa.output, "Output path (overrides [output] path)");
  pack_cmd->add_flag("--repair", pa.repair, "Resample inputs that violate their rate instead of failing");
  pack_cmd->add_option("--rate", pa.rate, "Common rate for align (default: highest input rate)");
  pack_cmd->add_option("--strategy", pa.strategy, "kind[:gap_policy[:threshold_s]], e.g. linear:fill_hold");
  pack_cmd->add_option("--codec", pa.codec, "auto, flac, rice32 or pcm");
  pack_cmd->add_flag("--crc32", pa.crc32, "Add CRC-32 elements to every master element");

  UnpackArgs ua;
  auto* unpack_cmd = app.add_subcommand("unpack", "Extract tracks from an .mkv");
  unpack_cmd->add_option("container", ua.container, "Container file")->required();
  unpack_cmd->add_option("-o,--outdir", ua.outdir, "Output directory");
  unpack_cmd->add_option("--format", ua.format, "csv or f32");
  unpack_cmd->add_option("--tracks", ua.tracks, "Comma-separated track names (default: all)");
  unpack_cmd->add_option("--window", ua.window, "t0:t1 in seconds; reads only the clusters that overlap");
  unpack_cmd->add_option("--digits", ua.digits, "Decimal digits for float CSV output");

  std::string info_path;
  auto* info_cmd = app.add_subcommand("info", "List tracks, codecs, rates, tags and cues");
  info_cmd->add_option("container", info_path, "Container file")->required();

  ValidateArgs va;
  auto* validate_cmd = app.add_subcommand("validate", "Check a time-coded CSV against a rate bound");
  validate_cmd->add_option("csv", va.path, "CSV file with a time column")->required();
  validate_cmd->add_option("--rate", va.rate, "Declared rate in Hz")->required();
  validate_cmd->add_option("--time-column", va.time_column, "Zero-based time column");
  validate_cmd->add_option("--delimiter", va.delimiter, "Field delimiter");
  validate_cmd->add_flag("--header", va.header, "First row is a header");
  validate_cmd->add_option("--slack", va.slack, "Absolute slack in seconds on the 1/rate bound");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Storage and decode-time comparison on synthetic data");
  bench_cmd->add_option("--profiles", ba.profiles, "runlength8,unit_range,wide_range,noise (default: all)");
  bench_cmd->add_option("--sizes", ba.sizes, "Comma-separated sample counts, e.g. 1e3,1e5");
  bench_cmd->add_option("--formats", ba.formats, "csv,csv_gz,csv_xz,f32,flac,ts_rice32,mkv_full (default: all)");
  bench_cmd->add_option("--out", ba.out, "Also write the BENCH lines to this file");
  bench_cmd->add_option("--trials", ba.trials, "Timed trials per format (one extra warm-up is discarded)");
  bench_cmd->add_option("--digits", ba.digits, "Decimal digits for the CSV baseline");
  bench_cmd->add_option("--seed", ba.seed, "Generator seed");

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  }

  try {
    if (pack_cmd->parsed()) return cmd_pack(pa, out, err);
    if (unpack_cmd->parsed()) return cmd_unpack(ua, out, err);
    if (info_cmd->parsed()) return cmd_info(info_path, out, err);
    if (validate_cmd->parsed()) return cmd_validate(va, out);
    if (bench_cmd->parsed()) return cmd_bench(ba, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace tsc::cli
