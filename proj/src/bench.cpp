#include "tsc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>

#include <unistd.h>

#include "tsc/csv.hpp"
#include "tsc/error.hpp"
#include "tsc/flac.hpp"
#include "tsc/float_lossless.hpp"
#include "tsc/session.hpp"
#include "tsc/validate.hpp"

namespace tsc::bench {
namespace {

// Uniform double in [0, 1) from the top 53 bits.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<double> as_doubles(const UniformStream& s) {
  std::vector<double> out;
  out.reserve(s.sample_count());
  if (s.format().is_integer()) {
    for (auto v : s.int_samples()) out.push_back(v);
  } else {
    for (auto v : s.float_samples()) out.push_back(v);
  }
  return out;
}

// Text formats round to `digits` decimals; allow that plus float32 rounding.
bool close_at_precision(const UniformStream& source, const UniformStream& parsed, int digits) {
  if (source.sample_count() != parsed.sample_count()) return false;
  const auto a = as_doubles(source);
  const auto b = as_doubles(parsed);
  const double half = 0.5 * std::pow(10.0, -digits);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ulp = std::abs(a[i]) * 0x1.0p-23;
    if (!(std::abs(a[i] - b[i]) <= half + 2 * ulp)) return false;
  }
  return true;
}

UniformStream as_float32(const UniformStream& s) {
  if (!s.format().is_integer()) return s;
  const auto src = s.int_samples();
  std::vector<float> v(src.begin(), src.end());
  return UniformStream(s.name(), s.rate_hz(), s.channels(), SampleFormat(SampleKind::float32), s.start_time_s(),
                       std::move(v), s.meta());
}

UniformStream as_int32(const UniformStream& s) {
  const auto src = s.int_samples();
  return UniformStream(s.name(), s.rate_hz(), s.channels(), SampleFormat(SampleKind::int32), s.start_time_s(),
                       std::vector<std::int32_t>(src.begin(), src.end()), s.meta());
}

bool same_values(const UniformStream& a, const UniformStream& b) {
  return a.sample_count() == b.sample_count() && as_doubles(a) == as_doubles(b);
}

std::uint64_t median_ns(const std::function<void()>& decode, int trials) {
  decode();  // warm-up, discarded
  std::vector<std::uint64_t> ns;
  for (int i = 0; i < trials; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    decode();
    const auto t1 = std::chrono::steady_clock::now();
    ns.push_back(static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()));
  }
  std::sort(ns.begin(), ns.end());
  return ns[ns.size() / 2];
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tsc_bench_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

std::string run_capture(const std::string& command) {
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) throw Error(Errc::io, "cannot run '" + command + "'");
  std::string out;
  char buf[1 << 16];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = ::pclose(pipe);
  if (status != 0) throw Error(Errc::io, "'" + command + "' exited with status " + std::to_string(status));
  return out;
}

std::string quoted(const std::string& path) { return "'" + path + "'"; }

volatile std::size_t g_sink = 0;

}  // namespace

std::string_view profile_name(ProfileKind kind) noexcept {
  switch (kind) {
    case ProfileKind::runlength8: return "runlength8";
    case ProfileKind::unit_range: return "unit_range";
    case ProfileKind::wide_range: return "wide_range";
    case ProfileKind::noise: return "noise";
  }
  return "?";
}

ProfileKind parse_profile(std::string_view text) {
  for (ProfileKind k : kAllProfiles) {
    if (profile_name(k) == text) return k;
  }
  throw Error(Errc::invalid_argument,
              "unknown profile '" + std::string(text) + "' (runlength8, unit_range, wide_range, noise)");
}

std::size_t SyntheticProfile::frames() const {
  const std::int64_t n = (duration_s * rate_hz).round();
  return n < 0 ? 0 : static_cast<std::size_t>(n);
}

SyntheticProfile SyntheticProfile::with_samples(ProfileKind kind, std::size_t samples, std::uint64_t seed) {
  SyntheticProfile p;
  p.kind = kind;
  p.rate_hz = Rational(100);
  p.duration_s = Rational(static_cast<std::int64_t>(samples), 100);
  p.seed = seed;
  return p;
}

UniformStream generate(const SyntheticProfile& p) {
  if (p.channels < 1) throw Error(Errc::invalid_argument, "profile needs at least one channel");
  std::mt19937_64 rng(p.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(p.kind));
  const std::size_t n = p.frames() * static_cast<std::size_t>(p.channels);
  const std::string name(profile_name(p.kind));
  switch (p.kind) {
    case ProfileKind::runlength8: {
      std::vector<std::int32_t> v;
      v.reserve(n);
      std::int32_t level = 0;
      const double log_q = std::log1p(-1.0 / 50.0);
      while (v.size() < n) {
        // 1 + geometric(p = 1/50) has mean 50.
        const auto run = 1 + static_cast<std::size_t>(std::floor(std::log1p(-unit(rng)) / log_q));
        level = std::clamp(level + static_cast<std::int32_t>(rng() % 33) - 16, -128, 127);
        v.insert(v.end(), std::min(run, n - v.size()), level);
      }
      return UniformStream(name, p.rate_hz, p.channels, SampleFormat(SampleKind::int8), Rational(0), std::move(v));
    }
    case ProfileKind::unit_range:
    case ProfileKind::wide_range: {
      const bool wide = p.kind == ProfileKind::wide_range;
      const double limit = wide ? 1e4 : 1.0;
      const double step = wide ? 50.0 : 0.01;
      const double grid = wide ? 100.0 : 1e4;
      std::vector<float> v(n);
      double x = wide ? 0.0 : 0.5;
      for (auto& s : v) {
        x = std::clamp(x + (unit(rng) - 0.5) * 2 * step, wide ? -limit : 0.0, limit);
        s = static_cast<float>(std::round(x * grid) / grid);
      }
      return UniformStream(name, p.rate_hz, p.channels, SampleFormat(SampleKind::float32), Rational(0), std::move(v));
    }
    case ProfileKind::noise: {
      std::vector<std::int32_t> v(n);
      for (auto& s : v) s = static_cast<std::int32_t>(rng() >> 40) - (1 << 23);
      return UniformStream(name, p.rate_hz, p.channels, SampleFormat(SampleKind::int24), Rational(0), std::move(v));
    }
  }
  throw Error(Errc::invalid_argument, "unknown profile");
}

UniformStream convert_format(const UniformStream& s, SampleFormat to) {
  const SampleFormat from = s.format();
  if (from == to) return s;
  if (from.is_integer() && to.is_integer()) {
    const int shift = to.bits_per_sample() - from.bits_per_sample();
    std::vector<std::int32_t> v(s.int_samples().begin(), s.int_samples().end());
    for (auto& x : v) x = shift >= 0 ? static_cast<std::int32_t>(static_cast<std::int64_t>(x) * (std::int64_t{1} << shift)) : (x >> -shift);
    return UniformStream(s.name(), s.rate_hz(), s.channels(), to, s.start_time_s(), std::move(v), s.meta());
  }
  if (from.is_integer()) {
    const double scale = std::ldexp(1.0, -(from.bits_per_sample() - 1));
    std::vector<float> v;
    v.reserve(s.sample_count());
    for (auto x : s.int_samples()) v.push_back(static_cast<float>(x * scale));
    return UniformStream(s.name(), s.rate_hz(), s.channels(), to, s.start_time_s(), std::move(v), s.meta());
  }
  const auto src = s.float_samples();
  float lo = 0, hi = 0;
  if (!src.empty()) {
    const auto [mn, mx] = std::minmax_element(src.begin(), src.end());
    lo = *mn;
    hi = *mx;
  }
  const double span = static_cast<double>(hi) - lo;
  const double out_lo = static_cast<double>(to.min_value());
  const double out_span = static_cast<double>(to.max_value()) - out_lo;
  std::vector<std::int32_t> v;
  v.reserve(src.size());
  for (float x : src) {
    const double t = span > 0 ? (static_cast<double>(x) - lo) / span : 0.5;
    v.push_back(static_cast<std::int32_t>(std::llround(out_lo + t * out_span)));
  }
  return UniformStream(s.name(), s.rate_hz(), s.channels(), to, s.start_time_s(), std::move(v), s.meta());
}

std::string_view format_name(Format f) noexcept {
  switch (f) {
    case Format::csv: return "csv";
    case Format::csv_gz: return "csv_gz";
    case Format::csv_xz: return "csv_xz";
    case Format::f32: return "f32";
    case Format::flac: return "flac";
    case Format::ts_rice32: return "ts_rice32";
    case Format::mkv_full: return "mkv_full";
  }
  return "?";
}

Format parse_format(std::string_view text) {
  for (Format f : kAllFormats) {
    if (format_name(f) == text) return f;
  }
  throw Error(Errc::invalid_argument, "unknown bench format '" + std::string(text) + "'");
}

bool have_tool(const std::string& name) {
  const std::string cmd = "command -v " + name + " >/dev/null 2>&1";
  return std::system(cmd.c_str()) == 0;
}

Measurement measure_format(const UniformStream& stream, Format format, const MeasureOptions& options) {
  if (options.trials < 1) throw Error(Errc::invalid_argument, "at least one timed trial is needed");
  Measurement m;
  m.format = format;
  CsvSpec spec;
  spec.decimal_digits = options.decimal_digits;
  StreamTarget target;
  target.name = stream.name();
  target.format = SampleFormat(SampleKind::float32);
  const Rational rate = stream.rate_hz();
  const int channels = stream.channels();

  std::function<UniformStream()> decode;
  std::function<bool(const UniformStream&)> verify;

  switch (format) {
    case Format::csv: {
      auto text = std::make_shared<std::string>(write_csv(stream, spec));
      m.bytes = text->size();
      decode = [=] { return read_uniform_csv(*text, spec, rate, target); };
      verify = [&](const UniformStream& d) { return close_at_precision(stream, d, spec.decimal_digits); };
      break;
    }
    case Format::csv_gz:
    case Format::csv_xz: {
      const std::string tool = format == Format::csv_gz ? "gzip" : "xz";
      if (!have_tool(tool)) {
        m.status = "skipped(" + tool + ")";
        return m;
      }
      auto dir = std::make_shared<TempDir>();
      const std::string plain = dir->file("data.csv");
      const std::string packed = plain + (format == Format::csv_gz ? ".gz" : ".xz");
      write_file(plain, write_csv(stream, spec));
      run_capture(tool + " -9 -c " + quoted(plain) + " > " + quoted(packed));
      m.bytes = static_cast<std::size_t>(std::filesystem::file_size(packed));
      const std::string cmd = tool + " -dc " + quoted(packed);
      decode = [=] {
        (void)dir;  // keeps the temp files alive
        return read_uniform_csv(run_capture(cmd), spec, rate, target);
      };
      verify = [&](const UniformStream& d) { return close_at_precision(stream, d, spec.decimal_digits); };
      break;
    }
    case Format::f32: {
      auto bytes = std::make_shared<std::vector<std::uint8_t>>(write_f32(as_float32(stream)));
      m.bytes = bytes->size();
      decode = [=] { return read_f32(*bytes, channels, rate, target); };
      verify = [&](const UniformStream& d) { return same_values(stream, d); };
      break;
    }
    case Format::flac: {
      if (!stream.format().is_integer() || stream.format().bits_per_sample() > 24) {
        m.status = "n/a(" + stream.format().name() + ")";
        return m;
      }
      const EncodedTrack enc = encode_stream(stream, CodecChoice::flac);
      auto bytes = std::make_shared<std::vector<std::uint8_t>>(enc.concatenated());
      m.bytes = bytes->size();
      const SampleFormat fmt = stream.format();
      decode = [=] {
        auto d = codec::flac_decode(*bytes);
        return UniformStream(target.name, rate, channels, fmt, Rational(0), std::move(d.samples));
      };
      verify = [&](const UniformStream& d) { return stream_equal(stream, d).equal; };
      break;
    }
    case Format::ts_rice32: {
      const UniformStream wide = stream.format().is_integer() ? as_int32(stream) : stream;
      EncodedTrack enc = encode_stream(wide, CodecChoice::rice32);
      m.bytes = enc.total_bytes();
      auto track = std::make_shared<EncodedTrack>(std::move(enc));
      const SampleFormat fmt = wide.format();
      decode = [=] {
        auto d = codec::rice32_decode(*track);
        SampleBuffer buf;
        if (fmt.is_integer()) buf = std::move(d.bits);
        else buf = codec::bits_to_float(d.bits);
        return UniformStream(target.name, rate, channels, fmt, Rational(0), std::move(buf));
      };
      verify = [wide](const UniformStream& d) { return stream_equal(wide, d).equal; };
      break;
    }
    case Format::mkv_full: {
      const Dataset ds({}, {stream}, {});
      auto bytes = std::make_shared<std::vector<std::uint8_t>>(pack(ds).container);
      m.bytes = bytes->size();
      decode = [=] { return unpack(*bytes).streams().at(0); };
      verify = [&](const UniformStream& d) { return stream_equal(stream, d).equal; };
      break;
    }
  }

  try {
    if (!verify(decode())) {
      m.status = "error(verify)";
      return m;
    }
  } catch (const Error& e) {
    m.status = "error(" + std::string(errc_name(e.code())) + ")";
    return m;
  }
  m.decode_ns = median_ns([&] { g_sink = g_sink + decode().sample_count(); }, options.trials);
  m.trials = options.trials;
  return m;
}

const BenchRow* BenchReport::find(std::string_view profile, std::size_t samples, Format format) const {
  for (const auto& r : rows) {
    if (r.profile == profile && r.samples == samples && r.m.format == format) return &r;
  }
  return nullptr;
}

BenchReport report(const std::vector<ProfileResult>& results, int decimal_digits) {
  BenchReport out;
  for (const auto& pr : results) {
    const Measurement* base = nullptr;
    for (const auto& m : pr.measurements) {
      if (m.format == Format::csv && m.ok()) base = &m;
    }
    if (base == nullptr || base->bytes == 0) {
      throw Error(Errc::invalid_argument,
                  "profile " + pr.profile + " at " + std::to_string(pr.samples) + " samples has no CSV baseline");
    }
    for (const auto& m : pr.measurements) {
      BenchRow row;
      row.profile = pr.profile;
      row.samples = pr.samples;
      row.sample_format = pr.sample_format;
      row.m = m;
      row.digits = decimal_digits;
      if (m.ok()) {
        row.storage_factor = static_cast<double>(m.bytes) / static_cast<double>(base->bytes);
        row.runtime_factor =
            base->decode_ns == 0 ? 0.0 : static_cast<double>(m.decode_ns) / static_cast<double>(base->decode_ns);
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

BenchReport run(const BenchPlan& plan) {
  std::vector<ProfileResult> results;
  for (ProfileKind kind : plan.profiles) {
    for (std::size_t size : plan.sizes) {
      const UniformStream s = generate(SyntheticProfile::with_samples(kind, size, plan.seed));
      ProfileResult pr;
      pr.profile = std::string(profile_name(kind));
      pr.samples = size;
      pr.sample_format = s.format().name();
      pr.measurements.push_back(measure_format(s, Format::csv, plan.options));
      for (Format f : plan.formats) {
        if (f != Format::csv) pr.measurements.push_back(measure_format(s, f, plan.options));
      }
      results.push_back(std::move(pr));
    }
  }
  return report(results, plan.options.decimal_digits);
}

std::string render_text(const BenchReport& r) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-11s %9s %-8s %-10s %12s %9s %14s %9s  %s\n", "profile", "samples", "sformat",
                "format", "bytes", "storage", "decode_ns", "runtime", "status");
  out << line;
  for (const auto& row : r.rows) {
    const std::string fmt(format_name(row.m.format));
    if (row.m.ok()) {
      std::snprintf(line, sizeof line, "%-11s %9zu %-8s %-10s %12zu %9.4f %14llu %9.4f  ok\n", row.profile.c_str(),
                    row.samples, row.sample_format.c_str(), fmt.c_str(), row.m.bytes, row.storage_factor,
                    static_cast<unsigned long long>(row.m.decode_ns), row.runtime_factor);
    } else {
      std::snprintf(line, sizeof line, "%-11s %9zu %-8s %-10s %12s %9s %14s %9s  %s\n", row.profile.c_str(),
                    row.samples, row.sample_format.c_str(), fmt.c_str(), "—", "—", "—", "—", row.m.status.c_str());
    }
    out << line;
  }
  out << "Factors are relative to plain CSV with " << (r.rows.empty() ? 6 : r.rows.front().digits)
      << " decimal digits; decode times are medians of warm in-memory runs.\n"
      << "SQL, NoSQL and HDF5 stores are not measured here.\n";
  return out.str();
}

std::string render_machine(const BenchReport& r) {
  std::ostringstream out;
  for (const auto& row : r.rows) {
    out << "BENCH profile=" << row.profile << " samples=" << row.samples << " sample_format=" << row.sample_format
        << " format=" << format_name(row.m.format) << " status=" << row.m.status;
    if (row.m.ok()) {
      out << " bytes=" << row.m.bytes << " storage_factor=" << shortest(row.storage_factor)
          << " decode_ns=" << row.m.decode_ns << " runtime_factor=" << shortest(row.runtime_factor)
          << " trials=" << row.m.trials;
    } else {
      out << " bytes=- storage_factor=- decode_ns=- runtime_factor=- trials=0";
    }
    out << " digits=" << row.digits << "\n";
  }
  return out.str();
}

BenchReport parse_machine(std::string_view text) {
  BenchReport r;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.starts_with("BENCH ")) continue;
    std::istringstream fields(line.substr(6));
    std::string kv;
    BenchRow row;
    try {
      while (fields >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(Errc::malformed, "field without '='", line_no);
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        if (value == "-") continue;
        if (key == "profile") row.profile = value;
        else if (key == "samples") row.samples = std::stoull(value);
        else if (key == "sample_format") row.sample_format = value;
        else if (key == "format") row.m.format = parse_format(value);
        else if (key == "status") row.m.status = value;
        else if (key == "bytes") row.m.bytes = std::stoull(value);
        else if (key == "storage_factor") row.storage_factor = std::stod(value);
        else if (key == "decode_ns") row.m.decode_ns = std::stoull(value);
        else if (key == "runtime_factor") row.runtime_factor = std::stod(value);
        else if (key == "trials") row.m.trials = std::stoi(value);
        else if (key == "digits") row.digits = std::stoi(value);
      }
    } catch (const std::logic_error&) {
      throw Error(Errc::malformed, "bad BENCH record on line " + std::to_string(line_no), line_no);
    }
    r.rows.push_back(std::move(row));
  }
  return r;
}

}  // namespace tsc::bench
