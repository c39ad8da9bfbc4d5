#include "tsc/validate.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tsc/error.hpp"

namespace tsc {

JitterReport validate_uniform(std::span<const double> timestamps, const Rational& rate_hz, double slack_s) {
  if (rate_hz <= Rational(0)) throw Error(Errc::invalid_argument, "rate must be positive");
  if (!(slack_s >= 0.0)) throw Error(Errc::invalid_argument, "slack must be non-negative");
  JitterReport report;
  report.inferred_rate_hz = rate_hz;
  const double limit = 1.0 / rate_hz.to_double();
  const double bound = limit * (1.0 + kJitterTolerance) + slack_s;
  for (std::size_t i = 0; i + 1 < timestamps.size(); ++i) {
    const double delta = timestamps[i + 1] - timestamps[i];
    if (!(delta >= 0.0)) {
      throw Error(Errc::non_monotonic,
                  "timestamps not monotonic at index " + std::to_string(i + 1), i + 1);
    }
    report.max_delta_s = std::max(report.max_delta_s, delta);
    if (delta > bound) report.violations.push_back({i, delta, limit});
  }
  const std::size_t n = timestamps.size();
  if (n >= 2) {
    const double span = timestamps[n - 1] - timestamps[0];
    if (span > 0.0) {
      report.inferred_rate_hz = Rational::from_double(static_cast<double>(n - 1) / span, 1'000'000);
    }
  }
  report.valid = report.violations.empty();
  return report;
}

std::vector<double> grid_timestamps(const UniformStream& stream) {
  std::vector<double> out(stream.frame_count());
  const double start = stream.start_time_s().to_double();
  const double rate = stream.rate_hz().to_double();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = start + static_cast<double>(i) / rate;
  return out;
}

std::string render(const JitterReport& report, std::size_t max_listed) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "valid: %s\nviolations: %zu\nmax_delta_s: %.9g\ninferred_rate_hz: %s\n",
                report.valid ? "yes" : "no", report.violations.size(), report.max_delta_s,
                report.inferred_rate_hz.to_string().c_str());
  out << line;
  for (std::size_t i = 0; i < report.violations.size() && i < max_listed; ++i) {
    const auto& v = report.violations[i];
    std::snprintf(line, sizeof line, "  at i=%zu: delta %.9g s > limit %.9g s\n", v.index, v.delta_s, v.limit_s);
    out << line;
  }
  if (report.violations.size() > max_listed) {
    out << "  ... " << report.violations.size() - max_listed << " more\n";
  }
  return out.str();
}

namespace {

Comparison differ(std::string what) { return Comparison{false, std::move(what)}; }

std::string meta_text(const StreamMeta& m) {
  std::string s = "units=" + m.units;
  if (m.si_conversion_factor) s += " si=" + m.si_conversion_factor->to_string();
  if (m.range_min) s += " min=" + m.range_min->to_string();
  if (m.range_max) s += " max=" + m.range_max->to_string();
  for (const auto& [k, v] : m.extra) s += " " + k + "=" + v;
  return s;
}

}  // namespace

Comparison stream_equal(const UniformStream& a, const UniformStream& b) {
  const std::string tag = "stream '" + a.name() + "': ";
  if (a.name() != b.name()) return differ("stream name '" + a.name() + "' vs '" + b.name() + "'");
  if (a.rate_hz() != b.rate_hz()) return differ(tag + "rate " + a.rate_hz().to_string() + " vs " + b.rate_hz().to_string());
  if (a.channels() != b.channels()) return differ(tag + "channels differ");
  if (a.format() != b.format()) return differ(tag + "format " + a.format().name() + " vs " + b.format().name());
  if (a.start_time_s() != b.start_time_s()) return differ(tag + "start time differs");
  if (a.meta() != b.meta()) return differ(tag + "meta {" + meta_text(a.meta()) + "} vs {" + meta_text(b.meta()) + "}");
  if (a.sample_count() != b.sample_count()) {
    return differ(tag + "sample count " + std::to_string(a.sample_count()) + " vs " + std::to_string(b.sample_count()));
  }
  if (a.format().is_integer()) {
    auto x = a.int_samples();
    auto y = b.int_samples();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] != y[i]) return differ(tag + "sample " + std::to_string(i) + ": " + std::to_string(x[i]) + " vs " + std::to_string(y[i]));
    }
  } else {
    auto x = a.float_samples();
    auto y = b.float_samples();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::bit_cast<std::uint32_t>(x[i]) != std::bit_cast<std::uint32_t>(y[i])) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "sample %zu: bits %08x vs %08x", i, std::bit_cast<std::uint32_t>(x[i]),
                      std::bit_cast<std::uint32_t>(y[i]));
        return differ(tag + buf);
      }
    }
  }
  return {};
}

Comparison track_equal(const SparseTrack& a, const SparseTrack& b) {
  const std::string tag = "track '" + a.name() + "': ";
  if (a.name() != b.name()) return differ("track name '" + a.name() + "' vs '" + b.name() + "'");
  if (a.events().size() != b.events().size()) {
    return differ(tag + "event count " + std::to_string(a.events().size()) + " vs " + std::to_string(b.events().size()));
  }
  for (std::size_t i = 0; i < a.events().size(); ++i) {
    const Event& x = a.events()[i];
    const Event& y = b.events()[i];
    const std::string at = tag + "event " + std::to_string(i) + ": ";
    if (x.time_s != y.time_s) return differ(at + "time " + x.time_s.to_string() + " vs " + y.time_s.to_string());
    if (x.duration_s != y.duration_s) return differ(at + "duration " + x.duration_s.to_string() + " vs " + y.duration_s.to_string());
    if (x.payload != y.payload) return differ(at + "payload '" + x.payload + "' vs '" + y.payload + "'");
    if (x.position != y.position) return differ(at + "position differs");
  }
  return {};
}

Comparison dataset_equal(const Dataset& a, const Dataset& b) {
  if (a.session_meta() != b.session_meta()) return differ("session metadata differs");
  if (a.streams().size() != b.streams().size()) return differ("stream count differs");
  if (a.tracks().size() != b.tracks().size()) return differ("track count differs");
  for (std::size_t i = 0; i < a.streams().size(); ++i) {
    if (auto c = stream_equal(a.streams()[i], b.streams()[i]); !c) return c;
  }
  for (std::size_t i = 0; i < a.tracks().size(); ++i) {
    if (auto c = track_equal(a.tracks()[i], b.tracks()[i]); !c) return c;
  }
  return {};
}

}  // namespace tsc
