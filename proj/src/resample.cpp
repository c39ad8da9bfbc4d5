#include "tsc/resample.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "tsc/error.hpp"

namespace tsc {
namespace {

// Source samples viewed as (time, channel values) pairs.
struct Source {
  std::size_t rows;
  int channels;
  std::function<double(std::size_t)> time;
  std::function<double(std::size_t, int)> value;
};

std::string fmt_time(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", t);
  return buf;
}

double median_interval(const std::vector<double>& t) {
  std::vector<double> d;
  d.reserve(t.size());
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] > t[i - 1]) d.push_back(t[i] - t[i - 1]);
  }
  if (d.empty()) return 0.0;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
  return d[d.size() / 2];
}

std::int32_t to_int(double v, SampleFormat format, std::size_t index) {
  const double r = std::nearbyint(v);
  if (!std::isfinite(r) || r < static_cast<double>(format.min_value()) || r > static_cast<double>(format.max_value())) {
    throw Error(Errc::invalid_argument,
                "resampled value at sample " + std::to_string(index) + " does not fit " + format.name(), index);
  }
  return static_cast<std::int32_t>(r);
}

// Evaluates the source on the grid grid_start + k / rate, k in [0, count).
UniformStream sample_grid(const Source& src, const Rational& grid_start, const Rational& rate, std::size_t count,
                          const ResampleStrategy& strategy, double gap_threshold, std::string name,
                          SampleFormat format, StreamMeta meta) {
  const bool is_float = format.kind() == SampleKind::float32;
  if (strategy.gap_policy == GapPolicy::fill_nan && !is_float) {
    throw Error(Errc::invalid_argument, "stream '" + name + "': fill_nan needs float32 output");
  }
  const auto channels = static_cast<std::size_t>(src.channels);
  std::vector<float> fout;
  std::vector<std::int32_t> iout;
  if (is_float) fout.resize(count * channels);
  else iout.resize(count * channels);
  auto put = [&](std::size_t k, std::size_t c, double v) {
    if (is_float) fout[k * channels + c] = static_cast<float>(v);
    else iout[k * channels + c] = to_int(v, format, k * channels + c);
  };

  const double start = grid_start.to_double();
  const double step = static_cast<double>(rate.den()) / static_cast<double>(rate.num());
  // Slack for grid points that land on an input time up to rounding.
  const double eps = 1e-9 * std::max(1.0, std::abs(start) + static_cast<double>(count) * step);
  std::size_t j = 0;  // last row with time <= grid time (after advancing)
  for (std::size_t k = 0; k < count; ++k) {
    const double g = start + static_cast<double>(k) * step;
    while (j + 1 < src.rows && src.time(j + 1) <= g + eps) ++j;
    const double tj = src.time(j);
    const bool has_next = j + 1 < src.rows;
    const double tn = has_next ? src.time(j + 1) : tj;
    const bool exact = std::abs(g - tj) <= eps;
    const bool in_gap = has_next && !exact && tn - tj > gap_threshold * (1 + 1e-9);
    if (in_gap) {
      if (strategy.gap_policy == GapPolicy::error) {
        throw Error(Errc::gap_exceeded,
                    "stream '" + name + "': gap from " + fmt_time(tj) + " s to " + fmt_time(tn) + " s exceeds " +
                        fmt_time(gap_threshold) + " s",
                    j);
      }
      for (std::size_t c = 0; c < channels; ++c) {
        put(k, c, strategy.gap_policy == GapPolicy::fill_nan ? std::numeric_limits<double>::quiet_NaN()
                                                             : src.value(j, static_cast<int>(c)));
      }
      continue;
    }
    for (std::size_t c = 0; c < channels; ++c) {
      const int ci = static_cast<int>(c);
      double v = src.value(j, ci);
      if (!exact && has_next && tn > tj) {
        switch (strategy.kind) {
          case Interpolation::hold: break;
          case Interpolation::nearest:
            if (tn - g < g - tj) v = src.value(j + 1, ci);
            break;
          case Interpolation::linear: {
            const double w = (g - tj) / (tn - tj);
            v = v + (src.value(j + 1, ci) - v) * w;
            break;
          }
        }
      }
      put(k, c, v);
    }
  }
  if (is_float) return UniformStream(std::move(name), rate, src.channels, format, grid_start, std::move(fout), std::move(meta));
  return UniformStream(std::move(name), rate, src.channels, format, grid_start, std::move(iout), std::move(meta));
}

Source source_of(const UniformStream& s) {
  const double start = s.start_time_s().to_double();
  const double step = static_cast<double>(s.rate_hz().den()) / static_cast<double>(s.rate_hz().num());
  const int ch = s.channels();
  Source src{s.frame_count(), ch, [start, step](std::size_t i) { return start + static_cast<double>(i) * step; }, {}};
  if (s.format().kind() == SampleKind::float32) {
    const auto v = s.float_samples();
    src.value = [v, ch](std::size_t i, int c) { return static_cast<double>(v[i * static_cast<std::size_t>(ch) + static_cast<std::size_t>(c)]); };
  } else {
    const auto v = s.int_samples();
    src.value = [v, ch](std::size_t i, int c) { return static_cast<double>(v[i * static_cast<std::size_t>(ch) + static_cast<std::size_t>(c)]); };
  }
  return src;
}

// Time of the last frame.
Rational last_time(const UniformStream& s) {
  return s.start_time_s() + Rational(static_cast<std::int64_t>(s.frame_count()) - 1) / s.rate_hz();
}

UniformStream slice(const UniformStream& s, std::size_t first_frame, std::size_t frames) {
  const auto ch = static_cast<std::size_t>(s.channels());
  const Rational start = s.time_of(first_frame);
  if (s.format().kind() == SampleKind::float32) {
    const auto v = s.float_samples().subspan(first_frame * ch, frames * ch);
    return UniformStream(s.name(), s.rate_hz(), s.channels(), s.format(), start, std::vector<float>(v.begin(), v.end()), s.meta());
  }
  const auto v = s.int_samples().subspan(first_frame * ch, frames * ch);
  return UniformStream(s.name(), s.rate_hz(), s.channels(), s.format(), start,
                       std::vector<std::int32_t>(v.begin(), v.end()), s.meta());
}

}  // namespace

std::string_view interpolation_name(Interpolation kind) noexcept {
  switch (kind) {
    case Interpolation::hold: return "hold";
    case Interpolation::nearest: return "nearest";
    case Interpolation::linear: return "linear";
  }
  return "?";
}

ResampleStrategy ResampleStrategy::parse(std::string_view text) {
  ResampleStrategy s;
  std::size_t part = 0;
  while (!text.empty()) {
    const std::size_t colon = std::min(text.find(':'), text.size());
    const std::string_view tok = text.substr(0, colon);
    text = colon < text.size() ? text.substr(colon + 1) : std::string_view{};
    if (part == 0) {
      if (tok == "hold") s.kind = Interpolation::hold;
      else if (tok == "nearest") s.kind = Interpolation::nearest;
      else if (tok == "linear") s.kind = Interpolation::linear;
      else throw Error(Errc::invalid_argument, "unknown resampling strategy '" + std::string(tok) + "'");
    } else if (part == 1) {
      if (tok == "fill_hold") s.gap_policy = GapPolicy::fill_hold;
      else if (tok == "fill_nan") s.gap_policy = GapPolicy::fill_nan;
      else if (tok == "error") s.gap_policy = GapPolicy::error;
      else throw Error(Errc::invalid_argument, "unknown gap policy '" + std::string(tok) + "'");
    } else if (part == 2) {
      s.gap_threshold_s = Rational::parse(tok);
    } else {
      throw Error(Errc::invalid_argument, "too many fields in resampling strategy");
    }
    ++part;
  }
  return s;
}

ResampleStrategy default_strategy(SampleFormat format) {
  ResampleStrategy s;
  s.kind = format.is_integer() ? Interpolation::hold : Interpolation::linear;
  return s;
}

UniformStream resample(const TimecodedSeries& series, const Rational& rate, const ResampleStrategy& strategy,
                       const StreamTarget& target) {
  if (series.rows() == 0) throw Error(Errc::empty_input, "series '" + series.name + "' is empty");
  if (rate <= Rational(0)) throw Error(Errc::invalid_argument, "target rate must be positive");
  const auto& t = series.timestamps;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] < t[i - 1]) {
      throw Error(Errc::non_monotonic,
                  "series '" + series.name + "': timestamp " + std::to_string(i) + " is earlier than its predecessor", i);
    }
  }
  if (t.front() < 0) throw Error(Errc::bad_timestamp, "series '" + series.name + "': negative timestamp", 0);

  const double r = rate.to_double();
  const double tol = 1e-9;
  const auto k0 = static_cast<std::int64_t>(std::ceil(t.front() * r - tol * std::max(1.0, t.front() * r)));
  const auto k1 = static_cast<std::int64_t>(std::floor(t.back() * r + tol * std::max(1.0, t.back() * r)));
  const auto count = static_cast<std::size_t>(std::max<std::int64_t>(k1 - k0 + 1, 1));

  double gap = 0;
  if (strategy.gap_threshold_s) {
    gap = strategy.gap_threshold_s->to_double();
  } else {
    const double m = median_interval(t);
    gap = m > 0 ? 2 * m : std::numeric_limits<double>::infinity();
  }
  const auto ch = static_cast<std::size_t>(series.channels);
  Source src{series.rows(), series.channels, [&t](std::size_t i) { return t[i]; },
             [&series, ch](std::size_t i, int c) { return series.values[i * ch + static_cast<std::size_t>(c)]; }};
  return sample_grid(src, Rational(k0) / rate, rate, count, strategy, gap, target.name, target.format, target.meta);
}

UniformStream resample(const UniformStream& stream, const Rational& rate, const ResampleStrategy& strategy) {
  if (rate <= Rational(0)) throw Error(Errc::invalid_argument, "target rate must be positive");
  if (rate == stream.rate_hz()) return stream;
  if (stream.frame_count() == 0) throw Error(Errc::empty_input, "stream '" + stream.name() + "' is empty");
  const Rational first = Rational((stream.start_time_s() * rate).ceil()) / rate;
  const std::int64_t count = (last_time(stream) * rate).floor() - (first * rate).floor() + 1;
  const double gap = strategy.gap_threshold_s ? strategy.gap_threshold_s->to_double()
                                              : 2.0 / stream.rate_hz().to_double();
  return sample_grid(source_of(stream), first, rate, static_cast<std::size_t>(std::max<std::int64_t>(count, 0)),
                     strategy, gap, stream.name(), stream.format(), stream.meta());
}

std::vector<UniformStream> align(const std::vector<UniformStream>& streams, std::optional<Rational> target_rate,
                                 std::optional<ResampleStrategy> strategy) {
  if (streams.empty()) throw Error(Errc::invalid_argument, "align needs at least one stream");
  Rational rate = streams.front().rate_hz();
  Rational start = streams.front().start_time_s();
  Rational end = last_time(streams.front());
  for (const auto& s : streams) {
    if (s.frame_count() == 0) throw Error(Errc::empty_input, "stream '" + s.name() + "' is empty");
    rate = std::max(rate, s.rate_hz());
    start = std::max(start, s.start_time_s());
    end = std::min(end, last_time(s));
  }
  if (target_rate) rate = *target_rate;
  if (end < start) throw Error(Errc::invalid_argument, "streams have no temporal overlap");
  const auto count = static_cast<std::size_t>(((end - start) * rate).floor() + 1);

  std::vector<UniformStream> out;
  out.reserve(streams.size());
  for (const auto& s : streams) {
    if (s.rate_hz() == rate) {
      const Rational offset = (start - s.start_time_s()) * rate;
      if (offset.is_integer()) {
        const auto first = static_cast<std::size_t>(offset.num());
        if (first == 0 && count == s.frame_count()) out.push_back(s);
        else out.push_back(slice(s, first, count));
        continue;
      }
    }
    const ResampleStrategy st = strategy.value_or(default_strategy(s.format()));
    const double gap = st.gap_threshold_s ? st.gap_threshold_s->to_double() : 2.0 / s.rate_hz().to_double();
    out.push_back(sample_grid(source_of(s), start, rate, count, st, gap, s.name(), s.format(), s.meta()));
  }
  return out;
}

}  // namespace tsc
