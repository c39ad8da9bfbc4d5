#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tsc/model.hpp"

namespace tsc::test {

inline UniformStream random_stream(std::string name, SampleFormat format, int channels, std::size_t frames,
                                   Rational rate, std::uint32_t seed, Rational start = Rational(0)) {
  std::mt19937 rng(seed);
  const std::size_t n = frames * static_cast<std::size_t>(channels);
  if (format.is_integer()) {
    std::uniform_int_distribution<std::int64_t> step(-40, 40);
    std::vector<std::int32_t> v(n);
    std::int64_t x = 0;
    for (auto& s : v) {
      x = std::clamp<std::int64_t>(x + step(rng), format.min_value(), format.max_value());
      s = static_cast<std::int32_t>(x);
    }
    return UniformStream(std::move(name), rate, channels, format, start, std::move(v));
  }
  std::normal_distribution<float> step(0.0f, 0.01f);
  std::vector<float> v(n);
  float x = 0.5f;
  for (auto& s : v) {
    x += step(rng);
    s = x;
  }
  return UniformStream(std::move(name), rate, channels, format, start, std::move(v));
}

inline SparseTrack sample_annotations(std::string name, std::size_t count, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::vector<Event> events;
  std::int64_t cs = 0;
  for (std::size_t i = 0; i < count; ++i) {
    cs += 1 + static_cast<std::int64_t>(rng() % 300);
    Event e;
    e.time_s = Rational(cs, 100);
    e.duration_s = (i % 3 == 0) ? Rational(0) : Rational(1 + static_cast<std::int64_t>(rng() % 500), 100);
    e.payload = "label " + std::to_string(i);
    if (i % 4 == 1) e.payload += "\nsecond line";
    if (i % 5 == 2) e.position = Position{static_cast<int>(rng() % 640), static_cast<int>(rng() % 480)};
    events.push_back(std::move(e));
  }
  return SparseTrack(std::move(name), std::move(events));
}

}  // namespace tsc::test
