#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsc/model.hpp"

namespace tsc::ssa {

struct Dialogue {
  int layer = 0;
  Rational start;
  Rational end;
  std::string style = "Default";
  std::string name;
  int margin_l = 0;
  int margin_r = 0;
  int margin_v = 0;
  std::string effect;
  std::string text;  // raw SSA text, override tags and "\N" escapes included

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

/// Section kept verbatim (e.g. [Fonts], [Graphics]).
struct Section {
  std::string name;
  std::vector<std::string> lines;

  friend bool operator==(const Section&, const Section&) = default;
};

struct Document {
  std::vector<std::pair<std::string, std::string>> script_info;  // in file order
  std::string styles_section = "V4+ Styles";
  std::string style_format;
  std::vector<std::string> styles;  // "Style:" values
  std::vector<std::string> event_format;
  std::vector<Dialogue> events;
  std::vector<Section> extra_sections;

  std::optional<std::string> info(std::string_view key) const;
};

inline constexpr std::string_view kDefaultEventFormat =
    "Layer, Start, End, Style, Name, MarginL, MarginR, MarginV, Effect, Text";

/// H:MM:SS.cc, rounded to the nearest centisecond.
std::string format_time(const Rational& t);
/// Accepts H:MM:SS with an optional fraction of any length; exact.
Rational parse_time(std::string_view text);

/// SSA text for one event: optional {\pos(x,y)} prefix, '\n' escaped as "\N".
std::string event_text(const Event& e);
/// Inverse of event_text: (payload, position).
std::pair<std::string, std::optional<Position>> split_event_text(std::string_view text);

Document to_document(const SparseTrack& track);
std::string render(const Document& doc);
Document parse_document(std::string_view text);

/// Instantaneous events get end = start + 0.01 s; a parsed duration of exactly
/// one centisecond maps back to 0.
std::string serialize(const SparseTrack& track);
/// Track name defaults to the Title entry of [Script Info].
SparseTrack parse(std::string_view text, std::string name = {});
SparseTrack to_track(const Document& doc, std::string name = {});

/// Matroska embedding: CodecPrivate holds everything but the Dialogue lines;
/// each block holds "ReadOrder,Layer,Style,Name,MarginL,MarginR,MarginV,Effect,Text".
std::string codec_private(const Document& doc);
std::string block_text(const Dialogue& d, std::size_t read_order);
/// Parses a block payload; start/end come from the container.
Dialogue parse_block_text(std::string_view text, const Rational& start, const Rational& end);

using ValueFormatter = std::function<std::string(std::span<const double>)>;
/// Values joined by ',' in shortest round-trip notation.
std::string default_formatter(std::span<const double> values);

/// One event per row; duration runs to the next row, capped at max_duration_s.
SparseTrack events_from_low_rate_stream(const TimecodedSeries& series, const ValueFormatter& formatter = default_formatter,
                                        const Rational& max_duration_s = Rational(10));

}  // namespace tsc::ssa
