#include "tsc/ssa.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "tsc/error.hpp"

namespace tsc::ssa {
namespace {

const Rational kCentisecond(1, 100);

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && lower(s.substr(0, prefix.size())) == lower(prefix);
}

std::vector<std::string> split_format(std::string_view s) {
  std::vector<std::string> out;
  while (true) {
    const std::size_t comma = s.find(',');
    out.emplace_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

// Splits into exactly n fields; the last one takes the remainder (commas included).
std::optional<std::vector<std::string_view>> split_fields(std::string_view s, std::size_t n) {
  std::vector<std::string_view> out;
  out.reserve(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t comma = s.find(',');
    if (comma == std::string_view::npos) return std::nullopt;
    out.push_back(s.substr(0, comma));
    s.remove_prefix(comma + 1);
  }
  out.push_back(s);
  return out;
}

int parse_int_lenient(std::string_view s) {
  s = trim(s);
  // SSA v4 writes "Marked=0" in the first field.
  if (const auto eq = s.find('='); eq != std::string_view::npos) s.remove_prefix(eq + 1);
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

[[noreturn]] void line_error(Errc code, std::size_t line, const std::string& what) {
  throw Error(code, "line " + std::to_string(line) + ": " + what, line);
}

std::string dialogue_field(const Dialogue& d, const std::string& field) {
  const std::string f = lower(field);
  if (f == "layer" || f == "marked") return std::to_string(d.layer);
  if (f == "start") return format_time(d.start);
  if (f == "end") return format_time(d.end);
  if (f == "style") return d.style;
  if (f == "name" || f == "actor") return d.name;
  if (f == "marginl") return std::to_string(d.margin_l);
  if (f == "marginr") return std::to_string(d.margin_r);
  if (f == "marginv") return std::to_string(d.margin_v);
  if (f == "effect") return d.effect;
  if (f == "text") return d.text;
  return {};
}

void render_header(std::string& out, const Document& doc) {
  out += "[Script Info]\n";
  for (const auto& [k, v] : doc.script_info) out += k + ": " + v + "\n";
  out += "\n[" + doc.styles_section + "]\n";
  if (!doc.style_format.empty()) out += "Format: " + doc.style_format + "\n";
  for (const auto& s : doc.styles) out += "Style: " + s + "\n";
}

void render_sections(std::string& out, const Document& doc) {
  for (const auto& sec : doc.extra_sections) {
    out += "\n[" + sec.name + "]\n";
    for (const auto& l : sec.lines) out += l + "\n";
  }
}

std::string join_format(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ", ";
    out += fields[i];
  }
  return out;
}

}  // namespace

std::optional<std::string> Document::info(std::string_view key) const {
  for (const auto& [k, v] : script_info) {
    if (lower(k) == lower(key)) return v;
  }
  return std::nullopt;
}

std::string format_time(const Rational& t) {
  const std::int64_t cs = (t * Rational(100)).round();
  if (cs < 0) throw Error(Errc::invalid_argument, "negative subtitle time");
  char buf[48];
  std::snprintf(buf, sizeof buf, "%lld:%02lld:%02lld.%02lld", static_cast<long long>(cs / 360000),
                static_cast<long long>(cs / 6000 % 60), static_cast<long long>(cs / 100 % 60),
                static_cast<long long>(cs % 100));
  return buf;
}

Rational parse_time(std::string_view text) {
  const std::string_view s = trim(text);
  auto bad = [&]() -> Rational {
    throw Error(Errc::bad_timestamp, "malformed timestamp '" + std::string(text) + "'");
  };
  const std::size_t c1 = s.find(':');
  const std::size_t c2 = c1 == std::string_view::npos ? c1 : s.find(':', c1 + 1);
  if (c2 == std::string_view::npos) return bad();
  auto number = [&](std::string_view part, std::int64_t& out) {
    if (part.empty() || part.size() > 12) return false;
    for (char c : part) {
      if (c < '0' || c > '9') return false;
    }
    std::from_chars(part.data(), part.data() + part.size(), out);
    return true;
  };
  std::int64_t h = 0, m = 0, sec = 0;
  std::string_view secs = s.substr(c2 + 1);
  std::string_view frac;
  if (const auto dot = secs.find('.'); dot != std::string_view::npos) {
    frac = secs.substr(dot + 1);
    secs = secs.substr(0, dot);
    if (frac.empty() || frac.size() > 9) return bad();
  }
  if (!number(s.substr(0, c1), h) || !number(s.substr(c1 + 1, c2 - c1 - 1), m) || !number(secs, sec)) return bad();
  if (m >= 60 || sec >= 60) return bad();
  Rational t(h * 3600 + m * 60 + sec);
  if (!frac.empty()) {
    std::int64_t f = 0;
    if (!number(frac, f)) return bad();
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    t += Rational(f, den);
  }
  return t;
}

std::string event_text(const Event& e) {
  std::string out;
  if (e.position) out += "{\\pos(" + std::to_string(e.position->x) + "," + std::to_string(e.position->y) + ")}";
  for (char c : e.payload) {
    if (c == '\n') out += "\\N";
    else out.push_back(c);
  }
  return out;
}

std::pair<std::string, std::optional<Position>> split_event_text(std::string_view text) {
  std::optional<Position> pos;
  constexpr std::string_view kPos = "{\\pos(";
  if (text.substr(0, kPos.size()) == kPos) {
    const std::size_t close = text.find(")}");
    const std::size_t comma = text.find(',');
    if (close != std::string_view::npos && comma != std::string_view::npos && comma < close) {
      Position p;
      const auto xs = text.substr(kPos.size(), comma - kPos.size());
      const auto ys = text.substr(comma + 1, close - comma - 1);
      const auto rx = std::from_chars(xs.data(), xs.data() + xs.size(), p.x);
      const auto ry = std::from_chars(ys.data(), ys.data() + ys.size(), p.y);
      if (rx.ec == std::errc() && rx.ptr == xs.data() + xs.size() && ry.ec == std::errc() &&
          ry.ptr == ys.data() + ys.size()) {
        pos = p;
        text.remove_prefix(close + 2);
      }
    }
  }
  std::string payload;
  payload.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size() && text[i + 1] == 'N') {
      payload.push_back('\n');
      ++i;
    } else {
      payload.push_back(text[i]);
    }
  }
  return {std::move(payload), pos};
}

Document to_document(const SparseTrack& track) {
  Document doc;
  doc.script_info = {{"Title", track.name()},
                     {"ScriptType", "v4.00+"},
                     {"WrapStyle", "0"},
                     {"ScaledBorderAndShadow", "yes"},
                     {"PlayResX", "384"},
                     {"PlayResY", "288"}};
  doc.style_format =
      "Name, Fontname, Fontsize, PrimaryColour, SecondaryColour, OutlineColour, BackColour, Bold, Italic, "
      "Underline, StrikeOut, ScaleX, ScaleY, Spacing, Angle, BorderStyle, Outline, Shadow, Alignment, MarginL, "
      "MarginR, MarginV, Encoding";
  doc.styles = {"Default,Arial,20,&H00FFFFFF,&H000000FF,&H00000000,&H00000000,0,0,0,0,100,100,0,0,1,2,2,2,10,10,10,1"};
  doc.event_format = split_format(kDefaultEventFormat);
  doc.events.reserve(track.events().size());
  for (const auto& e : track.events()) {
    Dialogue d;
    d.start = e.time_s;
    d.end = e.duration_s == Rational(0) ? e.time_s + kCentisecond : e.time_s + e.duration_s;
    // A short event must not render with end == start, which reads back as
    // instantaneous and re-renders differently.
    const std::int64_t start_cs = (d.start * Rational(100)).round();
    if ((d.end * Rational(100)).round() <= start_cs) d.end = Rational(start_cs + 1, 100);
    d.text = event_text(e);
    doc.events.push_back(std::move(d));
  }
  return doc;
}

std::string render(const Document& doc) {
  std::string out;
  render_header(out, doc);
  out += "\n[Events]\n";
  out += "Format: " + join_format(doc.event_format) + "\n";
  for (const auto& d : doc.events) {
    out += "Dialogue: ";
    for (std::size_t i = 0; i < doc.event_format.size(); ++i) {
      if (i > 0) out.push_back(',');
      out += dialogue_field(d, doc.event_format[i]);
    }
    out.push_back('\n');
  }
  render_sections(out, doc);
  return out;
}

Document parse_document(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  Document doc;
  enum class In { none, info, styles, events, other } in = In::none;
  bool saw_events = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[' && line.back() == ']') {
      const std::string name(line.substr(1, line.size() - 2));
      const std::string lname = lower(name);
      if (lname == "script info") {
        in = In::info;
      } else if (lname == "v4+ styles" || lname == "v4 styles") {
        in = In::styles;
        doc.styles_section = name;
      } else if (lname == "events") {
        in = In::events;
        saw_events = true;
      } else {
        in = In::other;
        doc.extra_sections.push_back({name, {}});
      }
      continue;
    }
    switch (in) {
      case In::none:
        break;
      case In::info: {
        if (line.front() == ';' || line.substr(0, 2) == "!:") break;
        const std::size_t colon = line.find(':');
        if (colon == std::string_view::npos) break;
        doc.script_info.emplace_back(trim(line.substr(0, colon)), trim(line.substr(colon + 1)));
        break;
      }
      case In::styles:
        if (starts_with_ci(line, "Format:")) doc.style_format = std::string(trim(line.substr(7)));
        else if (starts_with_ci(line, "Style:")) doc.styles.emplace_back(trim(line.substr(6)));
        break;
      case In::events: {
        if (starts_with_ci(line, "Format:")) {
          doc.event_format = split_format(line.substr(7));
          break;
        }
        if (!starts_with_ci(line, "Dialogue:")) break;
        if (doc.event_format.empty()) line_error(Errc::missing_format, line_no, "Dialogue before the [Events] Format line");
        std::string_view body = raw.substr(raw.find(':') + 1);
        if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
        const auto fields = split_fields(body, doc.event_format.size());
        if (!fields) line_error(Errc::malformed, line_no, "Dialogue has fewer fields than its Format line");
        Dialogue d;
        bool have_start = false, have_end = false;
        for (std::size_t i = 0; i < doc.event_format.size(); ++i) {
          const std::string f = lower(doc.event_format[i]);
          const std::string_view v = (*fields)[i];
          try {
            if (f == "layer" || f == "marked") d.layer = parse_int_lenient(v);
            else if (f == "start") { d.start = parse_time(v); have_start = true; }
            else if (f == "end") { d.end = parse_time(v); have_end = true; }
            else if (f == "style") d.style = std::string(trim(v));
            else if (f == "name" || f == "actor") d.name = std::string(trim(v));
            else if (f == "marginl") d.margin_l = parse_int_lenient(v);
            else if (f == "marginr") d.margin_r = parse_int_lenient(v);
            else if (f == "marginv") d.margin_v = parse_int_lenient(v);
            else if (f == "effect") d.effect = std::string(trim(v));
            else if (f == "text") d.text = std::string(v);
          } catch (const Error& e) {
            line_error(e.code(), line_no, e.what());
          }
        }
        if (!have_start || !have_end) line_error(Errc::missing_format, line_no, "Format line lacks Start or End");
        if (d.end < d.start) line_error(Errc::bad_timestamp, line_no, "Dialogue ends before it starts");
        doc.events.push_back(std::move(d));
        break;
      }
      case In::other:
        doc.extra_sections.back().lines.emplace_back(raw);
        break;
    }
  }
  if (!saw_events || doc.event_format.empty()) {
    throw Error(Errc::missing_format, "document has no [Events] section with a Format line");
  }
  if (std::find_if(doc.event_format.begin(), doc.event_format.end(),
                   [](const std::string& f) { return lower(f) == "text"; }) != doc.event_format.end() - 1) {
    throw Error(Errc::missing_format, "Text must be the last field of the [Events] Format line");
  }
  return doc;
}

SparseTrack to_track(const Document& doc, std::string name) {
  if (name.empty()) name = doc.info("Title").value_or("subtitles");
  std::vector<Event> events;
  events.reserve(doc.events.size());
  for (const auto& d : doc.events) {
    Event e;
    e.time_s = d.start;
    e.duration_s = d.end - d.start;
    if (e.duration_s == kCentisecond) e.duration_s = Rational(0);
    auto [payload, pos] = split_event_text(d.text);
    e.payload = std::move(payload);
    e.position = pos;
    events.push_back(std::move(e));
  }
  return SparseTrack(std::move(name), std::move(events));
}

std::string serialize(const SparseTrack& track) { return render(to_document(track)); }

SparseTrack parse(std::string_view text, std::string name) { return to_track(parse_document(text), std::move(name)); }

std::string codec_private(const Document& doc) {
  std::string out;
  render_header(out, doc);
  render_sections(out, doc);
  out += "\n[Events]\n";
  out += "Format: " + join_format(doc.event_format) + "\n";
  return out;
}

std::string block_text(const Dialogue& d, std::size_t read_order) {
  return std::to_string(read_order) + "," + std::to_string(d.layer) + "," + d.style + "," + d.name + "," +
         std::to_string(d.margin_l) + "," + std::to_string(d.margin_r) + "," + std::to_string(d.margin_v) + "," +
         d.effect + "," + d.text;
}

Dialogue parse_block_text(std::string_view text, const Rational& start, const Rational& end) {
  const auto f = split_fields(text, 9);
  if (!f) throw Error(Errc::malformed, "subtitle block has fewer than 9 fields");
  Dialogue d;
  d.start = start;
  d.end = end;
  d.layer = parse_int_lenient((*f)[1]);
  d.style = std::string((*f)[2]);
  d.name = std::string((*f)[3]);
  d.margin_l = parse_int_lenient((*f)[4]);
  d.margin_r = parse_int_lenient((*f)[5]);
  d.margin_v = parse_int_lenient((*f)[6]);
  d.effect = std::string((*f)[7]);
  d.text = std::string((*f)[8]);
  return d;
}

std::string default_formatter(std::span<const double> values) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out.push_back(',');
    const auto r = std::to_chars(buf, buf + sizeof buf, values[i]);
    out.append(buf, r.ptr);
  }
  return out;
}

SparseTrack events_from_low_rate_stream(const TimecodedSeries& series, const ValueFormatter& formatter,
                                        const Rational& max_duration_s) {
  if (series.rows() == 0) throw Error(Errc::empty_input, "series '" + series.name + "' is empty");
  const auto ch = static_cast<std::size_t>(series.channels);
  std::vector<Event> events;
  events.reserve(series.rows());
  for (std::size_t i = 0; i < series.rows(); ++i) {
    Event e;
    e.time_s = Rational::from_double(series.timestamps[i], 1'000'000);
    e.duration_s = max_duration_s;
    if (i + 1 < series.rows()) {
      const Rational next = Rational::from_double(series.timestamps[i + 1], 1'000'000);
      e.duration_s = std::clamp(next - e.time_s, Rational(0), max_duration_s);
    }
    e.payload = formatter(std::span(series.values).subspan(i * ch, ch));
    events.push_back(std::move(e));
  }
  return SparseTrack(series.name, std::move(events));
}

}  // namespace tsc::ssa
