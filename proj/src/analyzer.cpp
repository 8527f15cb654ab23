#include "quac/analyzer.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

namespace quac {

std::vector<LoadedSession> split_sessions(const ParsedLog& log, const std::string& source) {
  std::vector<LoadedSession> out;
  for (const auto& rec : log.records) {
    if (const auto* mark = std::get_if<SessionMark>(&rec);
        mark && mark->mark == SessionMark::Kind::start) {
      out.push_back({mark->session_id, source, {}});
    }
    // parse_log guarantees the first record is a start mark.
    out.back().records.push_back(rec);
  }
  return out;
}

std::vector<LoadedSession> load_sessions(const std::vector<std::filesystem::path>& files,
                                         std::vector<std::string>& warnings) {
  std::vector<LoadedSession> all;
  for (const auto& f : files) {
    auto parsed = read_log(f);
    warnings.insert(warnings.end(), parsed.warnings.begin(), parsed.warnings.end());
    auto sessions = split_sessions(parsed, f.string());
    all.insert(all.end(), std::make_move_iterator(sessions.begin()),
               std::make_move_iterator(sessions.end()));
  }
  return all;
}

bool is_request(const FeedbackEvent& e) {
  return e.kind == PayloadKind::feedback &&
         (e.status == EventStatus::ok || e.status == EventStatus::provider_error ||
          e.status == EventStatus::cancelled);
}

Timeline timeline(const LoadedSession& session) {
  Timeline t{session.session_id, {}};
  std::optional<Timestamp> origin;
  for (const auto& rec : session.records) {
    const auto* e = std::get_if<FeedbackEvent>(&rec);
    if (!e || !is_request(*e)) continue;
    if (!origin) origin = e->timestamp;
    t.points.push_back({e->timestamp - *origin, e->persona, e->trigger});
  }
  return t;
}

namespace {

SessionSummary summarize(const LoadedSession& s) {
  SessionSummary sum;
  sum.session_id = s.session_id;
  sum.source = s.source;
  for (const auto& rec : s.records) {
    const auto* e = std::get_if<FeedbackEvent>(&rec);
    if (!e) continue;
    ++sum.status_counts[e->status];
    if (e->kind == PayloadKind::emoji) {
      ++sum.emoji_events;
      if (e->status == EventStatus::ok) ++sum.emoji_ok;
      continue;
    }
    if (!is_request(*e)) continue;
    ++sum.total_events;
    ++(e->trigger == TriggerKind::manual ? sum.manual_count : sum.auto_count);
    ++sum.persona_counts[e->persona];
    if (!sum.first) sum.first = e->timestamp;
    sum.last = e->timestamp;
  }
  sum.timeline = timeline(s);
  return sum;
}

SessionStats totals_from(std::vector<SessionSummary> sessions, std::vector<std::string> warnings) {
  SessionStats st;
  st.sessions = std::move(sessions);
  st.warnings = std::move(warnings);
  for (const auto& s : st.sessions) {
    st.total_events += s.total_events;
    st.manual_total += s.manual_count;
    st.auto_total += s.auto_count;
    st.emoji_total += s.emoji_events;
    for (const auto& [p, n] : s.persona_counts) st.persona_totals[p] += n;
    for (const auto& pt : s.timeline.points) {
      if (pt.trigger == TriggerKind::manual) ++st.manual_persona_totals[pt.persona];
    }
  }
  return st;
}

std::optional<std::pair<PersonaId, int>> top_of(const std::map<PersonaId, int>& counts) {
  std::optional<std::pair<PersonaId, int>> best;
  for (const auto& p : list_personas()) {
    auto it = counts.find(p.id);
    if (it == counts.end() || it->second == 0) continue;
    if (!best || it->second > best->second) best = {p.id, it->second};
  }
  return best;
}

}  // namespace

double SessionStats::mean_total_per_session() const {
  return sessions.empty() ? 0.0 : static_cast<double>(total_events) / sessions.size();
}

double SessionStats::mean_manual_per_session() const {
  return sessions.empty() ? 0.0 : static_cast<double>(manual_total) / sessions.size();
}

double SessionStats::mean_auto_per_session() const {
  return sessions.empty() ? 0.0 : static_cast<double>(auto_total) / sessions.size();
}

std::optional<std::pair<PersonaId, int>> SessionStats::top_persona() const {
  return top_of(persona_totals);
}

std::optional<std::pair<PersonaId, int>> SessionStats::top_manual_persona() const {
  return top_of(manual_persona_totals);
}

SessionStats analyze_sessions(const std::vector<LoadedSession>& sessions) {
  std::vector<SessionSummary> sums;
  sums.reserve(sessions.size());
  for (const auto& s : sessions) sums.push_back(summarize(s));
  return totals_from(std::move(sums), {});
}

SessionStats analyze(const std::vector<std::filesystem::path>& files) {
  std::vector<std::string> warnings;
  const auto sessions = load_sessions(files, warnings);
  auto st = analyze_sessions(sessions);
  st.warnings = std::move(warnings);
  return st;
}

SessionStats combine(const SessionStats& a, const SessionStats& b) {
  auto sessions = a.sessions;
  sessions.insert(sessions.end(), b.sessions.begin(), b.sessions.end());
  auto warnings = a.warnings;
  warnings.insert(warnings.end(), b.warnings.begin(), b.warnings.end());
  return totals_from(std::move(sessions), std::move(warnings));
}

std::string format_mean(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

nlohmann::json stats_to_json(const SessionStats& st) {
  auto counts = [](const std::map<PersonaId, int>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [p, n] : m) j[std::string(to_string(p))] = n;
    return j;
  };
  nlohmann::json sessions = nlohmann::json::array();
  for (const auto& s : st.sessions) {
    nlohmann::json statuses = nlohmann::json::object();
    for (const auto& [k, n] : s.status_counts) statuses[std::string(to_string(k))] = n;
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : s.timeline.points) {
      points.push_back({{"offset_ms", p.offset.count()},
                        {"persona", to_string(p.persona)},
                        {"trigger", to_string(p.trigger)}});
    }
    sessions.push_back({
        {"session_id", s.session_id},
        {"source", s.source},
        {"total_events", s.total_events},
        {"manual_count", s.manual_count},
        {"auto_count", s.auto_count},
        {"emoji_events", s.emoji_events},
        {"emoji_ok", s.emoji_ok},
        {"persona_counts", counts(s.persona_counts)},
        {"status_counts", statuses},
        {"first_ts", s.first ? nlohmann::json(to_ms(*s.first)) : nlohmann::json()},
        {"last_ts", s.last ? nlohmann::json(to_ms(*s.last)) : nlohmann::json()},
        {"timeline", points},
    });
  }
  nlohmann::json top;
  if (auto t = st.top_persona()) top = {{"persona", to_string(t->first)}, {"count", t->second}};
  return {
      {"session_count", st.session_count()},
      {"total_events", st.total_events},
      {"manual_total", st.manual_total},
      {"auto_total", st.auto_total},
      {"emoji_total", st.emoji_total},
      {"mean_total_per_session", st.mean_total_per_session()},
      {"mean_manual_per_session", st.mean_manual_per_session()},
      {"mean_auto_per_session", st.mean_auto_per_session()},
      {"persona_totals", counts(st.persona_totals)},
      {"manual_persona_totals", counts(st.manual_persona_totals)},
      {"top_persona", top},
      {"sessions", sessions},
      {"warnings", st.warnings},
  };
}

std::string render_report(const SessionStats& st) {
  std::ostringstream out;
  out << "sessions: " << st.session_count() << "\n"
      << "feedback requests: " << st.total_events << " (manual " << st.manual_total << ", auto "
      << st.auto_total << ")\n"
      << "emoji runs: " << st.emoji_total << "\n"
      << "mean per session: " << format_mean(st.mean_total_per_session()) << " (manual "
      << format_mean(st.mean_manual_per_session()) << ", auto "
      << format_mean(st.mean_auto_per_session()) << ")\n";
  out << "persona totals:";
  for (const auto& p : list_personas()) {
    auto it = st.persona_totals.find(p.id);
    if (it != st.persona_totals.end()) out << " " << to_string(p.id) << "=" << it->second;
  }
  out << "\n";
  if (auto t = st.top_persona()) out << "top persona: " << to_string(t->first) << " (" << t->second << ")\n";
  if (auto t = st.top_manual_persona()) {
    out << "top manual persona: " << to_string(t->first) << " (" << t->second << ")\n";
  }
  return out.str();
}

namespace {

constexpr std::array<const char*, kPersonaCount> kPersonaColors = {
    "#f28e2b", "#e15759", "#76448a", "#edc948", "#59a14f", "#4e79a7", "#ff9da7", "#9c9c9c"};

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const SessionStats& st) {
  constexpr int kLabelW = 160, kRowH = 28, kTop = 30, kPlotW = 720, kMark = 10;
  Millis span{1};
  for (const auto& s : st.sessions) {
    for (const auto& p : s.timeline.points) span = std::max(span, p.offset);
  }
  const int rows = static_cast<int>(std::max<std::size_t>(1, st.sessions.size()));
  const int height = kTop + rows * kRowH + 70;
  const int width = kLabelW + kPlotW + 30;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<text x=\"10\" y=\"18\">Feedback requests (minutes from first request)</text>\n";
  if (st.sessions.empty()) {
    svg << "<text x=\"10\" y=\"" << kTop + 18 << "\">(no sessions)</text>\n";
  }
  for (std::size_t r = 0; r < st.sessions.size(); ++r) {
    const auto& s = st.sessions[r];
    const int cy = kTop + static_cast<int>(r) * kRowH + kRowH / 2;
    svg << "<text x=\"10\" y=\"" << cy + 4 << "\">" << xml_escape(s.session_id) << "</text>\n";
    svg << "<line x1=\"" << kLabelW << "\" y1=\"" << cy << "\" x2=\"" << kLabelW + kPlotW
        << "\" y2=\"" << cy << "\" stroke=\"#ddd\"/>\n";
    if (s.timeline.points.empty()) {
      svg << "<text x=\"" << kLabelW + 4 << "\" y=\"" << cy - 4 << "\" fill=\"#888\">(no requests)</text>\n";
    }
    for (const auto& p : s.timeline.points) {
      const int cx = kLabelW + static_cast<int>(p.offset.count() * kPlotW / span.count());
      const char* color = kPersonaColors[static_cast<std::size_t>(p.persona)];
      if (p.trigger == TriggerKind::manual) {
        svg << "<rect class=\"manual\" x=\"" << cx - kMark / 2 << "\" y=\"" << cy - kMark / 2
            << "\" width=\"" << kMark << "\" height=\"" << kMark << "\" fill=\"" << color
            << "\"><title>" << to_string(p.persona) << " manual</title></rect>\n";
      } else {
        svg << "<circle class=\"auto\" cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << kMark / 2
            << "\" fill=\"" << color << "\"><title>" << to_string(p.persona)
            << " auto</title></circle>\n";
      }
    }
  }
  int lx = 10;
  const int ly = kTop + rows * kRowH + 30;
  for (const auto& p : list_personas()) {
    svg << "<rect x=\"" << lx << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\""
        << kPersonaColors[static_cast<std::size_t>(p.id)] << "\"/>"
        << "<text x=\"" << lx + 14 << "\" y=\"" << ly << "\">" << xml_escape(p.display_name)
        << "</text>\n";
    lx += 110;
  }
  svg << "<text x=\"10\" y=\"" << ly + 24 << "\">square = manual, circle = automatic</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string render_text(const SessionStats& st, Millis bucket) {
  std::size_t width = 1;
  std::size_t label = 7;
  for (const auto& s : st.sessions) {
    label = std::max(label, s.session_id.size());
    for (const auto& p : s.timeline.points) {
      width = std::max(width, static_cast<std::size_t>(p.offset / bucket) + 1);
    }
  }
  std::ostringstream out;
  if (st.sessions.empty()) out << "(no sessions)\n";
  for (const auto& s : st.sessions) {
    std::string row(width, '.');
    for (const auto& p : s.timeline.points) {
      auto& cell = row[static_cast<std::size_t>(p.offset / bucket)];
      const char mark = p.trigger == TriggerKind::manual ? '#' : 'o';
      cell = (cell == '.' || cell == mark) ? mark : '*';
    }
    out << s.session_id << std::string(label - s.session_id.size(), ' ') << " |" << row << "| "
        << s.total_events << " (" << s.manual_count << " manual)\n";
  }
  return out.str();
}

}  // namespace quac
