#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quac/session_log.hpp"

namespace quac {

/// Records between one session start mark and the next.
struct LoadedSession {
  std::string session_id;
  std::string source;
  std::vector<LogRecord> records;
};

/// Splits parsed files into sessions. Warnings from torn lines are appended
/// to `warnings`. Throws LogParseError.
std::vector<LoadedSession> load_sessions(const std::vector<std::filesystem::path>& files,
                                         std::vector<std::string>& warnings);
std::vector<LoadedSession> split_sessions(const ParsedLog& log, const std::string& source);

/// A feedback run counts as a request when the user or timer asked for it,
/// whether or not the provider delivered.
bool is_request(const FeedbackEvent& e);

struct TimelinePoint {
  Millis offset{0};
  PersonaId persona = PersonaId::mentor;
  TriggerKind trigger = TriggerKind::manual;
  bool operator==(const TimelinePoint&) const = default;
};

/// Feedback requests of one session, offset from the first request.
struct Timeline {
  std::string session_id;
  std::vector<TimelinePoint> points;
};

Timeline timeline(const LoadedSession& session);

struct SessionSummary {
  std::string session_id;
  std::string source;
  int total_events = 0;  // feedback requests
  int manual_count = 0;
  int auto_count = 0;
  int emoji_events = 0;
  int emoji_ok = 0;
  std::map<PersonaId, int> persona_counts;
  std::map<EventStatus, int> status_counts;
  std::optional<Timestamp> first;
  std::optional<Timestamp> last;
  Timeline timeline;
};

struct SessionStats {
  std::vector<SessionSummary> sessions;
  int total_events = 0;
  int manual_total = 0;
  int auto_total = 0;
  int emoji_total = 0;
  std::map<PersonaId, int> persona_totals;
  std::map<PersonaId, int> manual_persona_totals;
  std::vector<std::string> warnings;

  std::size_t session_count() const { return sessions.size(); }
  double mean_total_per_session() const;
  double mean_manual_per_session() const;
  double mean_auto_per_session() const;
  /// Highest count, ties broken by panel order.
  std::optional<std::pair<PersonaId, int>> top_persona() const;
  std::optional<std::pair<PersonaId, int>> top_manual_persona() const;
};

SessionStats analyze_sessions(const std::vector<LoadedSession>& sessions);
/// Throws LogParseError naming file and line.
SessionStats analyze(const std::vector<std::filesystem::path>& files);

/// Concatenates the sessions of two analyses and recomputes the totals.
SessionStats combine(const SessionStats& a, const SessionStats& b);

/// Fixed two-decimal rendering ("13.25").
std::string format_mean(double v);

nlohmann::json stats_to_json(const SessionStats& stats);
std::string render_report(const SessionStats& stats);

/// One row per session: squares for manual requests, circles for automatic
/// ones, coloured by persona.
std::string render_svg(const SessionStats& stats);
/// Terminal strip per session, one column per `bucket` of time.
/// '#' manual, 'o' automatic, '*' both in the same bucket.
std::string render_text(const SessionStats& stats, Millis bucket = Millis{30'000});

}  // namespace quac
