#pragma once

#include <cstdio>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "quac/image.hpp"
#include "quac/persona.hpp"
#include "quac/prompt.hpp"
#include "quac/providers.hpp"
#include "quac/trigger.hpp"

namespace quac {

inline constexpr int kLogSchema = 1;

enum class EventStatus { ok, provider_error, emoji_rejected, capture_skipped, cancelled };

std::string_view to_string(EventStatus s);
EventStatus parse_event_status(std::string_view name);

/// One finished feedback or emoji run, whatever its outcome.
struct FeedbackEvent {
  std::string event_id;
  Timestamp timestamp{0};
  TriggerKind trigger = TriggerKind::manual;
  PayloadKind kind = PayloadKind::feedback;
  PersonaId persona = PersonaId::mentor;
  CaptureMode capture_mode = CaptureMode::whole_screen;
  int memory_depth_used = 0;
  std::string prompt_digest;
  /// Feedback text, or the raw emoji reply.
  std::string reply_text;
  EmojiSet emojis;
  std::size_t word_count = 0;
  /// Relative to the session directory; feedback runs only.
  std::optional<std::string> audio_ref;
  Millis audio_duration{0};
  Millis latency{0};
  EventStatus status = EventStatus::ok;
  std::optional<ProviderErrorKind> error_kind;
  int http_status = 0;
  std::string error_message;

  bool operator==(const FeedbackEvent&) const = default;
};

struct ConfigChange {
  Timestamp timestamp{0};
  std::string key;
  std::string old_value;
  std::string new_value;
  bool operator==(const ConfigChange&) const = default;
};

struct SessionMark {
  enum class Kind { start, end };
  Kind mark = Kind::start;
  Timestamp timestamp{0};
  std::string session_id;
  int schema = kLogSchema;
  bool operator==(const SessionMark&) const = default;
};

using LogRecord = std::variant<SessionMark, FeedbackEvent, ConfigChange>;

Timestamp timestamp_of(const LogRecord& r);

nlohmann::json to_json(const FeedbackEvent& e);
nlohmann::json to_json(const LogRecord& r);
/// Throws quac::Error on schema violations.
LogRecord record_from_json(const nlohmann::json& j);

class LogParseError : public Error {
 public:
  LogParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class MonotonicityError : public Error {
 public:
  using Error::Error;
};

class LogIoError : public Error {
 public:
  using Error::Error;
};

/// Append-only JSON-lines writer. Each record is one line, flushed before
/// append returns.
class SessionWriter {
 public:
  explicit SessionWriter(const std::filesystem::path& file);
  ~SessionWriter();
  SessionWriter(const SessionWriter&) = delete;
  SessionWriter& operator=(const SessionWriter&) = delete;

  /// Throws MonotonicityError when the record is older than the last one,
  /// LogIoError when the write fails (the record then stays queued and is
  /// written first on the next append or flush_pending).
  void append(const LogRecord& record);
  void flush_pending();
  std::size_t pending() const { return pending_.size(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  void write_line(const std::string& line);

  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::optional<Timestamp> last_;
  std::deque<std::string> pending_;
};

class Clock;

/// Serializes appends from several threads and stamps each record with the
/// clock under the same lock, so file order and timestamp order agree.
class SharedLog {
 public:
  SharedLog(SessionWriter& writer, Clock& clock) : writer_(writer), clock_(clock) {}

  /// Overwrites the record's timestamp with now and appends it. Returns the
  /// stamped record.
  LogRecord append(LogRecord record);

 private:
  std::mutex mutex_;
  SessionWriter& writer_;
  Clock& clock_;
};

struct ParsedLog {
  std::vector<LogRecord> records;
  std::vector<std::string> warnings;
};

/// Parses JSON lines. A malformed final line is treated as a torn write:
/// dropped with a warning. Any other malformed line throws LogParseError.
ParsedLog parse_log(std::string_view text, const std::string& name);
ParsedLog read_log(const std::filesystem::path& file);

/// A session directory: session-<start-ms>/events.jsonl plus audio/.
struct SessionPaths {
  std::filesystem::path dir;
  std::filesystem::path events;
  std::filesystem::path audio_dir;
  std::string session_id;

  static SessionPaths create(const std::filesystem::path& root, Timestamp start);
};

}  // namespace quac
