#include "quac/session_log.hpp"

#include "quac/clock.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace quac {

using nlohmann::json;

std::string_view to_string(EventStatus s) {
  switch (s) {
    case EventStatus::ok: return "ok";
    case EventStatus::provider_error: return "provider_error";
    case EventStatus::emoji_rejected: return "emoji_rejected";
    case EventStatus::capture_skipped: return "capture_skipped";
    case EventStatus::cancelled: return "cancelled";
  }
  return "?";
}

EventStatus parse_event_status(std::string_view name) {
  for (auto s : {EventStatus::ok, EventStatus::provider_error, EventStatus::emoji_rejected,
                 EventStatus::capture_skipped, EventStatus::cancelled}) {
    if (to_string(s) == name) return s;
  }
  throw Error("unknown event status: " + std::string(name));
}

Timestamp timestamp_of(const LogRecord& r) {
  return std::visit([](const auto& rec) { return rec.timestamp; }, r);
}

json to_json(const FeedbackEvent& e) {
  json j = {
      {"type", "feedback"},
      {"event_id", e.event_id},
      {"ts", to_ms(e.timestamp)},
      {"trigger", to_string(e.trigger)},
      {"kind", to_string(e.kind)},
      {"persona", to_string(e.persona)},
      {"capture_mode", to_string(e.capture_mode)},
      {"memory_depth_used", e.memory_depth_used},
      {"prompt_digest", e.prompt_digest},
      {"reply_text", e.reply_text},
      {"word_count", e.word_count},
      {"latency_ms", e.latency.count()},
      {"status", to_string(e.status)},
  };
  if (e.kind == PayloadKind::emoji) j["emojis"] = e.emojis;
  if (e.audio_ref) {
    j["audio_ref"] = *e.audio_ref;
    j["audio_duration_ms"] = e.audio_duration.count();
  }
  if (e.error_kind) j["error_kind"] = to_string(*e.error_kind);
  if (e.http_status) j["http_status"] = e.http_status;
  if (!e.error_message.empty()) j["error_message"] = e.error_message;
  return j;
}

json to_json(const LogRecord& r) {
  return std::visit(
      [](const auto& rec) -> json {
        using T = std::decay_t<decltype(rec)>;
        if constexpr (std::is_same_v<T, SessionMark>) {
          return {{"type", "session"},
                  {"mark", rec.mark == SessionMark::Kind::start ? "start" : "end"},
                  {"ts", to_ms(rec.timestamp)},
                  {"session_id", rec.session_id},
                  {"schema", rec.schema}};
        } else if constexpr (std::is_same_v<T, ConfigChange>) {
          return {{"type", "config"},
                  {"ts", to_ms(rec.timestamp)},
                  {"key", rec.key},
                  {"old", rec.old_value},
                  {"new", rec.new_value}};
        } else {
          return to_json(rec);
        }
      },
      r);
}

LogRecord record_from_json(const json& j) {
  try {
    const auto type = j.at("type").get<std::string>();
    const Timestamp ts{j.at("ts").get<std::int64_t>()};
    if (type == "session") {
      SessionMark m;
      const auto mark = j.at("mark").get<std::string>();
      if (mark != "start" && mark != "end") throw Error("bad session mark: " + mark);
      m.mark = mark == "start" ? SessionMark::Kind::start : SessionMark::Kind::end;
      m.timestamp = ts;
      m.session_id = j.at("session_id").get<std::string>();
      m.schema = j.value("schema", kLogSchema);
      if (m.schema != kLogSchema) throw Error("unsupported schema " + std::to_string(m.schema));
      return m;
    }
    if (type == "config") {
      return ConfigChange{ts, j.at("key").get<std::string>(), j.at("old").get<std::string>(),
                          j.at("new").get<std::string>()};
    }
    if (type == "feedback") {
      FeedbackEvent e;
      e.event_id = j.at("event_id").get<std::string>();
      e.timestamp = ts;
      e.trigger = parse_trigger_kind(j.at("trigger").get<std::string>());
      e.kind = parse_payload_kind(j.at("kind").get<std::string>());
      e.persona = resolve(j.at("persona").get<std::string>()).id;
      e.capture_mode = parse_capture_mode(j.at("capture_mode").get<std::string>());
      e.memory_depth_used = j.at("memory_depth_used").get<int>();
      e.prompt_digest = j.at("prompt_digest").get<std::string>();
      e.reply_text = j.at("reply_text").get<std::string>();
      e.word_count = j.at("word_count").get<std::size_t>();
      e.latency = Millis{j.at("latency_ms").get<std::int64_t>()};
      e.status = parse_event_status(j.at("status").get<std::string>());
      if (j.contains("emojis")) e.emojis = j["emojis"].get<EmojiSet>();
      if (j.contains("audio_ref")) e.audio_ref = j["audio_ref"].get<std::string>();
      e.audio_duration = Millis{j.value("audio_duration_ms", std::int64_t{0})};
      if (j.contains("error_kind")) {
        e.error_kind = parse_provider_error_kind(j["error_kind"].get<std::string>());
      }
      e.http_status = j.value("http_status", 0);
      e.error_message = j.value("error_message", "");
      return e;
    }
    throw Error("unknown record type: " + type);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed record: ") + e.what());
  }
}

SessionWriter::SessionWriter(const std::filesystem::path& file) : path_(file) {
  file_ = std::fopen(file.c_str(), "ab");
  if (!file_) throw LogIoError("cannot open " + file.string() + ": " + std::strerror(errno));
}

SessionWriter::~SessionWriter() {
  if (file_) std::fclose(file_);
}

void SessionWriter::write_line(const std::string& line) {
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0) {
    const std::string err = std::strerror(errno);
    std::clearerr(file_);
    throw LogIoError("write to " + path_.string() + " failed: " + err);
  }
}

void SessionWriter::flush_pending() {
  while (!pending_.empty()) {
    write_line(pending_.front());
    pending_.pop_front();
  }
}

void SessionWriter::append(const LogRecord& record) {
  const auto ts = timestamp_of(record);
  if (last_ && ts < *last_) {
    throw MonotonicityError("record at " + std::to_string(to_ms(ts)) + " precedes last record at " +
                            std::to_string(to_ms(*last_)));
  }
  last_ = ts;
  pending_.push_back(to_json(record).dump() + "\n");
  flush_pending();
}

LogRecord SharedLog::append(LogRecord record) {
  std::lock_guard lock(mutex_);
  const auto now = clock_.now();
  std::visit([now](auto& rec) { rec.timestamp = now; }, record);
  writer_.append(record);
  return record;
}

ParsedLog parse_log(std::string_view text, const std::string& name) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t\r") == std::string_view::npos) {
    lines.pop_back();
  }

  ParsedLog out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const bool last = i + 1 == lines.size();
    try {
      const auto j = json::parse(lines[i]);
      out.records.push_back(record_from_json(j));
    } catch (const std::exception& e) {
      if (last && i > 0) {
        out.warnings.push_back(name + ":" + std::to_string(i + 1) +
                               ": dropped truncated final line (" + e.what() + ")");
        break;
      }
      throw LogParseError(name, i + 1, e.what());
    }
    const auto* first = i == 0 ? std::get_if<SessionMark>(&out.records.front()) : nullptr;
    if (i == 0 && (!first || first->mark != SessionMark::Kind::start)) {
      throw LogParseError(name, 1, "log must begin with a session start mark");
    }
  }
  return out;
}

ParsedLog read_log(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw LogParseError(file.string(), 0, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_log(ss.str(), file.string());
}

SessionPaths SessionPaths::create(const std::filesystem::path& root, Timestamp start) {
  SessionPaths p;
  auto ms = to_ms(start);
  // Two daemons started within the same millisecond get distinct directories.
  do {
    p.session_id = "session-" + std::to_string(ms++);
    p.dir = root / p.session_id;
  } while (std::filesystem::exists(p.dir));
  p.events = p.dir / "events.jsonl";
  p.audio_dir = p.dir / "audio";
  std::filesystem::create_directories(p.audio_dir);
  return p;
}

}  // namespace quac
