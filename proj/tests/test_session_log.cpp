#include <doctest.h>

#include <random>

#include "quac/clock.hpp"
#include "quac/session_log.hpp"
#include "support.hpp"

using namespace quac;

namespace {

FeedbackEvent sample_event(int i, Timestamp ts) {
  FeedbackEvent e;
  e.event_id = "evt-" + std::to_string(i);
  e.timestamp = ts;
  e.trigger = i % 3 ? TriggerKind::automatic : TriggerKind::manual;
  e.kind = i % 5 ? PayloadKind::feedback : PayloadKind::emoji;
  e.persona = static_cast<PersonaId>(i % 8);
  e.capture_mode = CaptureMode::cursor_region;
  e.memory_depth_used = i % 3;
  e.prompt_digest = sha256_hex(std::to_string(i));
  if (e.kind == PayloadKind::emoji) {
    e.reply_text = "🔥 ✨";
    e.emojis = {"🔥", "✨"};
  } else {
    e.reply_text = "Reply \"" + std::to_string(i) + "\"\nwith\ttabs — and dashes";
    e.audio_ref = "audio/" + e.event_id + ".mp3";
    e.audio_duration = Millis{1234 + i};
  }
  e.word_count = word_count(e.reply_text);
  e.latency = Millis{3000 + i};
  if (i % 7 == 0) {
    e.status = EventStatus::provider_error;
    e.error_kind = ProviderErrorKind::rate_limited;
    e.http_status = 429;
    e.error_message = "HTTP 429";
  }
  return e;
}

SessionMark start_mark(Timestamp ts) { return {SessionMark::Kind::start, ts, "session-x", kLogSchema}; }

}  // namespace

TEST_CASE("records round trip through json") {
  for (int i = 0; i < 50; ++i) {
    const LogRecord r = sample_event(i, Timestamp{1000 + i});
    CHECK(record_from_json(nlohmann::json::parse(to_json(r).dump())) == r);
  }
  const LogRecord c = ConfigChange{Timestamp{5}, "persona", "mentor", "critic"};
  CHECK(record_from_json(to_json(c)) == c);
  const LogRecord m = start_mark(Timestamp{1});
  CHECK(record_from_json(to_json(m)) == m);
}

TEST_CASE("1000 appends read back identically, one line each") {
  testing::TempDir dir;
  const auto file = dir / "events.jsonl";
  std::vector<LogRecord> written;
  {
    SessionWriter w(file);
    written.push_back(start_mark(Timestamp{0}));
    w.append(written.back());
    for (int i = 1; i < 1000; ++i) {
      written.push_back(sample_event(i, Timestamp{i * 10}));
      w.append(written.back());
    }
  }
  const auto text = testing::read_file(file);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1000);
  const auto parsed = read_log(file);
  CHECK(parsed.warnings.empty());
  CHECK(parsed.records == written);
}

TEST_CASE("appends are visible on disk before append returns") {
  testing::TempDir dir;
  SessionWriter w(dir / "e.jsonl");
  w.append(start_mark(Timestamp{0}));
  w.append(sample_event(1, Timestamp{1}));
  CHECK(read_log(dir / "e.jsonl").records.size() == 2);
}

TEST_CASE("writer refuses records older than the last") {
  testing::TempDir dir;
  SessionWriter w(dir / "e.jsonl");
  w.append(start_mark(Timestamp{100}));
  w.append(sample_event(1, Timestamp{100}));
  CHECK_THROWS_AS(w.append(sample_event(2, Timestamp{99})), MonotonicityError);
}

TEST_CASE("write failure surfaces and the record stays queued") {
  if (!std::filesystem::exists("/dev/full")) return;
  SessionWriter w("/dev/full");
  CHECK_THROWS_AS(w.append(start_mark(Timestamp{0})), LogIoError);
  CHECK(w.pending() == 1);
  CHECK_THROWS_AS(w.append(sample_event(1, Timestamp{1})), LogIoError);
  CHECK(w.pending() == 2);
}

TEST_CASE("shared log stamps under one lock so concurrent writers stay ordered") {
  testing::TempDir dir;
  SystemClock clock;
  SessionWriter w(dir / "e.jsonl");
  SharedLog log(w, clock);
  log.append(start_mark(Timestamp{0}));
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 100; ++i) log.append(sample_event(t * 1000 + i, Timestamp{0}));
    });
  }
  for (auto& t : threads) t.join();
  const auto parsed = read_log(dir / "e.jsonl");
  REQUIRE(parsed.records.size() == 401);
  for (std::size_t i = 1; i < parsed.records.size(); ++i) {
    CHECK(timestamp_of(parsed.records[i - 1]) <= timestamp_of(parsed.records[i]));
  }
}

TEST_CASE("torn final line is dropped with a warning at every cut point") {
  std::string text = to_json(LogRecord(start_mark(Timestamp{0}))).dump() + "\n";
  for (int i = 1; i <= 3; ++i) text += to_json(LogRecord(sample_event(i, Timestamp{i}))).dump() + "\n";
  const auto last_start = text.rfind('\n', text.size() - 2) + 1;
  for (std::size_t cut = last_start + 1; cut < text.size() - 1; ++cut) {
    CAPTURE(cut);
    const auto parsed = parse_log(std::string_view(text).substr(0, cut), "e.jsonl");
    CHECK(parsed.records.size() == 3);
    CHECK(parsed.warnings.size() == 1);
  }
  CHECK(parse_log(text, "e.jsonl").records.size() == 4);
}

TEST_CASE("corruption before the final line fails with file and line") {
  std::string text = to_json(LogRecord(start_mark(Timestamp{0}))).dump() + "\n";
  text += "{\"type\":\"feedback\",broken\n";
  text += to_json(LogRecord(sample_event(2, Timestamp{2}))).dump() + "\n";
  try {
    parse_log(text, "e.jsonl");
    FAIL("expected LogParseError");
  } catch (const LogParseError& e) {
    CHECK(e.file() == "e.jsonl");
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_log(to_json(LogRecord(sample_event(1, Timestamp{1}))).dump() + "\n", "x"),
                  LogParseError);
  CHECK_THROWS_AS(parse_log("{\"type\":\"feedback\"}\n", "x"), LogParseError);
  const SessionMark end{SessionMark::Kind::end, Timestamp{0}, "session-x", kLogSchema};
  CHECK_THROWS_AS(parse_log(to_json(LogRecord(end)).dump() + "\n", "x"), LogParseError);
}

TEST_CASE("unknown schema and types are rejected") {
  CHECK_THROWS_AS(record_from_json(nlohmann::json::parse(
                      R"({"type":"session","mark":"start","ts":0,"session_id":"s","schema":2})")),
                  Error);
  CHECK_THROWS_AS(record_from_json(nlohmann::json::parse(R"({"type":"weather","ts":0})")), Error);
}

TEST_CASE("session directories are unique") {
  testing::TempDir dir;
  const auto a = SessionPaths::create(dir.path(), Timestamp{1234});
  const auto b = SessionPaths::create(dir.path(), Timestamp{1234});
  CHECK(a.session_id == "session-1234");
  CHECK(b.session_id == "session-1235");
  CHECK(std::filesystem::is_directory(a.audio_dir));
  CHECK(a.events.filename() == "events.jsonl");
}
