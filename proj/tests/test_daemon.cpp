#include <doctest.h>

#include <thread>

#include "quac/daemon.hpp"
#include "support.hpp"

using namespace quac;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

struct Harness {
  testing::TempDir dir;
  std::shared_ptr<MockVisionProvider> vision = std::make_shared<MockVisionProvider>();
  std::shared_ptr<MockTtsProvider> tts = std::make_shared<MockTtsProvider>();
  std::shared_ptr<FakeHotkeyBackend> hotkeys = std::make_shared<FakeHotkeyBackend>();
  std::unique_ptr<Daemon> daemon;

  explicit Harness(Settings initial = {}, bool persist = false) {
    DaemonOptions o;
    o.initial_settings = initial;
    o.session_root = dir / "sessions";
    o.socket_path = dir / "d.sock";
    if (persist) o.config_path = dir / "config";
    o.vision = vision;
    o.tts = tts;
    o.hotkeys = hotkeys;
    o.retry = {0, Millis{0}};
    daemon = std::make_unique<Daemon>(std::move(o));
    daemon->start();
  }

  std::vector<LogRecord> records() { return read_log(daemon->session().events).records; }
};

template <class T>
std::vector<T> only(const std::vector<LogRecord>& rs) {
  std::vector<T> out;
  for (const auto& r : rs) {
    if (auto* p = std::get_if<T>(&r)) out.push_back(*p);
  }
  return out;
}

}  // namespace

TEST_CASE("the daemon opens a session and answers basic commands") {
  Harness h;
  IpcClient c(h.daemon->socket_path());
  const auto ping = c.call("ping");
  CHECK(ping["pong"] == true);
  CHECK(ping["session_id"] == h.daemon->session().session_id);

  const auto settings = c.call("get_settings");
  CHECK(settings["persona"] == "mentor");
  CHECK(settings["memory_depth"] == 2);
  CHECK(settings["cycle.voice"] == "3m");

  const auto personas = c.call("list_personas");
  REQUIRE(personas.size() == kPersonaCount);
  CHECK(personas[2]["id"] == "critic");

  const auto status = c.call("status");
  CHECK(status["busy"] == false);
  CHECK(std::filesystem::path(status["events"].get<std::string>()) == h.daemon->session().events);

  const auto first = h.records();
  REQUIRE(first.size() == 1);
  CHECK(std::get<SessionMark>(first[0]).mark == SessionMark::Kind::start);

  try {
    c.call("frobnicate");
    FAIL("expected error");
  } catch (const IpcError& e) {
    CHECK(e.code() == "unknown_command");
  }
}

TEST_CASE("feedback over IPC: events, history and log") {
  Harness h;
  IpcClient c(h.daemon->socket_path());
  const auto r = c.call("trigger_feedback", {{"persona", "critic"}});
  CHECK(r["accepted"] == true);
  const auto id = r["event_id"].get<std::string>();

  auto started = c.wait_for_event("GenerationStarted", 5000ms);
  REQUIRE(started);
  CHECK((*started)["event_id"] == id);
  CHECK((*started)["persona"] == "critic");
  CHECK((*started)["trigger"] == "manual");
  auto ready = c.wait_for_event("FeedbackReady", 5000ms);
  REQUIRE(ready);
  CHECK((*ready)["text"] == std::string(sample_reply(PersonaId::critic)));
  CHECK((*ready)["audio_duration_ms"].get<long long>() > 0);

  const auto history = c.call("get_history", {{"limit", 5}})["events"];
  REQUIRE(history.size() == 1);
  CHECK(history[0]["event_id"] == id);
  CHECK(history[0]["status"] == "ok");

  CHECK(c.call("get_settings")["persona"] == "mentor");
  std::this_thread::sleep_for(100ms);
  CHECK(c.call("cancel")["cancelled"] == true);  // stops playback
  auto finished = c.wait_for_event("PlaybackFinished", 5000ms);
  REQUIRE(finished);
  CHECK((*finished)["completed"] == false);

  const auto fb = only<FeedbackEvent>(h.records());
  REQUIRE(fb.size() == 1);
  CHECK(fb[0].trigger == TriggerKind::manual);
  CHECK(std::filesystem::exists(h.daemon->session().dir / *fb[0].audio_ref));
}

TEST_CASE("emoji over IPC") {
  Harness h;
  IpcClient c(h.daemon->socket_path());
  c.call("trigger_emoji");
  auto e = c.wait_for_event("EmojiReady", 5000ms);
  REQUIRE(e);
  CHECK((*e)["emojis"].size() >= 1);
  const auto fb = only<FeedbackEvent>(h.records());
  REQUIRE(fb.size() == 1);
  CHECK(fb[0].kind == PayloadKind::emoji);
}

TEST_CASE("bad trigger and setting requests are rejected") {
  Harness h;
  IpcClient c(h.daemon->socket_path());
  auto code_of = [&](const std::string& cmd, const json& args) {
    const auto r = c.request(cmd, args);
    return r["ok"] == true ? std::string("ok") : r["error"]["code"].get<std::string>();
  };
  CHECK(code_of("trigger_feedback", {{"persona", "pirate"}}) == "unknown_persona");
  CHECK(code_of("trigger_feedback", {{"persona", 3}}) == "bad_request");
  CHECK(code_of("set_setting", {{"key", "memory_depth"}, {"value", "-1"}}) == "invalid_setting");
  CHECK(code_of("set_setting", {{"key", "persona"}, {"value", "pirate"}}) == "invalid_setting");
  CHECK(code_of("set_setting", {{"key", "nope"}, {"value", "1"}}) == "invalid_setting");
  CHECK(code_of("set_setting", {{"value", "1"}}) == "bad_request");
  CHECK(code_of("get_history", {{"limit", -1}}) == "bad_request");
  CHECK(only<FeedbackEvent>(h.records()).empty());
  CHECK(only<ConfigChange>(h.records()).empty());
}

TEST_CASE("settings changes are logged, broadcast to all clients and persisted") {
  Harness h({}, true);
  IpcClient a(h.daemon->socket_path());
  IpcClient b(h.daemon->socket_path());
  const auto r = a.call("set_setting", {{"key", "memory_depth"}, {"value", 4}});
  CHECK(r["old"] == "2");
  CHECK(r["new"] == "4");
  CHECK(r["settings"]["memory_depth"] == 4);

  for (auto* c : {&a, &b}) {
    auto e = c->wait_for_event("SettingsChanged", 3000ms);
    REQUIRE(e);
    CHECK((*e)["settings"]["memory_depth"] == 4);
  }
  const auto changes = only<ConfigChange>(h.records());
  REQUIRE(changes.size() == 1);
  CHECK(changes[0].key == "memory_depth");
  CHECK(changes[0].old_value == "2");
  CHECK(changes[0].new_value == "4");
  CHECK(ConfigFile::load(h.dir / "config").get("memory_depth") == "4");
}

TEST_CASE("hotkeys trigger runs and follow rebinding") {
  Harness h;
  IpcClient c(h.daemon->socket_path());
  CHECK(h.hotkeys->grabbed() == 2);
  CHECK(h.hotkeys->inject(parse_chord("Primary+E"), Timestamp{1000}));
  REQUIRE(c.wait_for_event("EmojiReady", 5000ms));

  c.call("set_setting", {{"key", "hotkeys.feedback"}, {"value", "Ctrl+Alt+F"}});
  CHECK_FALSE(h.hotkeys->inject(parse_chord("Primary+R"), Timestamp{2000}));
  CHECK(h.hotkeys->inject(parse_chord("Ctrl+Alt+F"), Timestamp{2000}));
  auto started = c.wait_for_event("GenerationStarted", 5000ms);
  REQUIRE(started);
  CHECK((*started)["trigger"] == "manual");
  REQUIRE(c.wait_for_event("FeedbackReady", 5000ms));
}

TEST_CASE("shutdown unblocks wait and stop writes the end mark") {
  Harness h;
  std::thread waiter([&] { h.daemon->wait(); });
  {
    IpcClient c(h.daemon->socket_path());
    CHECK(c.call("shutdown")["stopping"] == true);
  }
  waiter.join();
  h.daemon->stop();
  h.daemon->stop();
  const auto rs = read_log(h.daemon->session().events).records;
  REQUIRE(rs.size() == 2);
  CHECK(std::get<SessionMark>(rs.back()).mark == SessionMark::Kind::end);
  CHECK_FALSE(std::filesystem::exists(h.dir / "d.sock"));
}

TEST_CASE("a second daemon on the same socket refuses to start") {
  Harness h;
  DaemonOptions o;
  o.session_root = h.dir / "other";
  o.socket_path = h.daemon->socket_path();
  Daemon second(std::move(o));
  CHECK_THROWS_AS(second.start(), IpcError);
  IpcClient c(h.daemon->socket_path());
  CHECK(c.call("ping")["pong"] == true);
}

TEST_CASE("options from a config file") {
  testing::TempDir dir;
  ConfigFile cfg;
  cfg.set("provider", "mock");
  cfg.set("capture.source", "fake");
  cfg.set("hotkeys.enabled", "false");
  cfg.set("session.root", (dir / "s").string());
  cfg.set("ipc.socket", (dir / "x.sock").string());
  cfg.set("persona", "ceo");
  cfg.set("mock.vision_delay_ms", "15");
  auto o = DaemonOptions::from_config(cfg);
  CHECK(o.initial_settings.persona == PersonaId::ceo);
  CHECK(o.session_root == dir / "s");
  CHECK(o.socket_path == dir / "x.sock");
  CHECK(o.hotkeys == nullptr);
  CHECK(dynamic_cast<MockVisionProvider*>(o.vision.get()) != nullptr);
  CHECK(dynamic_cast<FakeCaptureSource*>(o.capture.get()) != nullptr);

  cfg.set("provider", "carrier-pigeon");
  CHECK_THROWS_AS(DaemonOptions::from_config(cfg), Error);
  cfg.set("provider", "mock");
  cfg.set("mock.vision_delay_ms", "soon");
  CHECK_THROWS_AS(DaemonOptions::from_config(cfg), Error);
  cfg.set("mock.vision_delay_ms", "0");
  cfg.set("hotkeys.enabled", "maybe");
  CHECK_THROWS_AS(DaemonOptions::from_config(cfg), Error);
  cfg.set("hotkeys.enabled", "false");
  cfg.set("capture.source", "webcam");
  CHECK_THROWS_AS(DaemonOptions::from_config(cfg), Error);
}

TEST_CASE("the http provider requires API keys") {
  ::unsetenv("QUAC_VISION_API_KEY");
  ConfigFile cfg;
  cfg.set("capture.source", "fake");
  cfg.set("hotkeys.enabled", "false");
  CHECK_THROWS_AS(DaemonOptions::from_config(cfg), Error);
  ::setenv("QUAC_VISION_API_KEY", "k1", 1);
  ::setenv("QUAC_TTS_API_KEY", "k2", 1);
  auto o = DaemonOptions::from_config(cfg);
  CHECK(dynamic_cast<HttpVisionProvider*>(o.vision.get()) != nullptr);
  ::unsetenv("QUAC_VISION_API_KEY");
  ::unsetenv("QUAC_TTS_API_KEY");
}

TEST_CASE("default paths follow the environment") {
  ::setenv("QUAC_HOME", "/srv/q", 1);
  CHECK(default_session_root() == "/srv/q/sessions");
  ::unsetenv("QUAC_HOME");
  ::setenv("XDG_DATA_HOME", "/d", 1);
  CHECK(default_session_root() == "/d/quac/sessions");
  ::unsetenv("XDG_DATA_HOME");

  ::setenv("QUAC_SOCKET", "/s/q.sock", 1);
  CHECK(default_socket_path() == "/s/q.sock");
  ::unsetenv("QUAC_SOCKET");
  ::setenv("XDG_RUNTIME_DIR", "/run/user/9", 1);
  CHECK(default_socket_path() == "/run/user/9/quac.sock");
  ::unsetenv("XDG_RUNTIME_DIR");
  CHECK(default_socket_path() == "/tmp/quac-" + std::to_string(::getuid()) + ".sock");

  ::setenv("QUAC_CONFIG", "/c/cfg", 1);
  CHECK(default_config_path() == "/c/cfg");
  ::unsetenv("QUAC_CONFIG");
}
