#include "quac/daemon.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace quac {

using nlohmann::json;

namespace {

class UnavailableSource final : public CaptureSource {
 public:
  explicit UnavailableSource(std::string why) : why_(std::move(why)) {}
  Rect display_bounds() override { fail(); }
  std::optional<Rect> active_window() override { fail(); }
  Point cursor() override { fail(); }
  Frame grab(const Rect&) override { fail(); }

 private:
  [[noreturn]] void fail() { throw CaptureError(CaptureError::Kind::unavailable, why_); }
  std::string why_;
};

std::filesystem::path home_dir() {
  if (const char* h = std::getenv("HOME"); h && *h) return h;
  return "/tmp";
}

std::filesystem::path env_path(const char* name) {
  const char* v = std::getenv(name);
  return v && *v ? std::filesystem::path(v) : std::filesystem::path();
}

Millis ms_value(const ConfigFile& cfg, std::string_view key, Millis fallback) {
  const auto v = cfg.get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const long long n = std::stoll(*v, &used);
    if (used != v->size() || n < 0) throw std::invalid_argument("");
    return Millis{n};
  } catch (const std::exception&) {
    throw Error(std::string(key) + " must be a non-negative integer of milliseconds");
  }
}

std::string required_env(const char* name, std::string_view what) {
  const char* v = std::getenv(name);
  if (!v || !*v) throw Error(std::string(what) + " needs " + name + " to be set");
  return v;
}

}  // namespace

std::filesystem::path default_session_root() {
  if (auto p = env_path("QUAC_HOME"); !p.empty()) return p / "sessions";
  if (auto p = env_path("XDG_DATA_HOME"); !p.empty()) return p / "quac" / "sessions";
  return home_dir() / ".local" / "share" / "quac" / "sessions";
}

std::filesystem::path default_config_path() {
  if (auto p = env_path("QUAC_CONFIG"); !p.empty()) return p;
  if (auto p = env_path("XDG_CONFIG_HOME"); !p.empty()) return p / "quac" / "config";
  return home_dir() / ".config" / "quac" / "config";
}

DaemonOptions DaemonOptions::from_config(const ConfigFile& cfg,
                                         std::optional<std::filesystem::path> config_path) {
  DaemonOptions o;
  o.config_path = std::move(config_path);
  o.initial_settings = settings_from_config(cfg);
  o.session_root = cfg.get("session.root").value_or(default_session_root().string());
  o.socket_path = cfg.get("ipc.socket").value_or(default_socket_path().string());
  o.clock = std::make_shared<SystemClock>();

  const auto provider = cfg.get("provider").value_or("http");
  if (provider == "mock") {
    MockScript script = MockScript::defaults();
    if (auto path = cfg.get("mock.script")) {
      std::ifstream in(*path);
      if (!in) throw Error("cannot read mock.script " + *path);
      script = MockScript::from_json(json::parse(in));
    }
    o.vision = std::make_shared<MockVisionProvider>(std::move(script),
                                                    ms_value(cfg, "mock.vision_delay_ms", Millis{0}));
    o.tts = std::make_shared<MockTtsProvider>(ms_value(cfg, "mock.tts_delay_ms", Millis{0}));
  } else if (provider == "http") {
    HttpVisionConfig v;
    v.endpoint = cfg.get("vision.endpoint").value_or("https://api.openai.com/v1/chat/completions");
    v.model = cfg.get("vision.model").value_or("gpt-4o");
    v.api_key = required_env("QUAC_VISION_API_KEY", "the vision provider");
    v.timeout = ms_value(cfg, "vision.timeout_ms", v.timeout);
    HttpTtsConfig t;
    t.endpoint =
        cfg.get("tts.endpoint").value_or("https://api.elevenlabs.io/v1/text-to-speech/{voice_id}");
    t.auth_header = cfg.get("tts.auth_header").value_or("xi-api-key");
    t.api_key = required_env("QUAC_TTS_API_KEY", "the speech provider");
    t.timeout = ms_value(cfg, "tts.timeout_ms", t.timeout);
    o.vision = std::make_shared<HttpVisionProvider>(std::move(v));
    o.tts = std::make_shared<HttpTtsProvider>(std::move(t));
  } else {
    throw Error("provider must be 'http' or 'mock' (got '" + provider + "')");
  }

  const auto source = cfg.get("capture.source").value_or("platform");
  if (source == "fake") {
    o.capture = std::make_shared<FakeCaptureSource>();
  } else if (source.starts_with("file:")) {
    o.capture = make_png_file_source(source.substr(5));
  } else if (source == "platform") {
    try {
      o.capture = make_platform_source();
    } catch (const CaptureError& e) {
      std::cerr << "quac: screen capture unavailable: " << e.what() << "\n";
      o.capture = std::make_shared<UnavailableSource>(e.what());
    }
  } else {
    throw Error("capture.source must be platform, fake or file:<png> (got '" + source + "')");
  }

  if (auto cmd = cfg.get("audio.command"); cmd && !cmd->empty()) {
    o.player = std::make_shared<CommandAudioPlayer>(*cmd);
  } else {
    o.player = std::make_shared<SilentAudioPlayer>();
  }

  const auto hk = cfg.get("hotkeys.enabled").value_or("true");
  if (hk != "true" && hk != "false") throw Error("hotkeys.enabled must be true or false");
  if (hk == "true") o.hotkeys = make_platform_hotkey_backend();
  return o;
}

Daemon::Daemon(DaemonOptions opts) : opts_(std::move(opts)) {
  if (!opts_.clock) opts_.clock = std::make_shared<SystemClock>();
  if (!opts_.capture) opts_.capture = std::make_shared<FakeCaptureSource>();
  if (!opts_.vision) opts_.vision = std::make_shared<MockVisionProvider>();
  if (!opts_.tts) opts_.tts = std::make_shared<MockTtsProvider>();
  if (!opts_.player) opts_.player = std::make_shared<SilentAudioPlayer>();
  if (opts_.session_root.empty()) opts_.session_root = default_session_root();
  if (opts_.socket_path.empty()) opts_.socket_path = default_socket_path();
}

Daemon::~Daemon() { stop(); }

void Daemon::start() {
  {
    std::lock_guard lock(state_mutex_);
    if (started_) return;
    started_ = true;
  }
  auto& clock = *opts_.clock;
  settings_ = std::make_unique<SettingsStore>(opts_.initial_settings, opts_.config_path);

  server_ = std::make_unique<IpcServer>(
      opts_.socket_path, [this](const std::string& cmd, const json& args) { return handle(cmd, args); });

  paths_ = SessionPaths::create(opts_.session_root, clock.now());
  writer_ = std::make_unique<SessionWriter>(paths_.events);
  log_ = std::make_unique<SharedLog>(*writer_, clock);
  log_->append(SessionMark{SessionMark::Kind::start, {}, paths_.session_id, kLogSchema});

  pipeline_ = std::make_unique<Pipeline>(PipelineDeps{
      *settings_, *opts_.capture, *opts_.vision, *opts_.tts, *opts_.player, clock, *log_, paths_.dir,
      [this](const UiEvent& e) { broadcast(e); }, opts_.retry});

  settings_->on_change(
      [this](const Settings& s, const SettingsStore::Change& c) { on_setting_changed(s, c); });

  const auto initial = settings_->get();
  scheduler_ = std::make_unique<CycleScheduler>(clock, initial.cycle);
  scheduler_thread_ = std::jthread([this](std::stop_token st) {
    scheduler_->run([this](const Trigger& t) { on_trigger(t); }, st);
  });

  if (opts_.hotkeys) rebind_hotkeys(initial.hotkeys);
  server_->start();
}

void Daemon::rebind_hotkeys(const HotkeyBinding& b) {
  std::lock_guard lock(hotkey_mutex_);
  hotkey_handle_.reset();
  try {
    hotkey_handle_ = bind_hotkeys(*opts_.hotkeys, b, [this](const Trigger& t) { on_trigger(t); });
  } catch (const Error& e) {
    std::cerr << "quac: hotkeys not bound: " << e.what() << "\n";
  }
}

void Daemon::on_trigger(const Trigger& t) {
  if (pipeline_) pipeline_->submit(t);
}

void Daemon::broadcast(const UiEvent& e) {
  if (server_) server_->broadcast(event_to_json(e));
}

void Daemon::on_setting_changed(const Settings& s, const SettingsStore::Change& c) {
  try {
    log_->append(ConfigChange{{}, c.key, c.old_value, c.new_value});
  } catch (const Error& e) {
    std::cerr << "quac: log write failed: " << e.what() << "\n";
  }
  if (c.key.starts_with("cycle.")) scheduler_->reconfigure(s.cycle);
  if (c.key.starts_with("hotkeys.") && opts_.hotkeys) rebind_hotkeys(s.hotkeys);
  broadcast(SettingsChanged{s});
}

json Daemon::handle(const std::string& command, const json& args) {
  auto trigger = [&](PayloadKind kind) {
    Trigger t{kind, TriggerKind::manual, std::nullopt, opts_.clock->now()};
    if (kind == PayloadKind::feedback && args.contains("persona") && !args["persona"].is_null()) {
      const auto name = args["persona"].get<std::string>();
      const auto id = parse_persona_id(name);
      if (!id) throw IpcError("unknown_persona", "unknown persona: " + name);
      t.persona_override = *id;
    }
    const auto sub = pipeline_->submit(t);
    return json{{"accepted", sub.accepted}, {"event_id", sub.event_id}};
  };

  if (command == "ping") return {{"pong", true}, {"session_id", paths_.session_id}};
  if (command == "trigger_feedback") return trigger(PayloadKind::feedback);
  if (command == "trigger_emoji") return trigger(PayloadKind::emoji);
  if (command == "cancel") return {{"cancelled", pipeline_->cancel_in_flight()}};
  if (command == "get_settings") return settings_to_json(settings_->get());
  if (command == "set_setting") {
    const auto key = args.at("key").get<std::string>();
    const auto& v = args.at("value");
    const auto value = v.is_string() ? v.get<std::string>() : v.dump();
    try {
      const auto change = settings_->set(key, value);
      return {{"key", change.key},
              {"old", change.old_value},
              {"new", change.new_value},
              {"settings", settings_to_json(settings_->get())}};
    } catch (const SettingError& e) {
      throw IpcError("invalid_setting", e.what());
    }
  }
  if (command == "list_personas") return personas_json();
  if (command == "get_history") {
    const auto limit = args.value("limit", 20);
    if (limit < 0) throw IpcError("bad_request", "limit must be non-negative");
    json events = json::array();
    for (const auto& e : pipeline_->history(static_cast<std::size_t>(limit))) {
      events.push_back(to_json(e));
    }
    return {{"events", events}};
  }
  if (command == "status") {
    return {{"busy", pipeline_->busy()},
            {"session_id", paths_.session_id},
            {"session_dir", paths_.dir.string()},
            {"events", paths_.events.string()}};
  }
  if (command == "shutdown") {
    {
      std::lock_guard lock(state_mutex_);
      stopping_ = true;
    }
    state_cv_.notify_all();
    return {{"stopping", true}};
  }
  throw IpcError("unknown_command", "unknown command: " + command);
}

void Daemon::wait() {
  std::unique_lock lock(state_mutex_);
  state_cv_.wait(lock, [&] { return stopping_ || stopped_; });
}

void Daemon::stop() {
  {
    std::lock_guard lock(state_mutex_);
    if (!started_ || stopped_) return;
    stopped_ = true;
  }
  state_cv_.notify_all();
  {
    std::lock_guard lock(hotkey_mutex_);
    hotkey_handle_.reset();
  }
  scheduler_thread_.request_stop();
  opts_.clock->interrupt();
  if (scheduler_thread_.joinable()) scheduler_thread_.join();
  server_->stop();
  pipeline_.reset();
  try {
    log_->append(SessionMark{SessionMark::Kind::end, {}, paths_.session_id, kLogSchema});
  } catch (const Error& e) {
    std::cerr << "quac: log write failed: " << e.what() << "\n";
  }
  server_.reset();
  log_.reset();
  writer_.reset();
}

}  // namespace quac
