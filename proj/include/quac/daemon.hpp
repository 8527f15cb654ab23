#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "quac/audio.hpp"
#include "quac/capture.hpp"
#include "quac/clock.hpp"
#include "quac/hotkeys.hpp"
#include "quac/ipc.hpp"
#include "quac/pipeline.hpp"
#include "quac/providers.hpp"
#include "quac/scheduler.hpp"
#include "quac/session_log.hpp"
#include "quac/settings.hpp"

namespace quac {

/// Everything the daemon runs with. Anything left null is built from the
/// config file by DaemonOptions::from_config.
struct DaemonOptions {
  std::optional<std::filesystem::path> config_path;
  Settings initial_settings;
  std::filesystem::path session_root;
  std::filesystem::path socket_path;
  RetryPolicy retry;

  std::shared_ptr<Clock> clock;
  std::shared_ptr<CaptureSource> capture;
  std::shared_ptr<VisionProvider> vision;
  std::shared_ptr<TtsProvider> tts;
  std::shared_ptr<AudioPlayer> player;
  /// Null disables global hotkeys.
  std::shared_ptr<HotkeyBackend> hotkeys;

  /// Reads daemon keys (provider, vision.*, tts.*, mock.*, capture.source,
  /// audio.command, session.root, ipc.socket, hotkeys.enabled) and the live
  /// settings. Throws Error / SettingError on bad values.
  static DaemonOptions from_config(const ConfigFile& cfg,
                                   std::optional<std::filesystem::path> config_path = {});
};

/// Default data directory for sessions: $QUAC_HOME/sessions, else
/// $XDG_DATA_HOME/quac/sessions, else ~/.local/share/quac/sessions.
std::filesystem::path default_session_root();
/// $QUAC_CONFIG, else $XDG_CONFIG_HOME/quac/config, else ~/.config/quac/config.
std::filesystem::path default_config_path();

class Daemon {
 public:
  explicit Daemon(DaemonOptions opts);
  ~Daemon();
  Daemon(const Daemon&) = delete;
  Daemon& operator=(const Daemon&) = delete;

  /// Opens the session log, binds the socket and starts the scheduler and
  /// hotkeys.
  void start();
  /// Writes the session end mark and tears everything down. Idempotent.
  void stop();
  /// Blocks until stop() or a "shutdown" request.
  void wait();

  /// One IPC command; throws IpcError.
  nlohmann::json handle(const std::string& command, const nlohmann::json& args);

  const SessionPaths& session() const { return paths_; }
  const std::filesystem::path& socket_path() const { return opts_.socket_path; }
  SettingsStore& settings() { return *settings_; }
  Pipeline& pipeline() { return *pipeline_; }

 private:
  void on_setting_changed(const Settings& s, const SettingsStore::Change& c);
  void on_trigger(const Trigger& t);
  void broadcast(const UiEvent& e);
  void rebind_hotkeys(const HotkeyBinding& b);

  DaemonOptions opts_;
  SessionPaths paths_;
  std::unique_ptr<SettingsStore> settings_;
  std::unique_ptr<SessionWriter> writer_;
  std::unique_ptr<SharedLog> log_;
  std::unique_ptr<Pipeline> pipeline_;
  std::unique_ptr<CycleScheduler> scheduler_;
  std::unique_ptr<HotkeyHandle> hotkey_handle_;
  std::unique_ptr<IpcServer> server_;
  std::mutex hotkey_mutex_;
  std::jthread scheduler_thread_;

  std::mutex state_mutex_;
  std::condition_variable state_cv_;
  bool started_ = false;
  bool stopping_ = false;
  bool stopped_ = false;
};

}  // namespace quac
