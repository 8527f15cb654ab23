// quac: daemon and command-line client.

#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "quac/analyzer.hpp"
#include "quac/daemon.hpp"
#include "quac/ipc.hpp"
#include "quac/persona.hpp"
#include "quac/settings.hpp"

using namespace quac;
using nlohmann::json;

namespace {

enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kNoDaemon = 3,
  kRejected = 4,
  kGenerationFailed = 5,
  kLogError = 6,
};

struct Usage : Error {
  using Error::Error;
};

std::unique_ptr<IpcClient> connect_or_null(const std::filesystem::path& socket) {
  try {
    return std::make_unique<IpcClient>(socket);
  } catch (const Error&) {
    return nullptr;
  }
}

int cmd_run(const std::filesystem::path& config_path, const std::vector<std::string>& overrides,
            bool mock, const std::optional<std::filesystem::path>& socket) {
  auto cfg = ConfigFile::load(config_path);
  std::vector<std::pair<std::string, std::string>> extra;
  if (mock) {
    extra = {{"provider", "mock"}, {"capture.source", "fake"}, {"hotkeys.enabled", "false"}};
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw Usage("--set expects key=value, got '" + o + "'");
    extra.emplace_back(o.substr(0, eq), o.substr(eq + 1));
  }
  for (auto& [k, v] : extra) cfg.set(k, v);

  auto opts = DaemonOptions::from_config(cfg, config_path);
  if (!extra.empty()) opts.config_path.reset();  // keep one-off overrides out of the file
  if (socket) opts.socket_path = *socket;

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  Daemon daemon(std::move(opts));
  daemon.start();
  std::cerr << "quac: session " << daemon.session().dir.string() << "\n"
            << "quac: listening on " << daemon.socket_path().string() << "\n";

  std::atomic<bool> done{false};
  std::thread signals([&] {
    timespec tick{0, 200'000'000};
    while (!done) {
      if (sigtimedwait(&set, nullptr, &tick) > 0) {
        daemon.handle("shutdown", json::object());
        return;
      }
    }
  });
  daemon.wait();
  done = true;
  signals.join();
  daemon.stop();
  return kOk;
}

int cmd_trigger(const std::filesystem::path& socket, const std::optional<std::string>& persona,
                bool emoji, bool wait, double timeout_s) {
  if (emoji && persona) throw Usage("--persona applies to feedback, not --emoji");
  auto client = connect_or_null(socket);
  if (!client) {
    std::cerr << "quac: daemon not running (" << socket.string() << ")\n";
    return kNoDaemon;
  }
  json args = json::object();
  if (persona) args["persona"] = *persona;
  json result;
  try {
    result = client->call(emoji ? "trigger_emoji" : "trigger_feedback", args);
  } catch (const IpcError& e) {
    std::cerr << "quac: " << e.what() << "\n";
    return kRejected;
  }
  const auto id = result.value("event_id", "");
  if (!result.value("accepted", false)) {
    std::cerr << "quac: trigger dropped\n";
    return kRejected;
  }
  if (!wait) {
    std::cout << id << "\n";
    return kOk;
  }

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
  while (std::chrono::steady_clock::now() < deadline) {
    const auto history = client->call("get_history", {{"limit", 200}});
    for (const auto& e : history["events"]) {
      if (e.value("event_id", "") != id) continue;
      const auto status = e.value("status", "");
      if (status != "ok") {
        std::cerr << "quac: " << id << " " << status;
        if (e.contains("error_message")) std::cerr << ": " << e["error_message"].get<std::string>();
        std::cerr << "\n";
        return kGenerationFailed;
      }
      if (emoji) {
        std::string line;
        for (const auto& s : e["emojis"]) line += s.get<std::string>() + " ";
        if (!line.empty()) line.pop_back();
        std::cout << line << "\n";
      } else {
        std::cout << "[" << e.value("persona", "") << "] " << e.value("reply_text", "") << "\n";
      }
      return kOk;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  std::cerr << "quac: timed out waiting for " << id << "\n";
  return kGenerationFailed;
}

int cmd_settings_get(const std::filesystem::path& socket, const std::filesystem::path& config_path,
                     const std::optional<std::string>& key) {
  json all;
  if (auto client = connect_or_null(socket)) {
    all = client->call("get_settings");
  } else {
    all = settings_to_json(settings_from_config(ConfigFile::load(config_path)));
  }
  if (!key) {
    std::cout << all.dump(2) << "\n";
    return kOk;
  }
  if (!all.contains(*key)) {
    std::cerr << "quac: unknown setting: " << *key << "\n";
    return kRejected;
  }
  const auto& v = all[*key];
  std::cout << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  return kOk;
}

int cmd_settings_set(const std::filesystem::path& socket, const std::filesystem::path& config_path,
                     const std::string& key, const std::string& value) {
  try {
    if (auto client = connect_or_null(socket)) {
      const auto r = client->call("set_setting", {{"key", key}, {"value", value}});
      std::cout << key << ": " << r["old"].get<std::string>() << " -> " << r["new"].get<std::string>()
                << "\n";
      return kOk;
    }
    SettingsStore store(settings_from_config(ConfigFile::load(config_path)), config_path);
    const auto c = store.set(key, value);
    std::cout << key << ": " << c.old_value << " -> " << c.new_value << " (saved to "
              << config_path.string() << ")\n";
    return kOk;
  } catch (const IpcError& e) {
    std::cerr << "quac: " << e.what() << "\n";
    return kRejected;
  } catch (const SettingError& e) {
    std::cerr << "quac: " << e.what() << "\n";
    return kRejected;
  }
}

int cmd_personas(bool as_json) {
  if (as_json) {
    std::cout << personas_json().dump(2) << "\n";
    return kOk;
  }
  for (const auto& p : list_personas()) {
    std::cout << to_string(p.id) << "\t" << p.display_name << "\t" << p.voice.description << "\n";
  }
  return kOk;
}

int cmd_analyze(const std::vector<std::string>& files, bool as_json,
                const std::optional<std::string>& svg_out) {
  std::vector<std::filesystem::path> paths(files.begin(), files.end());
  SessionStats stats;
  try {
    stats = analyze(paths);
  } catch (const LogParseError& e) {
    std::cerr << "quac: " << e.what() << "\n";
    return kLogError;
  }
  for (const auto& w : stats.warnings) std::cerr << "warning: " << w << "\n";
  if (svg_out) {
    std::ofstream out(*svg_out);
    out << render_svg(stats);
    if (!out) {
      std::cerr << "quac: cannot write " << *svg_out << "\n";
      return kLogError;
    }
  }
  if (as_json) {
    std::cout << stats_to_json(stats).dump(2) << "\n";
  } else {
    std::cout << render_report(stats);
    if (!svg_out) std::cout << "\n" << render_text(stats);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quac: spoken design feedback from a rubber duck"};
  app.require_subcommand(1);

  std::string socket = default_socket_path().string();
  std::string config = default_config_path().string();
  app.add_option("--socket", socket, "Daemon socket path")->capture_default_str();
  app.add_option("--config", config, "Config file")->capture_default_str();

  auto* run = app.add_subcommand("run", "Run the daemon in the foreground");
  bool mock = false;
  std::vector<std::string> overrides;
  run->add_flag("--mock", mock, "Offline: mock providers, synthetic screen, no hotkeys");
  run->add_option("--set", overrides, "Override a config key (key=value), repeatable");

  auto* trigger = app.add_subcommand("trigger", "Ask the running daemon for feedback");
  std::optional<std::string> persona;
  bool emoji = false;
  bool no_wait = false;
  double timeout = 120;
  trigger->add_option("--persona", persona, "Persona for this request only");
  trigger->add_flag("--emoji", emoji, "Request emoji instead of spoken feedback");
  trigger->add_flag("--no-wait", no_wait, "Print the event id and return immediately");
  trigger->add_option("--timeout", timeout, "Seconds to wait for the result")->capture_default_str();

  auto* settings = app.add_subcommand("settings", "Read or change live settings");
  settings->require_subcommand(1);
  auto* get = settings->add_subcommand("get", "Print all settings, or one key");
  std::optional<std::string> get_key;
  get->add_option("key", get_key);
  auto* set = settings->add_subcommand("set", "Change one setting");
  std::string set_key, set_value;
  set->add_option("key", set_key)->required();
  set->add_option("value", set_value)->required();

  auto* personas = app.add_subcommand("personas", "List personas");
  bool personas_json_out = false;
  personas->add_flag("--json", personas_json_out, "Machine-readable catalog");

  auto* an = app.add_subcommand("analyze", "Summarize session logs");
  std::vector<std::string> files;
  bool json_out = false;
  std::optional<std::string> svg;
  an->add_option("files", files, "events.jsonl files")->required()->check(CLI::ExistingFile);
  auto* json_flag = an->add_flag("--json", json_out, "Print statistics as JSON");
  an->add_option("--svg", svg, "Write the timeline chart to this file")->excludes(json_flag);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*run) {
      const auto explicit_socket =
          app.get_option("--socket")->count() ? std::optional<std::filesystem::path>(socket) : std::nullopt;
      return cmd_run(config, overrides, mock, explicit_socket);
    }
    if (*trigger) return cmd_trigger(socket, persona, emoji, !no_wait, timeout);
    if (*get) return cmd_settings_get(socket, config, get_key);
    if (*set) return cmd_settings_set(socket, config, set_key, set_value);
    if (*personas) return cmd_personas(personas_json_out);
    if (*an) return cmd_analyze(files, json_out, svg);
  } catch (const Usage& e) {
    std::cerr << "quac: " << e.what() << "\n";
    return kUsage;
  } catch (const SettingError& e) {
    std::cerr << "quac: " << e.what() << "\n";
    return kRejected;
  } catch (const std::exception& e) {
    std::cerr << "quac: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
