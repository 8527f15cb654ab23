#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quac/capture.hpp"
#include "quac/hotkeys.hpp"
#include "quac/persona.hpp"
#include "quac/scheduler.hpp"

namespace quac {

/// Live configuration, editable from the control panel.
struct Settings {
  PersonaId persona = PersonaId::mentor;
  CaptureMode capture_mode = CaptureMode::whole_screen;
  Size cursor_region = kDefaultCursorRegion;
  CycleConfig cycle;
  int memory_depth = 2;
  HotkeyBinding hotkeys;
  /// Per-persona TTS voice id replacing the built-in default.
  std::map<PersonaId, std::string> voice_overrides;

  VoiceDescriptor voice_for(PersonaId id) const;
  bool operator==(const Settings&) const = default;
};

class SettingError : public Error {
 public:
  using Error::Error;
};

/// Fixed keys, then one "voice.<persona>" key per persona.
const std::vector<std::string>& setting_keys();

/// Throws SettingError for unknown keys.
std::string get_setting(const Settings& s, std::string_view key);

/// Returns a copy with one key changed. Throws SettingError when the key is
/// unknown or the value is outside its domain.
Settings with_setting(Settings s, std::string_view key, std::string_view value);

nlohmann::json settings_to_json(const Settings& s);

/// Ordered "key = value" file with '#' comments. Unknown keys survive a
/// load/save round trip.
class ConfigFile {
 public:
  static ConfigFile load(const std::filesystem::path& path);  // missing file = empty
  static ConfigFile parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  std::string dump() const;

  std::optional<std::string> get(std::string_view key) const;
  void set(std::string_view key, std::string value);
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Applies every live-setting key present in the file on top of defaults.
/// Throws SettingError naming the offending key.
Settings settings_from_config(const ConfigFile& cfg);

/// Thread-safe owner of the live settings. Optionally persists every change
/// back into a config file.
class SettingsStore {
 public:
  struct Change {
    std::string key;
    std::string old_value;
    std::string new_value;
  };
  using Listener = std::function<void(const Settings&, const Change&)>;

  explicit SettingsStore(Settings initial = {}, std::optional<std::filesystem::path> persist_to = {});

  Settings get() const;
  /// Validates, applies, persists and notifies. Returns the change record.
  Change set(std::string_view key, std::string_view value);
  void on_change(Listener l);

 private:
  mutable std::mutex mutex_;
  Settings settings_;
  std::optional<std::filesystem::path> persist_to_;
  std::vector<Listener> listeners_;
};

}  // namespace quac
