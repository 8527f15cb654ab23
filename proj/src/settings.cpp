#include "quac/settings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace quac {
namespace {

constexpr std::string_view kVoicePrefix = "voice.";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

int parse_depth(std::string_view v) {
  int n = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc{} || ptr != v.data() + v.size() || n < 0) {
    throw SettingError("memory_depth must be a non-negative integer (got '" + std::string(v) + "')");
  }
  return n;
}

}  // namespace

VoiceDescriptor Settings::voice_for(PersonaId id) const {
  VoiceDescriptor v = resolve(id).voice;
  if (auto it = voice_overrides.find(id); it != voice_overrides.end()) {
    v.provider_voice_id = it->second;
  }
  return v;
}

const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k = {"persona",     "capture.mode",     "capture.cursor_region",
                                  "cycle.voice", "cycle.emoji",      "memory_depth",
                                  "hotkeys.feedback", "hotkeys.emoji"};
    for (const auto& p : list_personas()) k.push_back(std::string(kVoicePrefix) + std::string(to_string(p.id)));
    return k;
  }();
  return keys;
}

std::string get_setting(const Settings& s, std::string_view key) {
  if (key == "persona") return std::string(to_string(s.persona));
  if (key == "capture.mode") return std::string(to_string(s.capture_mode));
  if (key == "capture.cursor_region") return to_string(s.cursor_region);
  if (key == "cycle.voice") return std::string(to_string(s.cycle.voice));
  if (key == "cycle.emoji") return std::string(to_string(s.cycle.emoji));
  if (key == "memory_depth") return std::to_string(s.memory_depth);
  if (key == "hotkeys.feedback") return to_string(s.hotkeys.feedback);
  if (key == "hotkeys.emoji") return to_string(s.hotkeys.emoji);
  if (key.starts_with(kVoicePrefix)) {
    if (auto id = parse_persona_id(key.substr(kVoicePrefix.size()))) {
      return s.voice_for(*id).provider_voice_id;
    }
  }
  throw SettingError("unknown setting: " + std::string(key));
}

Settings with_setting(Settings s, std::string_view key, std::string_view value) {
  try {
    if (key == "persona") {
      s.persona = resolve(value).id;
    } else if (key == "capture.mode") {
      s.capture_mode = parse_capture_mode(value);
    } else if (key == "capture.cursor_region") {
      s.cursor_region = parse_size(value);
    } else if (key == "cycle.voice") {
      s.cycle.voice = parse_cycle_interval(value);
    } else if (key == "cycle.emoji") {
      s.cycle.emoji = parse_cycle_interval(value);
    } else if (key == "memory_depth") {
      s.memory_depth = parse_depth(value);
    } else if (key == "hotkeys.feedback" || key == "hotkeys.emoji") {
      auto b = s.hotkeys;
      (key == "hotkeys.feedback" ? b.feedback : b.emoji) = parse_chord(value);
      validate(b);
      s.hotkeys = b;
    } else if (key.starts_with(kVoicePrefix) && parse_persona_id(key.substr(kVoicePrefix.size()))) {
      const auto id = *parse_persona_id(key.substr(kVoicePrefix.size()));
      if (value.empty()) throw SettingError("voice id must not be empty");
      if (value == resolve(id).voice.provider_voice_id) {
        s.voice_overrides.erase(id);
      } else {
        s.voice_overrides[id] = std::string(value);
      }
    } else {
      throw SettingError("unknown setting: " + std::string(key));
    }
  } catch (const SettingError&) {
    throw;
  } catch (const Error& e) {
    throw SettingError(std::string(key) + ": " + e.what());
  }
  return s;
}

nlohmann::json settings_to_json(const Settings& s) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& key : setting_keys()) {
    if (key == "memory_depth") {
      j[key] = s.memory_depth;
    } else {
      j[key] = get_setting(s, key);
    }
  }
  return j;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

ConfigFile ConfigFile::parse(std::string_view text) {
  ConfigFile cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw SettingError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

std::string ConfigFile::dump() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

void ConfigFile::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << dump();
  }
  std::filesystem::rename(tmp, path);
}

std::optional<std::string> ConfigFile::get(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void ConfigFile::set(std::string_view key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::string(key), std::move(value));
}

Settings settings_from_config(const ConfigFile& cfg) {
  Settings s;
  for (const auto& key : setting_keys()) {
    if (auto v = cfg.get(key)) s = with_setting(std::move(s), key, *v);
  }
  return s;
}

SettingsStore::SettingsStore(Settings initial, std::optional<std::filesystem::path> persist_to)
    : settings_(std::move(initial)), persist_to_(std::move(persist_to)) {}

Settings SettingsStore::get() const {
  std::lock_guard lock(mutex_);
  return settings_;
}

SettingsStore::Change SettingsStore::set(std::string_view key, std::string_view value) {
  Settings updated;
  Change change;
  std::vector<Listener> listeners;
  {
    std::lock_guard lock(mutex_);
    updated = with_setting(settings_, key, value);
    change = {std::string(key), get_setting(settings_, key), get_setting(updated, key)};
    settings_ = updated;
    if (persist_to_) {
      auto file = ConfigFile::load(*persist_to_);
      file.set(key, change.new_value);
      file.save(*persist_to_);
    }
    listeners = listeners_;
  }
  for (const auto& l : listeners) l(updated, change);
  return change;
}

void SettingsStore::on_change(Listener l) {
  std::lock_guard lock(mutex_);
  listeners_.push_back(std::move(l));
}

}  // namespace quac
