#include <doctest.h>

#include <random>

#include "quac/settings.hpp"
#include "support.hpp"

using namespace quac;

namespace {

Settings random_settings(std::mt19937& rng) {
  auto pick = [&](auto const& v) { return v[rng() % v.size()]; };
  const std::vector<std::string> personas = {"mentor", "cheerleader", "critic", "designer",
                                             "analyst", "ceo", "friend", "no_persona"};
  const std::vector<std::string> modes = {"whole_screen", "active_window", "cursor_region"};
  const std::vector<std::string> cycles = {"off", "30s", "3m", "5m"};
  const std::vector<std::string> chords = {"Primary+R", "Ctrl+Alt+F5", "Primary+Shift+Q", "Alt+9"};
  Settings s;
  s = with_setting(s, "persona", pick(personas));
  s = with_setting(s, "capture.mode", pick(modes));
  s = with_setting(s, "capture.cursor_region",
                   std::to_string(1 + rng() % 4000) + "x" + std::to_string(1 + rng() % 3000));
  s = with_setting(s, "cycle.voice", pick(cycles));
  s = with_setting(s, "cycle.emoji", pick(cycles));
  s = with_setting(s, "memory_depth", std::to_string(rng() % 6));
  s.hotkeys.feedback = parse_chord(pick(chords));
  s.hotkeys.emoji = parse_chord("Primary+E");
  if (rng() % 2) s = with_setting(s, "voice." + pick(personas), "custom" + std::to_string(rng() % 100));
  return s;
}

}  // namespace

TEST_CASE("defaults") {
  Settings s;
  CHECK(get_setting(s, "persona") == "mentor");
  CHECK(get_setting(s, "capture.mode") == "whole_screen");
  CHECK(get_setting(s, "capture.cursor_region") == "1024x768");
  CHECK(get_setting(s, "cycle.voice") == "3m");
  CHECK(get_setting(s, "cycle.emoji") == "30s");
  CHECK(get_setting(s, "memory_depth") == "2");
  CHECK(get_setting(s, "hotkeys.feedback") == "Primary+R");
  CHECK(get_setting(s, "hotkeys.emoji") == "Primary+E");
  CHECK(get_setting(s, "voice.critic") == "O7p2vmz2iEYgMXxkbsif");
  CHECK(setting_keys().size() == 16);
}

TEST_CASE("invalid values are rejected and leave settings unchanged") {
  const Settings s;
  const std::pair<const char*, const char*> bad[] = {
      {"persona", "intern"},      {"capture.mode", "window"},   {"capture.cursor_region", "big"},
      {"cycle.voice", "1m"},      {"cycle.emoji", "10s"},       {"memory_depth", "-1"},
      {"memory_depth", "two"},    {"hotkeys.feedback", "R"},    {"hotkeys.emoji", "Primary+R"},
      {"voice.critic", ""},       {"nonsense", "1"},            {"voice.intern", "x"},
  };
  for (const auto& [k, v] : bad) {
    CAPTURE(k);
    CHECK_THROWS_AS(with_setting(s, k, v), SettingError);
  }
  CHECK_THROWS_AS(get_setting(s, "nonsense"), SettingError);
}

TEST_CASE("voice overrides") {
  auto s = with_setting(Settings{}, "voice.ceo", "abc123");
  CHECK(s.voice_for(PersonaId::ceo).provider_voice_id == "abc123");
  CHECK(s.voice_for(PersonaId::ceo).description == resolve(PersonaId::ceo).voice.description);
  CHECK(s.voice_for(PersonaId::mentor) == resolve(PersonaId::mentor).voice);
  s = with_setting(s, "voice.ceo", resolve(PersonaId::ceo).voice.provider_voice_id);
  CHECK(s.voice_overrides.empty());
}

TEST_CASE("config file round trip property") {
  std::mt19937 rng(3);
  for (int i = 0; i < 300; ++i) {
    const auto s = random_settings(rng);
    ConfigFile cfg;
    for (const auto& k : setting_keys()) cfg.set(k, get_setting(s, k));
    const auto reparsed = ConfigFile::parse(cfg.dump());
    CHECK(settings_from_config(reparsed) == s);
    // And through the JSON view.
    const auto j = settings_to_json(s);
    Settings back;
    for (const auto& k : setting_keys()) {
      back = with_setting(back, k, j[k].is_string() ? j[k].get<std::string>() : j[k].dump());
    }
    CHECK(back == s);
  }
}

TEST_CASE("config parsing") {
  const auto cfg = ConfigFile::parse("# comment\n\n persona = critic \nprovider=mock\nx = a = b\n");
  CHECK(cfg.get("persona") == "critic");
  CHECK(cfg.get("provider") == "mock");
  CHECK(cfg.get("x") == "a = b");
  CHECK_FALSE(cfg.get("missing").has_value());
  CHECK_THROWS_AS(ConfigFile::parse("just words\n"), SettingError);
  CHECK(settings_from_config(cfg).persona == PersonaId::critic);
  CHECK_THROWS_AS(settings_from_config(ConfigFile::parse("memory_depth = lots")), SettingError);
}

TEST_CASE("store validates, persists and notifies") {
  testing::TempDir dir;
  const auto path = dir / "config";
  testing::write_file(path, "provider = mock\npersona = analyst\n");
  SettingsStore store(settings_from_config(ConfigFile::load(path)), path);
  std::vector<SettingsStore::Change> seen;
  store.on_change([&](const Settings& s, const SettingsStore::Change& c) {
    CHECK(get_setting(s, c.key) == c.new_value);
    seen.push_back(c);
  });

  const auto c = store.set("persona", "CEO");
  CHECK(c.old_value == "analyst");
  CHECK(c.new_value == "ceo");
  CHECK(store.get().persona == PersonaId::ceo);
  CHECK_THROWS_AS(store.set("memory_depth", "-3"), SettingError);
  CHECK(store.get().memory_depth == 2);
  REQUIRE(seen.size() == 1);

  const auto saved = ConfigFile::load(path);
  CHECK(saved.get("persona") == "ceo");
  CHECK(saved.get("provider") == "mock");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}
