#include "quac/events.hpp"

namespace quac {

using nlohmann::json;

std::string_view event_name(const UiEvent& e) {
  static constexpr std::string_view names[] = {"GenerationStarted", "FeedbackReady",
                                               "EmojiReady",        "GenerationFailed",
                                               "SettingsChanged",   "PlaybackFinished"};
  return names[e.index()];
}

json event_to_json(const UiEvent& e) {
  json j = std::visit(
      [](const auto& ev) -> json {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, GenerationStarted>) {
          return {{"event_id", ev.event_id},
                  {"kind", to_string(ev.kind)},
                  {"persona", to_string(ev.persona)},
                  {"trigger", to_string(ev.trigger)}};
        } else if constexpr (std::is_same_v<T, FeedbackReady>) {
          return {{"event_id", ev.event_id},
                  {"persona", to_string(ev.persona)},
                  {"text", ev.text},
                  {"audio_duration_ms", ev.audio_duration.count()}};
        } else if constexpr (std::is_same_v<T, EmojiReady>) {
          return {{"event_id", ev.event_id}, {"emojis", ev.emojis}};
        } else if constexpr (std::is_same_v<T, GenerationFailed>) {
          json f = {{"event_id", ev.event_id},
                    {"status", to_string(ev.status)},
                    {"message", ev.message}};
          f["error_kind"] = ev.error_kind ? json(to_string(*ev.error_kind)) : json(nullptr);
          return f;
        } else if constexpr (std::is_same_v<T, SettingsChanged>) {
          return {{"settings", settings_to_json(ev.settings)}};
        } else {
          return {{"event_id", ev.event_id}, {"completed", ev.completed}};
        }
      },
      e);
  j["type"] = "event";
  j["event"] = event_name(e);
  return j;
}

}  // namespace quac
