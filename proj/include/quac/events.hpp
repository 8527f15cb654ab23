#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "quac/persona.hpp"
#include "quac/prompt.hpp"
#include "quac/providers.hpp"
#include "quac/session_log.hpp"
#include "quac/settings.hpp"
#include "quac/trigger.hpp"

namespace quac {

// Notifications pushed from the daemon to UI clients.

struct GenerationStarted {
  std::string event_id;
  PayloadKind kind = PayloadKind::feedback;
  PersonaId persona = PersonaId::mentor;
  TriggerKind trigger = TriggerKind::manual;
};

struct FeedbackReady {
  std::string event_id;
  PersonaId persona = PersonaId::mentor;
  std::string text;
  Millis audio_duration{0};
};

struct EmojiReady {
  std::string event_id;
  EmojiSet emojis;
};

struct GenerationFailed {
  std::string event_id;
  EventStatus status = EventStatus::provider_error;
  std::optional<ProviderErrorKind> error_kind;
  std::string message;
};

struct SettingsChanged {
  Settings settings;
};

struct PlaybackFinished {
  std::string event_id;
  bool completed = true;
};

using UiEvent = std::variant<GenerationStarted, FeedbackReady, EmojiReady, GenerationFailed,
                             SettingsChanged, PlaybackFinished>;

using EventSink = std::function<void(const UiEvent&)>;

/// {"event": "<Name>", ...fields}
nlohmann::json event_to_json(const UiEvent& e);
std::string_view event_name(const UiEvent& e);

}  // namespace quac
