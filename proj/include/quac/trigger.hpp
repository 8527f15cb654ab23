#pragma once

#include <functional>
#include <optional>
#include <string_view>

#include "quac/persona.hpp"
#include "quac/prompt.hpp"

namespace quac {

/// Who asked: a hotkey/IPC request, or a cycle timer.
enum class TriggerKind { manual, automatic };

std::string_view to_string(TriggerKind kind);
TriggerKind parse_trigger_kind(std::string_view name);

struct Trigger {
  PayloadKind kind = PayloadKind::feedback;
  TriggerKind source = TriggerKind::manual;
  std::optional<PersonaId> persona_override;
  Timestamp at{0};
};

using TriggerSink = std::function<void(const Trigger&)>;

}  // namespace quac
