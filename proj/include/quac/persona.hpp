#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "quac/common.hpp"

namespace quac {

enum class PersonaId {
  mentor,
  cheerleader,
  critic,
  designer,
  analyst,
  ceo,
  friend_,
  no_persona,
};

inline constexpr std::size_t kPersonaCount = 8;

/// The three columns personas are grouped into.
enum class PersonaAxis { positivity, design_aspect, humanness };

struct VoiceDescriptor {
  std::string provider_voice_id;
  std::string description;
  bool operator==(const VoiceDescriptor&) const = default;
};

struct Persona {
  PersonaId id;
  std::string display_name;
  PersonaAxis axis;
  std::string personality_prompt;
  VoiceDescriptor voice;
  std::string icon_ref;
};

class UnknownPersona : public Error {
 public:
  explicit UnknownPersona(std::string_view name)
      : Error("unknown persona: " + std::string(name)) {}
};

/// Canonical lowercase name ("friend", "no_persona", ...).
std::string_view to_string(PersonaId id);
std::string_view to_string(PersonaAxis axis);

/// Case-insensitive; returns nullopt when the name matches no persona.
std::optional<PersonaId> parse_persona_id(std::string_view name);

/// All eight personas in panel order: mentor, cheerleader, critic, designer,
/// analyst, ceo, friend, no_persona.
std::span<const Persona> list_personas();

const Persona& resolve(PersonaId id);
/// Throws UnknownPersona.
const Persona& resolve(std::string_view name);

/// Reverse lookup used by the mock provider to recover the persona from an
/// assembled prompt.
std::optional<PersonaId> persona_for_prompt(std::string_view personality_prompt);

nlohmann::json persona_to_json(const Persona& p);
/// Catalog in the shape consumed by the overlay: array of
/// {id, display_name, axis, voice: {id, description}, icon_ref}.
nlohmann::json personas_json();

}  // namespace quac
