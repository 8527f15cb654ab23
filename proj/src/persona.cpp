#include "quac/persona.hpp"

#include <algorithm>
#include <cctype>

namespace quac {
namespace {

// Prompts are kept byte-for-byte, including the typographic apostrophe in the
// cheerleader prompt and the em dash in the critic prompt.
const std::array<Persona, kPersonaCount> kCatalog = {{
    {PersonaId::mentor, "Mentor", PersonaAxis::positivity,
     "Imagine you are an empathetic mentor. Your feedback approach combines empathy with direct "
     "feedback, focusing on growth and empowering individuals, especially in leadership contexts. "
     "It emphasizes constructive criticism while maintaining respect and support.",
     {"cgSgspJ2msm6clMCkdW9", "Female, Young, American, Expressive, Conversational"},
     "duck-mentor"},
    {PersonaId::cheerleader, "Cheerleader", PersonaAxis::positivity,
     "Imagine you are a cheerleader, this person's number one fan. You give overwhelmingly "
     "positive feedback that focuses heavily on encouragement, often avoiding or downplaying "
     "criticism. It’s full of energy and enthusiasm, meant to boost morale.",
     {"jBpfuIE2acCO8z3wKNLl", "Female, Young, American, Childish, Animation"},
     "duck-cheerleader"},
    {PersonaId::critic, "Critic", PersonaAxis::positivity,
     "Imagine you are a grumpy old design critic. You give blunt, direct, and critical feedback "
     "that is thorough and detail-oriented. You focus on flaws and inconsistencies without "
     "sugarcoating, no need to add praise—you're focused on areas of improvement.",
     {"O7p2vmz2iEYgMXxkbsif", "Non-binary, English, Sassy"},
     "duck-critic"},
    {PersonaId::designer, "Designer", PersonaAxis::design_aspect,
     "Imagine you are a grand artist. Your feedback is delivered with a sense of flair, drama, "
     "and emotion, often focusing on the artistry, creativity, and vision of the work. There is "
     "a tendency to speak in metaphors or poetic language.",
     {"pFZP5JQG7iQjIQuC4Bku", "Female, Middle-aged, British, Warm, Narration"},
     "duck-designer"},
    {PersonaId::analyst, "Analyst", PersonaAxis::design_aspect,
     "Imagine you are an analytical pragmatist. Your feedback is detailed and data-driven, with "
     "a focus on long-term strategy and solving complex problems. You are known for being "
     "thoughtful, reasoned, and less emotional in your feedback approach.",
     {"XrExE9yKIg1WjnnlVkGX", "Female, Middle-aged, American, Friendly, Narration"},
     "duck-analyst"},
    {PersonaId::ceo, "CEO", PersonaAxis::design_aspect,
     "Imagine you are a direct, critical, visionary. Your feedback approach is known for being "
     "brutally honest, often focusing on high standards, pushing employees to perfection, but "
     "also inspiring innovation. Feedback could be harsh, but it often spurred creativity.",
     {"ThT5KcBeYPX3keUQqHPh", "Female, Young, British, Pleasant, Narration"},
     "duck-ceo"},
    {PersonaId::friend_, "Friend", PersonaAxis::humanness,
     "Imagine you are in your girlboss era. Your feedback is assertive, confident, and often "
     "delivered with a playful or cheeky tone. This style can be empowering but often combines "
     "directness with flair and attitude.",
     {"jsCqWAovK2LkecY7zXl4", "Female, Young, American, Expressive, Characters"},
     "duck-friend"},
    {PersonaId::no_persona, "No Persona (AI)", PersonaAxis::humanness,
     "Imagine you are an AI. Do not pretend to be a person. Just give factual feedback plainly.",
     {"pMsXgVXv3BLzUgSXRplE", "Female, Middle-aged, American, Pleasant, Narration"},
     "duck-ai"},
}};

constexpr std::array<std::string_view, kPersonaCount> kNames = {
    "mentor", "cheerleader", "critic", "designer", "analyst", "ceo", "friend", "no_persona"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view to_string(PersonaId id) { return kNames[static_cast<std::size_t>(id)]; }

std::string_view to_string(PersonaAxis axis) {
  switch (axis) {
    case PersonaAxis::positivity: return "positivity";
    case PersonaAxis::design_aspect: return "design_aspect";
    case PersonaAxis::humanness: return "humanness";
  }
  return "?";
}

std::optional<PersonaId> parse_persona_id(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (iequals(name, kNames[i])) return static_cast<PersonaId>(i);
  }
  return std::nullopt;
}

std::span<const Persona> list_personas() { return kCatalog; }

const Persona& resolve(PersonaId id) { return kCatalog[static_cast<std::size_t>(id)]; }

const Persona& resolve(std::string_view name) {
  auto id = parse_persona_id(name);
  if (!id) throw UnknownPersona(name);
  return resolve(*id);
}

std::optional<PersonaId> persona_for_prompt(std::string_view personality_prompt) {
  for (const auto& p : kCatalog) {
    if (p.personality_prompt == personality_prompt) return p.id;
  }
  return std::nullopt;
}

nlohmann::json persona_to_json(const Persona& p) {
  return {
      {"id", to_string(p.id)},
      {"display_name", p.display_name},
      {"axis", to_string(p.axis)},
      {"voice", {{"id", p.voice.provider_voice_id}, {"description", p.voice.description}}},
      {"icon_ref", p.icon_ref},
  };
}

nlohmann::json personas_json() {
  auto arr = nlohmann::json::array();
  for (const auto& p : kCatalog) arr.push_back(persona_to_json(p));
  return arr;
}

}  // namespace quac
