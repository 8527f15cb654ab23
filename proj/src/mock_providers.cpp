#include <array>

#include "quac/providers.hpp"

namespace quac {
namespace {

// Sample replies for each persona on the egg-chair design.
constexpr std::array<std::string_view, kPersonaCount> kSampleReplies = {
    // mentor
    "You've made excellent progress on this 3D model; the shape looks balanced and inviting. For "
    "further refinement, consider adding texture or details to enhance the chair's visual appeal "
    "and comfort perception. Keep up the great work!",
    // cheerleader
    "Wow, your 3D modeling skills are impressive! That egg chair design is sleek and modern - "
    "absolutely stunning work! Maybe consider adding some textures or details to give it even "
    "more character! Keep shining, superstar!",
    // critic
    "The overall form is too simplistic and pedestrian. The base looks bulky and improperly "
    "balanced with the shell. Rethink the aesthetics and functional design of the base for better "
    "visual harmony and stability. Add textural elements or ergonomic features.",
    // designer
    "Ah, a digital sculptor's egg! The curves and contours of your creation whisper the promise "
    "of comfort and seclusion. For a touch of finesse, consider playing with texture to tease the "
    "senses, making the visual dance with the tactile.",
    // analyst
    "The CAD design displays a clean, organic shape, suggesting good ergonomic consideration. For "
    "improvement, apply material stress analysis to ensure functionality matches form. Note: I'm "
    "unable to provide specific feedback on the progression of work without multiple images "
    "showing changes over time.",
    // ceo
    "The chair's organic shape is intriguing, but it needs refinement—consider the user's comfort "
    "and add cushions or ergonomic features to transcend mere aesthetics.",
    // friend
    "Honey, that's one sleek egg chair design you've whipped up in Fusion—modern vibe check "
    "passed! Maybe give it a pop of color to make it truly iconic? Shine on!",
    // no_persona
    "The 3D model appears well-constructed with smooth surfaces. For improvement, consider adding "
    "textures or colors to enhance visual appeal.",
};

constexpr std::array<std::string_view, 6> kFallbackReplies = {
    "The layout reads clearly and the proportions feel deliberate. Consider tightening the spacing "
    "around the main element so the focal point stands out.",
    "Nice progress since the last look; the shapes are cleaner. Consider testing a contrasting "
    "color to separate foreground from background.",
    "The structure is coherent and the details are consistent. Consider simplifying the busiest "
    "area so the eye has somewhere to rest.",
    "Solid direction with a confident silhouette. Consider refining the edges where surfaces meet "
    "to make the form feel finished.",
    "The composition is balanced and the intent is clear. Consider adding one texture to give the "
    "surface more character.",
    "Good momentum; recent changes improved readability. Consider checking alignment along the "
    "left edge for a crisper look.",
};

constexpr std::array<std::string_view, 12> kEmojiPool = {
    "🥚", "🪑", "❤️", "🎉", "👏", "✨", "🔥", "💯", "🙌", "🎨", "🌟", "👍"};

unsigned digest_byte(const std::string& hex, std::size_t i) {
  return static_cast<unsigned>(std::stoul(hex.substr(2 * (i % 32), 2), nullptr, 16));
}

}  // namespace

std::string_view sample_reply(PersonaId id) { return kSampleReplies[static_cast<std::size_t>(id)]; }

MockScript MockScript::defaults() {
  MockScript s;
  for (const auto& p : list_personas()) {
    s.entries.push_back({PayloadKind::feedback, p.id, std::nullopt, std::string(sample_reply(p.id)),
                         std::nullopt, 0});
  }
  return s;
}

MockScript MockScript::from_json(const nlohmann::json& j) {
  MockScript s;
  for (const auto& e : j.at("entries")) {
    Entry entry;
    if (e.contains("kind")) entry.kind = parse_payload_kind(e["kind"].get<std::string>());
    if (e.contains("persona")) entry.persona = resolve(e["persona"].get<std::string>()).id;
    if (e.contains("digest")) entry.digest = e["digest"].get<std::string>();
    entry.reply = e.value("reply", "");
    if (e.contains("failure")) entry.failure = parse_provider_error_kind(e["failure"].get<std::string>());
    entry.http_status = e.value("http_status", 0);
    s.entries.push_back(std::move(entry));
  }
  return s;
}

const MockScript::Entry* MockScript::match(const PromptPayload& payload) const {
  std::optional<PersonaId> persona;
  if (payload.kind == PayloadKind::feedback && !payload.text_parts.empty()) {
    persona = persona_for_prompt(payload.text_parts.front());
  }
  std::optional<std::string> digest;
  for (const auto& e : entries) {
    if (e.kind && *e.kind != payload.kind) continue;
    if (e.persona && e.persona != persona) continue;
    if (e.digest) {
      if (!digest) digest = payload.digest();
      if (*e.digest != *digest) continue;
    }
    return &e;
  }
  return nullptr;
}

std::string MockVisionProvider::complete(const PromptPayload& payload, const CancelToken& cancel) {
  ++calls_;
  if (cancel.wait_for(delay_.load())) throw Cancelled();

  if (const auto* e = script_.match(payload)) {
    if (e->failure) {
      throw ProviderError(*e->failure, "scripted " + std::string(to_string(*e->failure)),
                          e->http_status);
    }
    return e->reply;
  }

  const auto digest = payload.digest();
  if (payload.kind == PayloadKind::emoji) {
    std::string out;
    for (std::size_t i = 0; i < 5; ++i) out += kEmojiPool[digest_byte(digest, i) % kEmojiPool.size()];
    return out;
  }
  return std::string(kFallbackReplies[digest_byte(digest, 0) % kFallbackReplies.size()]);
}

AudioClip MockTtsProvider::synthesize(std::string_view text, const VoiceDescriptor& voice,
                                      const CancelToken& cancel) {
  if (text.empty()) throw PreconditionError("text to synthesize is empty");
  ++calls_;
  std::optional<ProviderErrorKind> failure;
  {
    std::lock_guard lock(mutex_);
    last_voice_ = voice.provider_voice_id;
    failure = failure_;
  }
  if (cancel.wait_for(delay_.load())) throw Cancelled();
  if (failure) throw ProviderError(*failure, "scripted " + std::string(to_string(*failure)));
  return silent_mp3(mock_speech_duration(text));
}

void MockTtsProvider::fail_with(std::optional<ProviderErrorKind> kind) {
  std::lock_guard lock(mutex_);
  failure_ = kind;
}

std::string MockTtsProvider::last_voice() const {
  std::lock_guard lock(mutex_);
  return last_voice_;
}

}  // namespace quac
