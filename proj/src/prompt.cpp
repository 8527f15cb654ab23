#include "quac/prompt.hpp"

#include <cctype>

namespace quac {

std::string_view to_string(PayloadKind kind) {
  return kind == PayloadKind::feedback ? "feedback" : "emoji";
}

PayloadKind parse_payload_kind(std::string_view name) {
  if (name == "feedback") return PayloadKind::feedback;
  if (name == "emoji") return PayloadKind::emoji;
  throw Error("unknown payload kind: " + std::string(name));
}

std::vector<PromptPayload::Part> PromptPayload::content_order() const {
  const std::size_t leading =
      std::min<std::size_t>(text_parts.size(), kind == PayloadKind::feedback ? 2 : 1);
  std::vector<Part> order;
  order.reserve(text_parts.size() + image_parts.size());
  for (std::size_t i = 0; i < leading; ++i) order.push_back({Part::Type::text, i});
  for (std::size_t i = 0; i < image_parts.size(); ++i) order.push_back({Part::Type::image, i});
  for (std::size_t i = leading; i < text_parts.size(); ++i) order.push_back({Part::Type::text, i});
  return order;
}

std::string PromptPayload::digest() const {
  std::string buf;
  buf += to_string(kind);
  buf += '\n';
  for (const auto& t : text_parts) {
    buf += "T" + std::to_string(t.size()) + ":";
    buf += t;
  }
  for (const auto& img : image_parts) {
    buf += "I" + img.media_type + ";" + std::to_string(img.data_b64.size()) + ":";
    buf += img.data_b64;
  }
  return sha256_hex(buf);
}

PromptPayload assemble_feedback(const Persona& persona, const EncodedImage& current,
                                const MemorySnapshot& memory) {
  PromptPayload p;
  p.kind = PayloadKind::feedback;
  p.text_parts.push_back(persona.personality_prompt);
  p.text_parts.emplace_back(prompts::kGeneration);
  if (!memory.feedback_texts.empty()) {
    std::string context(prompts::kContextPrefix);
    for (std::size_t i = 0; i < memory.feedback_texts.size(); ++i) {
      if (i) context += prompts::kContextSeparator;
      context += memory.feedback_texts[i];
    }
    p.text_parts.push_back(std::move(context));
  }
  p.image_parts = memory.screenshots;
  p.image_parts.push_back(current);
  return p;
}

PromptPayload assemble_emoji(const EncodedImage& current) {
  PromptPayload p;
  p.kind = PayloadKind::emoji;
  p.text_parts.emplace_back(prompts::kEmoji);
  p.image_parts.push_back(current);
  return p;
}

std::size_t word_count(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

}  // namespace quac
