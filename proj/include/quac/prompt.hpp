#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "quac/image.hpp"
#include "quac/persona.hpp"

namespace quac {

namespace prompts {

inline constexpr std::string_view kGeneration =
    "Provide feedback on the work in the photo(s) in a casual and constructive way. If there are "
    "multiple photos, they represent the progression of work over a period of time - focus on "
    "recent changes. Keep it under 50 words. Highlight strengths and offer one suggestion for "
    "improvement.";

inline constexpr std::string_view kContextPrefix =
    "Try not to repeat yourself, here is what you have said previously: ";

inline constexpr std::string_view kEmoji =
    "Please generate 5 UNICODE emojis based on the image, you can repeat and please show support "
    "to the designer. Besides adding a few supportive emojis like heart, congrats, etc. Make sure "
    "your output contains only emojis, no TEXT.";

/// Joins multiple prior feedback texts inside the context part.
inline constexpr std::string_view kContextSeparator = " ||| ";

}  // namespace prompts

enum class PayloadKind { feedback, emoji };

std::string_view to_string(PayloadKind kind);
PayloadKind parse_payload_kind(std::string_view name);

/// Prior feedback replayed into the context prompt, oldest first. Both lists
/// always have the same length.
struct MemorySnapshot {
  std::vector<std::string> feedback_texts;
  std::vector<EncodedImage> screenshots;

  std::size_t size() const { return feedback_texts.size(); }
  bool empty() const { return feedback_texts.empty(); }
};

struct PromptPayload {
  /// Feedback: [personality, generation, (context)]; emoji: [emoji prompt].
  std::vector<std::string> text_parts;
  /// Chronological, current capture last.
  std::vector<EncodedImage> image_parts;
  PayloadKind kind = PayloadKind::feedback;

  struct Part {
    enum class Type { text, image } type;
    std::size_t index;
  };

  /// Order in which parts are sent to a provider: the leading prompts (two
  /// for feedback, one for emoji), then every image, then any context text.
  std::vector<Part> content_order() const;

  /// SHA-256 over a length-prefixed serialization of every part.
  std::string digest() const;
};

PromptPayload assemble_feedback(const Persona& persona, const EncodedImage& current,
                                const MemorySnapshot& memory);

PromptPayload assemble_emoji(const EncodedImage& current);

/// Whitespace-separated token count.
std::size_t word_count(std::string_view text);

class EmojiValidationError : public Error {
 public:
  using Error::Error;
};

/// One element per emoji, each a complete sequence (flag pairs, keycaps,
/// modifier and ZWJ sequences stay together). Variation selectors that follow
/// an emoji are kept with it.
using EmojiSet = std::vector<std::string>;

/// Accepts a reply made only of emoji and whitespace with at least one emoji.
/// Throws EmojiValidationError otherwise.
EmojiSet validate_emoji_reply(std::string_view raw);

}  // namespace quac
