#include "quac/prompt.hpp"

#include <cstdio>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace quac {
namespace {

constexpr UChar32 kZwj = 0x200D;
constexpr UChar32 kKeycap = 0x20E3;

bool is_variation_selector(UChar32 c) { return c == 0xFE0E || c == 0xFE0F; }
bool is_tag(UChar32 c) { return c >= 0xE0020 && c <= 0xE007F; }
bool is_keycap_base(UChar32 c) { return (c >= '0' && c <= '9') || c == '#' || c == '*'; }
bool is_pictographic(UChar32 c) { return u_hasBinaryProperty(c, UCHAR_EXTENDED_PICTOGRAPHIC); }
bool is_modifier(UChar32 c) { return u_hasBinaryProperty(c, UCHAR_EMOJI_MODIFIER); }
bool is_regional(UChar32 c) { return u_hasBinaryProperty(c, UCHAR_REGIONAL_INDICATOR); }

std::vector<UChar32> decode_utf8(std::string_view s) {
  std::vector<UChar32> out;
  const auto* data = reinterpret_cast<const uint8_t*>(s.data());
  const auto len = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < len) {
    UChar32 c = 0;
    U8_NEXT(data, i, len, c);
    if (c < 0) throw EmojiValidationError("reply is not valid UTF-8");
    out.push_back(c);
  }
  return out;
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool err = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), n, U8_MAX_LENGTH, c, err);
  if (err) return;
  out.append(buf, static_cast<std::size_t>(n));
}

std::string describe(UChar32 c) {
  std::string s;
  append_utf8(s, c);
  char hex[16];
  std::snprintf(hex, sizeof hex, " (U+%04X)", static_cast<unsigned>(c));
  return "'" + s + "'" + hex;
}

}  // namespace

EmojiSet validate_emoji_reply(std::string_view raw) {
  const auto cps = decode_utf8(raw);
  EmojiSet out;
  bool current = false;  // out.back() still accepts selectors, modifiers and joiners

  for (std::size_t i = 0; i < cps.size(); ++i) {
    const UChar32 c = cps[i];
    if (u_isUWhiteSpace(c)) {
      current = false;
      continue;
    }
    if (is_variation_selector(c) || is_tag(c) || (c == kKeycap && current) ||
        (is_modifier(c) && current)) {
      if (current) append_utf8(out.back(), c);
      continue;
    }
    if (c == kZwj) {
      // Only meaningful between two pictographs; a stray joiner is dropped.
      if (current && i + 1 < cps.size() && is_pictographic(cps[i + 1])) {
        append_utf8(out.back(), c);
        append_utf8(out.back(), cps[++i]);
      }
      continue;
    }
    if (is_keycap_base(c)) {
      std::size_t j = i + 1;
      if (j < cps.size() && cps[j] == 0xFE0F) ++j;
      if (j < cps.size() && cps[j] == kKeycap) {
        std::string seq;
        for (std::size_t k = i; k <= j; ++k) append_utf8(seq, cps[k]);
        out.push_back(std::move(seq));
        current = true;
        i = j;
        continue;
      }
      throw EmojiValidationError("reply contains text: " + describe(c));
    }
    if (is_regional(c)) {
      std::string flag;
      append_utf8(flag, c);
      if (i + 1 < cps.size() && is_regional(cps[i + 1])) append_utf8(flag, cps[++i]);
      out.push_back(std::move(flag));
      current = true;
      continue;
    }
    if (is_pictographic(c) || is_modifier(c)) {
      out.emplace_back();
      append_utf8(out.back(), c);
      current = true;
      continue;
    }
    throw EmojiValidationError("reply contains text: " + describe(c));
  }
  if (out.empty()) throw EmojiValidationError("reply contains no emoji");
  return out;
}

}  // namespace quac
