#include "quac/providers.hpp"

#include <array>

namespace quac {

std::string_view to_string(ProviderErrorKind kind) {
  switch (kind) {
    case ProviderErrorKind::network: return "network";
    case ProviderErrorKind::timeout: return "timeout";
    case ProviderErrorKind::auth: return "auth";
    case ProviderErrorKind::rate_limited: return "rate_limited";
    case ProviderErrorKind::malformed_reply: return "malformed_reply";
    case ProviderErrorKind::empty_audio: return "empty_audio";
    case ProviderErrorKind::server_error: return "server_error";
  }
  return "?";
}

ProviderErrorKind parse_provider_error_kind(std::string_view name) {
  for (auto k : {ProviderErrorKind::network, ProviderErrorKind::timeout, ProviderErrorKind::auth,
                 ProviderErrorKind::rate_limited, ProviderErrorKind::malformed_reply,
                 ProviderErrorKind::empty_audio, ProviderErrorKind::server_error}) {
    if (to_string(k) == name) return k;
  }
  throw Error("unknown provider error kind: " + std::string(name));
}

ProviderErrorKind classify_http_status(int status) {
  if (status == 401 || status == 403) return ProviderErrorKind::auth;
  if (status == 429) return ProviderErrorKind::rate_limited;
  if (status == 408 || status == 504) return ProviderErrorKind::timeout;
  return ProviderErrorKind::server_error;
}

nlohmann::json build_vision_request(const PromptPayload& payload, const HttpVisionConfig& cfg) {
  auto content = nlohmann::json::array();
  for (const auto& part : payload.content_order()) {
    if (part.type == PromptPayload::Part::Type::text) {
      content.push_back({{"type", "text"}, {"text", payload.text_parts[part.index]}});
    } else {
      const auto& img = payload.image_parts[part.index];
      content.push_back(
          {{"type", "image_url"},
           {"image_url", {{"url", "data:" + img.media_type + ";base64," + img.data_b64}}}});
    }
  }
  return {
      {"model", cfg.model},
      {"max_tokens", cfg.max_tokens},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::move(content)}}})},
  };
}

nlohmann::json build_tts_request(std::string_view text, const VoiceDescriptor& voice) {
  return {{"text", text}, {"voice_id", voice.provider_voice_id}};
}

std::string parse_vision_reply(std::string_view body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) {
    throw ProviderError(ProviderErrorKind::malformed_reply, "vision reply is not JSON", 200);
  }
  const auto* content = [&]() -> const nlohmann::json* {
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) return nullptr;
    const auto& first = j["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content")) return nullptr;
    return &first["message"]["content"];
  }();
  if (!content || !content->is_string()) {
    throw ProviderError(ProviderErrorKind::malformed_reply,
                        "vision reply has no choices[0].message.content", 200);
  }
  return content->get<std::string>();
}

Millis estimate_mp3_duration(const std::vector<std::uint8_t>& bytes) {
  // MPEG-1 Layer III bit rates in kbit/s, indexed by the header's 4-bit field.
  static constexpr std::array<int, 16> kKbps = {0,   32,  40,  48,  56,  64,  80,  96,
                                                112, 128, 160, 192, 224, 256, 320, 0};
  int kbps = 128;
  for (std::size_t i = 0; i + 3 < bytes.size(); ++i) {
    if (bytes[i] == 0xFF && (bytes[i + 1] & 0xFE) == 0xFA) {
      const int rate = kKbps[bytes[i + 2] >> 4];
      if (rate) kbps = rate;
      break;
    }
  }
  return Millis{static_cast<std::int64_t>(bytes.size()) * 8 / kbps};
}

AudioClip silent_mp3(Millis duration) {
  // 1152 samples per frame at 44.1 kHz; 144 * 32000 / 44100 = 104 bytes.
  constexpr std::size_t kFrameBytes = 104;
  constexpr double kFrameMs = 1152.0 * 1000.0 / 44100.0;
  const auto frames = static_cast<std::size_t>(
      std::max<std::int64_t>(1, static_cast<std::int64_t>(duration.count() / kFrameMs + 0.999)));
  AudioClip clip;
  clip.bytes.assign(frames * kFrameBytes, 0);
  for (std::size_t f = 0; f < frames; ++f) {
    auto* h = &clip.bytes[f * kFrameBytes];
    h[0] = 0xFF;
    h[1] = 0xFB;  // MPEG-1, Layer III, no CRC
    h[2] = 0x10;  // 32 kbit/s, 44.1 kHz, no padding
    h[3] = 0xC0;  // mono
  }
  clip.duration = Millis{static_cast<std::int64_t>(frames * kFrameMs)};
  return clip;
}

Millis mock_speech_duration(std::string_view text) {
  return Millis{static_cast<std::int64_t>(text.size()) * 65};
}

}  // namespace quac
