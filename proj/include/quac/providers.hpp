#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "quac/cancel.hpp"
#include "quac/persona.hpp"
#include "quac/prompt.hpp"

namespace quac {

enum class ProviderErrorKind {
  network,
  timeout,
  auth,
  rate_limited,
  malformed_reply,
  empty_audio,
  server_error,
};

std::string_view to_string(ProviderErrorKind kind);
ProviderErrorKind parse_provider_error_kind(std::string_view name);

class ProviderError : public Error {
 public:
  ProviderError(ProviderErrorKind kind, const std::string& what, int http_status = 0)
      : Error(what), kind_(kind), http_status_(http_status) {}
  ProviderErrorKind kind() const { return kind_; }
  /// Raw HTTP status, 0 when the failure happened below HTTP.
  int http_status() const { return http_status_; }
  bool retriable() const {
    return kind_ == ProviderErrorKind::rate_limited || kind_ == ProviderErrorKind::network;
  }

 private:
  ProviderErrorKind kind_;
  int http_status_;
};

/// Thrown by a provider call interrupted through its CancelToken.
class Cancelled : public Error {
 public:
  Cancelled() : Error("cancelled") {}
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

struct AudioClip {
  std::string media_type = "audio/mpeg";
  std::vector<std::uint8_t> bytes;
  Millis duration{0};
};

class VisionProvider {
 public:
  virtual ~VisionProvider() = default;
  /// Returns the model's text reply verbatim. Throws ProviderError or Cancelled.
  virtual std::string complete(const PromptPayload& payload, const CancelToken& cancel) = 0;
};

class TtsProvider {
 public:
  virtual ~TtsProvider() = default;
  /// Throws PreconditionError on empty text, ProviderError, or Cancelled.
  virtual AudioClip synthesize(std::string_view text, const VoiceDescriptor& voice,
                               const CancelToken& cancel) = 0;
};

// ---------------------------------------------------------------------------
// HTTP

struct HttpVisionConfig {
  std::string endpoint;  // e.g. https://api.openai.com/v1/chat/completions
  std::string model;
  std::string api_key;
  Millis timeout{30'000};
  int max_tokens = 300;
};

struct HttpTtsConfig {
  /// "{voice_id}" in the endpoint is replaced by the voice id.
  std::string endpoint;
  std::string api_key;
  Millis timeout{30'000};
  /// Header carrying the key. "Authorization" sends "Bearer <key>"; any other
  /// header name (e.g. "xi-api-key") sends the raw key.
  std::string auth_header = "Authorization";
};

/// Chat-completions request: one user message whose content lists the prompt
/// parts in PromptPayload::content_order(), images as PNG data URLs. Pure.
nlohmann::json build_vision_request(const PromptPayload& payload, const HttpVisionConfig& cfg);
nlohmann::json build_tts_request(std::string_view text, const VoiceDescriptor& voice);

/// Extracts choices[0].message.content. Throws ProviderError(malformed_reply).
std::string parse_vision_reply(std::string_view body);

/// Maps a non-2xx HTTP status to an error kind.
ProviderErrorKind classify_http_status(int status);

class HttpVisionProvider final : public VisionProvider {
 public:
  explicit HttpVisionProvider(HttpVisionConfig cfg) : cfg_(std::move(cfg)) {}
  std::string complete(const PromptPayload& payload, const CancelToken& cancel) override;

 private:
  HttpVisionConfig cfg_;
};

class HttpTtsProvider final : public TtsProvider {
 public:
  explicit HttpTtsProvider(HttpTtsConfig cfg) : cfg_(std::move(cfg)) {}
  AudioClip synthesize(std::string_view text, const VoiceDescriptor& voice,
                       const CancelToken& cancel) override;

 private:
  HttpTtsConfig cfg_;
};

struct RetryPolicy {
  int max_retries = 1;
  Millis backoff{2'000};
};

/// Runs fn, retrying retriable ProviderErrors per policy. The backoff sleep
/// is cancellable.
template <class Fn>
auto with_retry(const RetryPolicy& policy, const CancelToken& cancel, Fn&& fn) -> decltype(fn()) {
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const ProviderError& e) {
      if (!e.retriable() || attempt >= policy.max_retries) throw;
    }
    if (cancel.wait_for(policy.backoff)) throw Cancelled();
  }
}

/// Duration of an MPEG audio stream estimated from its first frame header's
/// bit rate; falls back to 128 kbit/s.
Millis estimate_mp3_duration(const std::vector<std::uint8_t>& bytes);

// ---------------------------------------------------------------------------
// Mocks

/// Canned replies and failures for the mock vision provider. The first
/// matching entry wins; unset match fields are wildcards.
struct MockScript {
  struct Entry {
    std::optional<PayloadKind> kind;
    std::optional<PersonaId> persona;
    std::optional<std::string> digest;
    std::string reply;
    std::optional<ProviderErrorKind> failure;
    int http_status = 0;
  };
  std::vector<Entry> entries;

  /// One feedback entry per persona, using that persona's sample reply.
  static MockScript defaults();
  /// {"entries": [{"kind"?, "persona"?, "digest"?, "reply"?, "failure"?, "http_status"?}]}
  static MockScript from_json(const nlohmann::json& j);

  const Entry* match(const PromptPayload& payload) const;
};

/// The persona's sample reply used by the default script.
std::string_view sample_reply(PersonaId id);

class MockVisionProvider final : public VisionProvider {
 public:
  explicit MockVisionProvider(MockScript script = MockScript::defaults(), Millis delay = Millis{0})
      : script_(std::move(script)), delay_(delay) {}

  std::string complete(const PromptPayload& payload, const CancelToken& cancel) override;

  void set_delay(Millis d) { delay_ = d; }
  int calls() const { return calls_; }

 private:
  MockScript script_;
  std::atomic<Millis> delay_;
  std::atomic<int> calls_{0};
};

class MockTtsProvider final : public TtsProvider {
 public:
  explicit MockTtsProvider(Millis delay = Millis{0}) : delay_(delay) {}

  AudioClip synthesize(std::string_view text, const VoiceDescriptor& voice,
                       const CancelToken& cancel) override;

  void set_delay(Millis d) { delay_ = d; }
  void fail_with(std::optional<ProviderErrorKind> kind);
  int calls() const { return calls_; }
  /// Voice id of the most recent call.
  std::string last_voice() const;

 private:
  std::atomic<Millis> delay_;
  std::optional<ProviderErrorKind> failure_;
  std::atomic<int> calls_{0};
  mutable std::mutex mutex_;
  std::string last_voice_;
};

/// Silent MPEG-1 Layer III stream (mono, 44.1 kHz, 32 kbit/s) of at least
/// the given duration.
AudioClip silent_mp3(Millis duration);

/// Spoken-length estimate used by the mock: 65 ms per byte of text.
Millis mock_speech_duration(std::string_view text);

}  // namespace quac
