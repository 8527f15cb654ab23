// All outbound network I/O lives in this file.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>

#include "quac/providers.hpp"

namespace quac {
namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ProviderError(ProviderErrorKind::network, "endpoint needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

template <class Rep, class Period>
void apply_timeout(httplib::Client& client, std::chrono::duration<Rep, Period> t) {
  client.set_connection_timeout(t);
  client.set_read_timeout(t);
  client.set_write_timeout(t);
}

/// Sends one POST and maps every failure onto ProviderError/Cancelled.
httplib::Result post(httplib::Client& client, const std::string& path, const httplib::Headers& headers,
                     const std::string& body, const std::string& content_type, Millis timeout,
                     const CancelToken& cancel) {
  if (cancel.cancelled()) throw Cancelled();
  auto stop = cancel.on_cancel([&client] { client.stop(); });
  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(path, headers, body, content_type);
  if (cancel.cancelled()) throw Cancelled();
  if (!res) {
    const auto err = res.error();
    const auto elapsed = std::chrono::steady_clock::now() - started;
    if (err == httplib::Error::ConnectionTimeout ||
        ((err == httplib::Error::Read || err == httplib::Error::Write) && elapsed >= timeout * 9 / 10)) {
      throw ProviderError(ProviderErrorKind::timeout, "request timed out: " + httplib::to_string(err));
    }
    throw ProviderError(ProviderErrorKind::network, "request failed: " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    const auto kind = classify_http_status(res->status);
    throw ProviderError(kind, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200),
                        res->status);
  }
  return res;
}

}  // namespace

std::string HttpVisionProvider::complete(const PromptPayload& payload, const CancelToken& cancel) {
  const auto ep = split_endpoint(cfg_.endpoint);
  httplib::Client client(ep.origin);
  apply_timeout(client, cfg_.timeout);
  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
  const auto body = build_vision_request(payload, cfg_).dump();
  auto res = post(client, ep.path, headers, body, "application/json", cfg_.timeout, cancel);
  return parse_vision_reply(res->body);
}

AudioClip HttpTtsProvider::synthesize(std::string_view text, const VoiceDescriptor& voice,
                                      const CancelToken& cancel) {
  if (text.empty()) throw PreconditionError("text to synthesize is empty");
  auto url = cfg_.endpoint;
  if (auto pos = url.find("{voice_id}"); pos != std::string::npos) {
    url.replace(pos, 10, voice.provider_voice_id);
  }
  const auto ep = split_endpoint(url);
  httplib::Client client(ep.origin);
  apply_timeout(client, cfg_.timeout);
  httplib::Headers headers{{"Accept", "audio/mpeg"}};
  if (!cfg_.api_key.empty()) {
    headers.emplace(cfg_.auth_header,
                    cfg_.auth_header == "Authorization" ? "Bearer " + cfg_.api_key : cfg_.api_key);
  }
  const auto body = build_tts_request(text, voice).dump();
  auto res = post(client, ep.path, headers, body, "application/json", cfg_.timeout, cancel);
  if (res->body.empty()) {
    throw ProviderError(ProviderErrorKind::empty_audio, "TTS returned no audio", res->status);
  }
  AudioClip clip;
  clip.media_type = res->get_header_value("Content-Type");
  if (clip.media_type.empty()) clip.media_type = "audio/mpeg";
  clip.bytes.assign(res->body.begin(), res->body.end());
  clip.duration = estimate_mp3_duration(clip.bytes);
  return clip;
}

}  // namespace quac
