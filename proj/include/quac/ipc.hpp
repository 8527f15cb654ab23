#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "quac/common.hpp"

namespace quac {

/// Error returned to a client as {"ok": false, "error": {code, message}}.
class IpcError : public Error {
 public:
  IpcError(std::string code, const std::string& message)
      : Error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Socket path: $QUAC_SOCKET, else $XDG_RUNTIME_DIR/quac.sock, else
/// /tmp/quac-<uid>.sock.
std::filesystem::path default_socket_path();

/// Newline-delimited JSON over a Unix domain socket.
///
/// Requests:  {"request_id": any, "command": "...", "args": {...}}
/// Replies:   {"type": "reply", "request_id": ..., "ok": true, "result": {...}}
///            {"type": "reply", "request_id": ..., "ok": false, "error": {...}}
/// Events:    {"type": "event", "event": "...", ...}
class IpcServer {
 public:
  /// Returns the result object, or throws IpcError.
  using Handler = std::function<nlohmann::json(const std::string& command, const nlohmann::json& args)>;

  /// Per-client outbound queue limit; a client that falls further behind
  /// is disconnected.
  static constexpr std::size_t kMaxQueued = 1024;

  IpcServer(std::filesystem::path socket_path, Handler handler);
  ~IpcServer();
  IpcServer(const IpcServer&) = delete;
  IpcServer& operator=(const IpcServer&) = delete;

  /// Binds and starts accepting. Throws Error when the socket is in use by a
  /// live server.
  void start();
  void stop();

  void broadcast(const nlohmann::json& event);
  std::size_t client_count() const;
  const std::filesystem::path& path() const { return path_; }

  /// Handles one request line; exposed for tests.
  nlohmann::json handle_line(std::string_view line) const;

 private:
  struct Client;
  void accept_loop(std::stop_token st);
  void reader_loop(Client& c);
  void writer_loop(Client& c);
  void enqueue(Client& c, std::string line);
  void reap();

  std::filesystem::path path_;
  Handler handler_;
  int listen_fd_ = -1;
  int wake_pipe_[2] = {-1, -1};
  mutable std::mutex mutex_;
  std::list<std::shared_ptr<Client>> clients_;
  std::jthread acceptor_;
};

/// Blocking client. Events that arrive while waiting for a reply are queued
/// for next_event().
class IpcClient {
 public:
  /// Throws Error when nothing is listening.
  explicit IpcClient(const std::filesystem::path& socket_path);
  ~IpcClient();
  IpcClient(const IpcClient&) = delete;
  IpcClient& operator=(const IpcClient&) = delete;

  /// Full reply object. Throws Error on timeout or disconnect.
  nlohmann::json request(const std::string& command, nlohmann::json args = nlohmann::json::object(),
                         Millis timeout = Millis{30'000});
  /// Returns the result, or throws IpcError from an error reply.
  nlohmann::json call(const std::string& command, nlohmann::json args = nlohmann::json::object(),
                      Millis timeout = Millis{30'000});

  std::optional<nlohmann::json> next_event(Millis timeout);
  /// Waits for an event with the given name, discarding others.
  std::optional<nlohmann::json> wait_for_event(const std::string& name, Millis timeout);

  void send_raw(std::string_view line);
  std::optional<nlohmann::json> read_message(Millis timeout);

 private:
  int fd_ = -1;
  std::string buffer_;
  std::deque<nlohmann::json> events_;
  std::uint64_t next_request_ = 1;
};

}  // namespace quac
