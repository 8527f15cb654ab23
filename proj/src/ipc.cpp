#include "quac/ipc.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/stat.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>

namespace quac {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxLine = 1 << 20;

sockaddr_un make_addr(const std::filesystem::path& path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  const auto s = path.string();
  if (s.size() >= sizeof addr.sun_path) throw Error("socket path too long: " + s);
  std::memcpy(addr.sun_path, s.c_str(), s.size() + 1);
  return addr;
}

int connect_to(const std::filesystem::path& path) {
  const auto addr = make_addr(path);
  const int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    const int err = errno;
    ::close(fd);
    throw Error("cannot connect to " + path.string() + ": " + std::strerror(err));
  }
  return fd;
}

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

json error_reply(const json& request_id, const std::string& code, const std::string& message) {
  return {{"type", "reply"},
          {"request_id", request_id},
          {"ok", false},
          {"error", {{"code", code}, {"message", message}}}};
}

}  // namespace

std::filesystem::path default_socket_path() {
  if (const char* s = std::getenv("QUAC_SOCKET"); s && *s) return s;
  if (const char* d = std::getenv("XDG_RUNTIME_DIR"); d && *d) {
    return std::filesystem::path(d) / "quac.sock";
  }
  return "/tmp/quac-" + std::to_string(::getuid()) + ".sock";
}

struct IpcServer::Client {
  int fd = -1;
  std::mutex mutex;
  std::condition_variable cv;
  std::deque<std::string> queue;
  bool closed = false;
  std::thread reader;
  std::thread writer;

  void close() {
    std::lock_guard lock(mutex);
    if (closed) return;
    closed = true;
    ::shutdown(fd, SHUT_RDWR);
    cv.notify_all();
  }
  bool is_closed() {
    std::lock_guard lock(mutex);
    return closed;
  }
  ~Client() {
    close();
    if (reader.joinable()) reader.join();
    if (writer.joinable()) writer.join();
    ::close(fd);
  }
};

IpcServer::IpcServer(std::filesystem::path socket_path, Handler handler)
    : path_(std::move(socket_path)), handler_(std::move(handler)) {}

IpcServer::~IpcServer() { stop(); }

void IpcServer::start() {
  if (std::filesystem::exists(path_)) {
    try {
      ::close(connect_to(path_));
      throw IpcError("in_use", "another daemon is listening on " + path_.string());
    } catch (const IpcError&) {
      throw;
    } catch (const Error&) {
      std::filesystem::remove(path_);
    }
  }
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());

  const auto addr = make_addr(path_);
  listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listen_fd_ < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  if (::bind(listen_fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 16) != 0) {
    const int err = errno;
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error("cannot listen on " + path_.string() + ": " + std::strerror(err));
  }
  ::chmod(path_.c_str(), 0600);
  if (::pipe2(wake_pipe_, O_CLOEXEC) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
  acceptor_ = std::jthread([this](std::stop_token st) { accept_loop(st); });
}

void IpcServer::stop() {
  if (listen_fd_ < 0) return;
  acceptor_.request_stop();
  const char b = 'x';
  [[maybe_unused]] auto n = ::write(wake_pipe_[1], &b, 1);
  if (acceptor_.joinable()) acceptor_.join();

  std::list<std::shared_ptr<Client>> clients;
  {
    std::lock_guard lock(mutex_);
    clients.swap(clients_);
  }
  for (auto& c : clients) c->close();
  clients.clear();

  ::close(listen_fd_);
  ::close(wake_pipe_[0]);
  ::close(wake_pipe_[1]);
  listen_fd_ = -1;
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

void IpcServer::accept_loop(std::stop_token st) {
  while (!st.stop_requested()) {
    pollfd fds[2] = {{listen_fd_, POLLIN, 0}, {wake_pipe_[0], POLLIN, 0}};
    const int r = ::poll(fds, 2, 500);
    reap();
    if (r <= 0 || fds[1].revents) continue;
    if (!(fds[0].revents & POLLIN)) continue;
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;

    auto c = std::make_shared<Client>();
    c->fd = fd;
    Client& ref = *c;
    {
      std::lock_guard lock(mutex_);
      clients_.push_back(c);
    }
    ref.writer = std::thread([this, &ref] { writer_loop(ref); });
    ref.reader = std::thread([this, &ref] { reader_loop(ref); });
  }
}

void IpcServer::reap() {
  std::list<std::shared_ptr<Client>> dead;
  {
    std::lock_guard lock(mutex_);
    for (auto it = clients_.begin(); it != clients_.end();) {
      if ((*it)->is_closed()) {
        dead.push_back(std::move(*it));
        it = clients_.erase(it);
      } else {
        ++it;
      }
    }
  }
}

void IpcServer::reader_loop(Client& c) {
  std::string buf;
  char chunk[4096];
  for (;;) {
    const auto n = ::recv(c.fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buf.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = buf.find('\n')) != std::string::npos) {
      const auto line = buf.substr(0, nl);
      buf.erase(0, nl + 1);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      enqueue(c, handle_line(line).dump() + "\n");
    }
    if (buf.size() > kMaxLine) {
      enqueue(c, error_reply(nullptr, "bad_request", "line too long").dump() + "\n");
      break;
    }
  }
  // Let the writer drain queued replies before the socket goes away.
  std::unique_lock lock(c.mutex);
  c.cv.wait_for(lock, std::chrono::seconds(1), [&] { return c.queue.empty() || c.closed; });
  lock.unlock();
  c.close();
}

void IpcServer::writer_loop(Client& c) {
  for (;;) {
    std::string line;
    {
      std::unique_lock lock(c.mutex);
      c.cv.wait(lock, [&] { return !c.queue.empty() || c.closed; });
      if (c.closed) return;
      line = std::move(c.queue.front());
      c.queue.pop_front();
      if (c.queue.empty()) c.cv.notify_all();
    }
    if (!send_all(c.fd, line)) {
      c.close();
      return;
    }
  }
}

void IpcServer::enqueue(Client& c, std::string line) {
  bool overflow = false;
  {
    std::lock_guard lock(c.mutex);
    if (c.closed) return;
    if (c.queue.size() >= kMaxQueued) {
      overflow = true;
    } else {
      c.queue.push_back(std::move(line));
      c.cv.notify_all();
    }
  }
  if (overflow) c.close();
}

void IpcServer::broadcast(const json& event) {
  json msg = event;
  msg["type"] = "event";
  const auto line = msg.dump() + "\n";
  std::lock_guard lock(mutex_);
  for (auto& c : clients_) enqueue(*c, line);
}

std::size_t IpcServer::client_count() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& c : clients_) n += c->is_closed() ? 0 : 1;
  return n;
}

json IpcServer::handle_line(std::string_view line) const {
  json req;
  try {
    req = json::parse(line);
  } catch (const json::exception& e) {
    return error_reply(nullptr, "bad_request", std::string("malformed JSON: ") + e.what());
  }
  const json id = req.is_object() && req.contains("request_id") ? req["request_id"] : json(nullptr);
  if (!req.is_object() || !req.contains("command") || !req["command"].is_string()) {
    return error_reply(id, "bad_request", "request needs a string \"command\"");
  }
  json args = req.value("args", json::object());
  if (!args.is_object()) return error_reply(id, "bad_request", "\"args\" must be an object");
  try {
    json result = handler_(req["command"].get<std::string>(), args);
    return {{"type", "reply"}, {"request_id", id}, {"ok", true}, {"result", std::move(result)}};
  } catch (const IpcError& e) {
    return error_reply(id, e.code(), e.what());
  } catch (const json::exception& e) {
    return error_reply(id, "bad_request", e.what());
  } catch (const std::exception& e) {
    return error_reply(id, "internal", e.what());
  }
}

IpcClient::IpcClient(const std::filesystem::path& socket_path) : fd_(connect_to(socket_path)) {}

IpcClient::~IpcClient() {
  if (fd_ >= 0) ::close(fd_);
}

void IpcClient::send_raw(std::string_view line) {
  std::string s(line);
  if (s.empty() || s.back() != '\n') s += '\n';
  if (!send_all(fd_, s)) throw Error(std::string("send failed: ") + std::strerror(errno));
}

std::optional<json> IpcClient::read_message(Millis timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      const auto line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return json::parse(line);
    }
    const auto left =
        std::chrono::duration_cast<Millis>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(left));
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) return std::nullopt;
    char chunk[4096];
    const auto n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error("daemon closed the connection");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

json IpcClient::request(const std::string& command, json args, Millis timeout) {
  const auto id = next_request_++;
  send_raw(json{{"request_id", id}, {"command", command}, {"args", std::move(args)}}.dump());
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto left = std::chrono::duration_cast<Millis>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) break;
    auto msg = read_message(left);
    if (!msg) break;
    if (msg->value("type", "") == "event") {
      events_.push_back(std::move(*msg));
    } else if ((*msg)["request_id"] == id) {
      return *msg;
    }
  }
  throw Error("timed out waiting for reply to " + command);
}

json IpcClient::call(const std::string& command, json args, Millis timeout) {
  auto reply = request(command, std::move(args), timeout);
  if (!reply.value("ok", false)) {
    const auto& err = reply["error"];
    throw IpcError(err.value("code", "internal"), err.value("message", "request failed"));
  }
  return reply["result"];
}

std::optional<json> IpcClient::next_event(Millis timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (!events_.empty()) {
      auto e = std::move(events_.front());
      events_.pop_front();
      return e;
    }
    const auto left = std::chrono::duration_cast<Millis>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    auto msg = read_message(left);
    if (!msg) return std::nullopt;
    if (msg->value("type", "") == "event") return msg;
  }
}

std::optional<json> IpcClient::wait_for_event(const std::string& name, Millis timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto left = std::chrono::duration_cast<Millis>(deadline - std::chrono::steady_clock::now());
    auto e = next_event(std::max(left, Millis{0}));
    if (!e) return std::nullopt;
    if (e->value("event", "") == name) return e;
  }
}

}  // namespace quac
