#include <doctest.h>

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <atomic>
#include <thread>

#include "quac/ipc.hpp"
#include "support.hpp"

using namespace quac;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

json echo_handler(const std::string& command, const json& args) {
  if (command == "echo") return args;
  if (command == "fail") throw IpcError("invalid_setting", "nope");
  if (command == "boom") throw std::runtime_error("kaboom");
  throw IpcError("unknown_command", "unknown command: " + command);
}

int raw_connect(const std::filesystem::path& path) {
  const int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  std::snprintf(addr.sun_path, sizeof addr.sun_path, "%s", path.c_str());
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  return fd;
}

bool wait_until(auto pred, std::chrono::milliseconds timeout = 2s) {
  const auto end = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < end) {
    if (pred()) return true;
    std::this_thread::sleep_for(5ms);
  }
  return pred();
}

}  // namespace

TEST_CASE("request lines map to replies") {
  IpcServer server("/nonexistent", echo_handler);

  auto r = server.handle_line(R"({"request_id": 7, "command": "echo", "args": {"a": 1}})");
  CHECK(r["type"] == "reply");
  CHECK(r["request_id"] == 7);
  CHECK(r["ok"] == true);
  CHECK(r["result"] == json{{"a", 1}});

  r = server.handle_line(R"({"request_id": "x", "command": "echo"})");
  CHECK(r["request_id"] == "x");
  CHECK(r["result"] == json::object());

  r = server.handle_line(R"({"request_id": 1, "command": "fail"})");
  CHECK(r["ok"] == false);
  CHECK(r["error"]["code"] == "invalid_setting");
  CHECK(r["error"]["message"] == "nope");

  r = server.handle_line(R"({"request_id": 1, "command": "nosuch"})");
  CHECK(r["error"]["code"] == "unknown_command");

  r = server.handle_line(R"({"request_id": 1, "command": "boom"})");
  CHECK(r["error"]["code"] == "internal");

  for (const char* bad : {"not json", "[1,2]", R"({"request_id": 3})", R"({"command": 5})",
                          R"({"command": "echo", "args": [1]})"}) {
    CAPTURE(bad);
    r = server.handle_line(bad);
    CHECK(r["ok"] == false);
    CHECK(r["error"]["code"] == "bad_request");
  }
  CHECK(server.handle_line("garbage")["request_id"].is_null());
  CHECK(server.handle_line(R"({"request_id": 3})")["request_id"] == 3);
}

TEST_CASE("client and server talk over the socket") {
  testing::TempDir dir;
  const auto path = dir / "q.sock";
  IpcServer server(path, echo_handler);
  server.start();
  CHECK((std::filesystem::status(path).permissions() & std::filesystem::perms::all) ==
        (std::filesystem::perms::owner_read | std::filesystem::perms::owner_write));

  IpcClient client(path);
  CHECK(client.call("echo", {{"k", "v"}}) == json{{"k", "v"}});
  try {
    client.call("fail");
    FAIL("expected IpcError");
  } catch (const IpcError& e) {
    CHECK(e.code() == "invalid_setting");
  }

  client.send_raw("{broken");
  auto reply = client.read_message(2000ms);
  REQUIRE(reply);
  CHECK((*reply)["error"]["code"] == "bad_request");
  CHECK((*reply)["request_id"].is_null());

  // Still usable after a bad line.
  CHECK(client.call("echo", {{"n", 2}})["n"] == 2);
}

TEST_CASE("broadcasts reach every client; events seen during a request are kept") {
  testing::TempDir dir;
  IpcServer server(dir / "q.sock", echo_handler);
  server.start();
  IpcClient a(dir / "q.sock");
  IpcClient b(dir / "q.sock");
  REQUIRE(wait_until([&] { return server.client_count() == 2; }));

  server.broadcast({{"type", "event"}, {"event", "SettingsChanged"}, {"n", 1}});
  server.broadcast({{"type", "event"}, {"event", "EmojiReady"}, {"n", 2}});
  CHECK(a.call("echo", {{"x", 1}})["x"] == 1);

  for (auto* c : {&a, &b}) {
    auto e1 = c->next_event(2000ms);
    auto e2 = c->next_event(2000ms);
    REQUIRE(e1);
    REQUIRE(e2);
    CHECK((*e1)["n"] == 1);
    CHECK((*e2)["n"] == 2);
  }
  CHECK_FALSE(a.next_event(100ms));

  server.broadcast({{"type", "event"}, {"event", "Other"}});
  server.broadcast({{"type", "event"}, {"event", "Wanted"}, {"v", 9}});
  auto w = b.wait_for_event("Wanted", 2000ms);
  REQUIRE(w);
  CHECK((*w)["v"] == 9);
}

TEST_CASE("a second server on a live socket is refused; a stale one is replaced") {
  testing::TempDir dir;
  const auto path = dir / "q.sock";
  {
    IpcServer first(path, echo_handler);
    first.start();
    IpcServer second(path, echo_handler);
    try {
      second.start();
      FAIL("expected in_use");
    } catch (const IpcError& e) {
      CHECK(e.code() == "in_use");
    }
    IpcClient c(path);
    CHECK(c.call("echo", {{"ok", true}})["ok"] == true);
  }
  // Leave a stale socket file behind.
  {
    const int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    std::snprintf(addr.sun_path, sizeof addr.sun_path, "%s", path.c_str());
    REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    ::close(fd);
  }
  REQUIRE(std::filesystem::exists(path));
  IpcServer third(path, echo_handler);
  third.start();
  IpcClient c(path);
  CHECK(c.call("echo", {{"n", 3}})["n"] == 3);
}

TEST_CASE("connecting with no server fails") {
  testing::TempDir dir;
  CHECK_THROWS_AS(IpcClient(dir / "none.sock"), Error);
}

TEST_CASE("a client that never reads is disconnected; others are unaffected") {
  testing::TempDir dir;
  IpcServer server(dir / "q.sock", echo_handler);
  server.start();
  const int stuck = raw_connect(dir / "q.sock");
  int buf = 1 << 12;
  ::setsockopt(stuck, SOL_SOCKET, SO_RCVBUF, &buf, sizeof buf);
  IpcClient healthy(dir / "q.sock");
  REQUIRE(wait_until([&] { return server.client_count() == 2; }));

  const std::string pad(2000, 'x');
  std::atomic<int> received{0};
  std::thread reader([&] {
    while (received < 5000 && healthy.next_event(3000ms)) ++received;
  });
  for (int i = 0; i < 5000; ++i) {
    server.broadcast({{"type", "event"}, {"event", "Spam"}, {"i", i}, {"pad", pad}});
    if (i % 100 == 99) std::this_thread::sleep_for(1ms);
  }
  reader.join();
  CHECK(received == 5000);
  CHECK(wait_until([&] { return server.client_count() == 1; }, 5s));
  ::close(stuck);
}

TEST_CASE("closing clients are reaped and stop() disconnects the rest") {
  testing::TempDir dir;
  IpcServer server(dir / "q.sock", echo_handler);
  server.start();
  {
    IpcClient c(dir / "q.sock");
    CHECK(c.call("echo")["x"].is_null());
  }
  CHECK(wait_until([&] { return server.client_count() == 0; }));
  IpcClient c(dir / "q.sock");
  REQUIRE(wait_until([&] { return server.client_count() == 1; }));
  server.stop();
  CHECK_FALSE(std::filesystem::exists(dir / "q.sock"));
  CHECK_THROWS_AS(c.call("echo", json::object(), 1000ms), Error);
}
