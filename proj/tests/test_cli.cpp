#include <doctest.h>

#include "corpus.hpp"
#include "proc.hpp"
#include "quac/session_log.hpp"

using namespace quac;
using testing::run_cli;

TEST_CASE("personas") {
  testing::TempDir t;
  auto r = run_cli(t, {"personas"});
  CHECK(r.rc == 0);
  CHECK(r.out.starts_with("mentor\t"));
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 8);

  r = run_cli(t, {"personas", "--json"});
  CHECK(r.rc == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.size() == 8);
  CHECK(j[7]["id"] == "no_persona");
}

TEST_CASE("usage errors exit 2") {
  testing::TempDir t;
  CHECK(run_cli(t, {}).rc == 2);
  CHECK(run_cli(t, {"fly"}).rc == 2);
  CHECK(run_cli(t, {"settings"}).rc == 2);
  CHECK(run_cli(t, {"analyze"}).rc == 2);
  CHECK(run_cli(t, {"analyze", (t / "missing.jsonl").string()}).rc == 2);
  testing::write_file(t / "a.jsonl", "");
  CHECK(run_cli(t, {"analyze", (t / "a.jsonl").string(), "--json", "--svg", "x.svg"}).rc == 2);
  CHECK(run_cli(t, {"--help"}).rc == 0);
}

TEST_CASE("no daemon: trigger exits 3, settings fall back to the config file") {
  testing::TempDir t;
  const std::map<std::string, std::string> env{{"QUAC_SOCKET", (t / "none.sock").string()},
                                               {"QUAC_CONFIG", (t / "config").string()}};
  CHECK(run_cli(t, {"trigger"}, env).rc == 3);
  CHECK(run_cli(t, {"trigger", "--emoji"}, env).rc == 3);

  auto r = run_cli(t, {"settings", "get", "persona"}, env);
  CHECK(r.rc == 0);
  CHECK(r.out == "mentor\n");
  r = run_cli(t, {"settings", "set", "persona", "critic"}, env);
  CHECK(r.rc == 0);
  CHECK(testing::read_file(t / "config") == "persona = critic\n");
  CHECK(run_cli(t, {"settings", "get", "persona"}, env).out == "critic\n");
  CHECK(run_cli(t, {"settings", "set", "memory_depth", "-3"}, env).rc == 4);
  CHECK(run_cli(t, {"settings", "get", "colour"}, env).rc == 4);
  const auto all = nlohmann::json::parse(run_cli(t, {"settings", "get"}, env).out);
  CHECK(all["persona"] == "critic");
}

TEST_CASE("analyze text, json and svg") {
  testing::TempDir t;
  const auto corpus = testing::write_study_corpus(t.path());
  std::vector<std::string> args{"analyze"};
  for (const auto& f : corpus.files) args.push_back(f.string());

  auto r = run_cli(t, args);
  CHECK(r.rc == 0);
  CHECK(r.out.find("13.25") != std::string::npos);
  CHECK(r.out.find("critic") != std::string::npos);

  auto json_args = args;
  json_args.push_back("--json");
  r = run_cli(t, json_args);
  REQUIRE(r.rc == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["manual_total"] == 45);
  CHECK(j["auto_total"] == 61);

  auto svg_args = args;
  svg_args.push_back("--svg");
  svg_args.push_back((t / "chart.svg").string());
  r = run_cli(t, svg_args);
  CHECK(r.rc == 0);
  CHECK(testing::read_file(t / "chart.svg").starts_with("<svg"));
}

TEST_CASE("analyze: torn last line warns, corruption exits 6") {
  testing::TempDir t;
  const std::string good =
      to_json(LogRecord{SessionMark{SessionMark::Kind::start, Timestamp{1000}, "s", kLogSchema}}).dump();
  testing::write_file(t / "torn.jsonl", good + "\n{\"type\":\"feed");
  auto r = run_cli(t, {"analyze", (t / "torn.jsonl").string()});
  CHECK(r.rc == 0);
  CHECK(r.err.find("warning:") != std::string::npos);

  testing::write_file(t / "bad.jsonl", "{oops\n" + good + "\n");
  r = run_cli(t, {"analyze", (t / "bad.jsonl").string()});
  CHECK(r.rc == 6);
  CHECK(r.err.find("bad.jsonl:1") != std::string::npos);
}

TEST_CASE("daemon round trip through the command line") {
  testing::TempDir home;
  testing::DaemonProcess daemon(home);
  const auto& env = daemon.env();

  auto r = run_cli(home, {"trigger", "--persona", "critic"}, env);
  CHECK(r.rc == 0);
  CHECK(r.out == "[critic] " + std::string(sample_reply(PersonaId::critic)) + "\n");

  r = run_cli(home, {"trigger", "--emoji"}, env);
  CHECK(r.rc == 0);
  CHECK(r.out.size() > 1);

  r = run_cli(home, {"trigger", "--persona", "pirate"}, env);
  CHECK(r.rc == 4);
  CHECK(run_cli(home, {"trigger", "--emoji", "--persona", "ceo"}, env).rc == 2);

  r = run_cli(home, {"trigger", "--no-wait"}, env);
  CHECK(r.rc == 0);
  CHECK(r.out.starts_with("evt-"));

  CHECK(run_cli(home, {"settings", "set", "persona", "designer"}, env).rc == 0);
  CHECK(run_cli(home, {"settings", "get", "persona"}, env).out == "designer\n");
  CHECK(run_cli(home, {"settings", "set", "cycle.voice", "7m"}, env).rc == 4);
  // Overrides from `run --mock` keep the config file untouched.
  CHECK_FALSE(std::filesystem::exists(home / "config"));

  const auto events = daemon.events();
  CHECK(daemon.stop() == 0);
  const auto log = read_log(events);
  CHECK(log.warnings.empty());
  REQUIRE(log.records.size() >= 5);
  CHECK(std::holds_alternative<SessionMark>(log.records.front()));
  CHECK(std::get<SessionMark>(log.records.back()).mark == SessionMark::Kind::end);
  CHECK(run_cli(home, {"trigger"}, env).rc == 3);

  r = run_cli(home, {"analyze", events.string(), "--json"});
  CHECK(r.rc == 0);
}

TEST_CASE("a scripted provider failure exits 5") {
  testing::TempDir home;
  testing::write_file(home / "script.json",
                      R"({"entries": [{"kind": "feedback", "failure": "server_error", "http_status": 503}]})");
  testing::DaemonProcess daemon(home, {"--set", "mock.script=" + (home / "script.json").string()});
  auto r = run_cli(home, {"trigger"}, daemon.env());
  CHECK(r.rc == 5);
  CHECK(r.err.find("provider_error") != std::string::npos);
}

TEST_CASE("run honours --socket") {
  testing::TempDir home;
  const auto sock = home / "explicit.sock";
  const std::map<std::string, std::string> env{{"QUAC_HOME", home.path().string()},
                                               {"QUAC_CONFIG", (home / "config").string()}};
  const auto pid = testing::spawn_cli({"--socket", sock.string(), "run", "--mock"}, env, home / "o", home / "e");
  for (int i = 0; i < 500 && !std::filesystem::exists(sock); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  REQUIRE(std::filesystem::exists(sock));
  CHECK(run_cli(home, {"--socket", sock.string(), "personas"}).rc == 0);
  CHECK(run_cli(home, {"--socket", sock.string(), "settings", "get", "persona"}).out == "mentor\n");
  ::kill(pid, SIGINT);
  CHECK(testing::wait_exit(pid) == 0);
  CHECK_FALSE(std::filesystem::exists(sock));
}
