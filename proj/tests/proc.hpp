#pragma once

// Runs the quac binary as a child process.

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "support.hpp"

extern char** environ;

namespace testing {

struct Result {
  int rc = -1;
  std::string out;
  std::string err;
};

inline std::vector<std::string> merged_env(const std::map<std::string, std::string>& extra) {
  std::map<std::string, std::string> env;
  for (char** e = environ; *e; ++e) {
    const std::string kv = *e;
    const auto eq = kv.find('=');
    if (eq != std::string::npos) env[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  for (const auto& [k, v] : extra) env[k] = v;
  std::vector<std::string> out;
  for (const auto& [k, v] : env) out.push_back(k + "=" + v);
  return out;
}

/// Spawns QUAC_CLI with stdout/stderr redirected to files. Returns the pid.
inline pid_t spawn_cli(const std::vector<std::string>& args, const std::map<std::string, std::string>& env,
                       const std::filesystem::path& out, const std::filesystem::path& err) {
  std::vector<std::string> argv_s{QUAC_CLI};
  argv_s.insert(argv_s.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_s) argv.push_back(a.data());
  argv.push_back(nullptr);
  auto env_s = merged_env(env);
  std::vector<char*> envp;
  for (auto& e : env_s) envp.push_back(e.data());
  envp.push_back(nullptr);

  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_addopen(&fa, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&fa, 1, out.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addopen(&fa, 2, err.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  pid_t pid = -1;
  const int rc = posix_spawn(&pid, argv[0], &fa, nullptr, argv.data(), envp.data());
  posix_spawn_file_actions_destroy(&fa);
  if (rc != 0) throw std::runtime_error("posix_spawn failed");
  return pid;
}

inline int wait_exit(pid_t pid) {
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
}

inline Result run_cli(const TempDir& scratch, const std::vector<std::string>& args,
                      const std::map<std::string, std::string>& env = {}) {
  const auto out = scratch / "cli.out";
  const auto err = scratch / "cli.err";
  Result r;
  r.rc = wait_exit(spawn_cli(args, env, out, err));
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

/// A `quac run --mock` daemon in its own QUAC_HOME.
class DaemonProcess {
 public:
  DaemonProcess(const TempDir& home, std::vector<std::string> extra_args = {}) : home_(home) {
    env_ = {{"QUAC_HOME", home.path().string()},
            {"QUAC_SOCKET", (home / "quac.sock").string()},
            {"QUAC_CONFIG", (home / "config").string()}};
    std::vector<std::string> args{"run", "--mock"};
    args.insert(args.end(), extra_args.begin(), extra_args.end());
    pid_ = spawn_cli(args, env_, home / "daemon.out", home / "daemon.err");
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    while (std::chrono::steady_clock::now() < deadline) {
      if (std::filesystem::exists(home / "quac.sock")) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    throw std::runtime_error("daemon did not start: " + read_file(home / "daemon.err"));
  }
  ~DaemonProcess() {
    if (pid_ > 0) stop();
  }

  const std::map<std::string, std::string>& env() const { return env_; }
  std::filesystem::path socket() const { return home_ / "quac.sock"; }

  /// Sends SIGTERM and returns the exit code.
  int stop() {
    ::kill(pid_, SIGTERM);
    const int rc = wait_exit(pid_);
    pid_ = -1;
    return rc;
  }

  /// The single session's events.jsonl.
  std::filesystem::path events() const {
    for (const auto& e : std::filesystem::directory_iterator(home_ / "sessions")) {
      return e.path() / "events.jsonl";
    }
    throw std::runtime_error("no session directory");
  }

 private:
  const TempDir& home_;
  std::map<std::string, std::string> env_;
  pid_t pid_ = -1;
};

}  // namespace testing
