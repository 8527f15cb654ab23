#include "quac/audio.hpp"

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>

#include <atomic>
#include <condition_variable>

extern char** environ;

namespace quac {
namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

void SilentAudioPlayer::play(const std::filesystem::path&, Millis duration, Done done) {
  stop();
  std::lock_guard lock(mutex_);
  auto active = std::make_shared<std::atomic<bool>>(true);
  active_ = active;
  worker_ = std::jthread([duration, done = std::move(done), active](std::stop_token st) {
    std::mutex m;
    std::condition_variable_any cv;
    std::unique_lock lk(m);
    const bool stopped = cv.wait_for(lk, st, duration, [] { return false; }) || st.stop_requested();
    *active = false;
    if (done) done(!stopped);
  });
}

bool SilentAudioPlayer::stop() {
  std::jthread worker;
  bool was_playing = false;
  {
    std::lock_guard lock(mutex_);
    was_playing = active_ && *active_;
    worker = std::move(worker_);
  }
  if (worker.joinable()) {
    worker.request_stop();
    worker.join();
  }
  return was_playing;
}

bool SilentAudioPlayer::playing() const {
  std::lock_guard lock(mutex_);
  return active_ && *active_;
}

void CommandAudioPlayer::play(const std::filesystem::path& file, Millis, Done done) {
  stop();
  std::string cmd = command_;
  if (auto pos = cmd.find("{file}"); pos != std::string::npos) {
    cmd.replace(pos, 6, shell_quote(file.string()));
  } else {
    cmd += " " + shell_quote(file.string());
  }

  pid_t pid = -1;
  const char* argv[] = {"/bin/sh", "-c", cmd.c_str(), nullptr};
  if (posix_spawn(&pid, "/bin/sh", nullptr, nullptr, const_cast<char* const*>(argv), environ) != 0) {
    if (done) done(false);
    return;
  }
  std::lock_guard lock(mutex_);
  pid_ = pid;
  auto active = std::make_shared<std::atomic<bool>>(true);
  active_ = active;
  worker_ = std::jthread([pid, done = std::move(done), active] {
    int status = 0;
    waitpid(pid, &status, 0);
    const bool completed = *active && WIFEXITED(status) && WEXITSTATUS(status) == 0;
    *active = false;
    if (done) done(completed);
  });
}

bool CommandAudioPlayer::stop() {
  std::jthread worker;
  bool was_playing = false;
  {
    std::lock_guard lock(mutex_);
    was_playing = active_ && *active_;
    if (was_playing) {
      *active_ = false;
      ::kill(pid_, SIGTERM);
    }
    worker = std::move(worker_);
  }
  if (worker.joinable()) worker.join();
  return was_playing;
}

bool CommandAudioPlayer::playing() const {
  std::lock_guard lock(mutex_);
  return active_ && *active_;
}

}  // namespace quac
