#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "quac/common.hpp"

namespace quac {

class AudioPlayer {
 public:
  /// Called exactly once per play(): completed=false when stopped early.
  using Done = std::function<void(bool completed)>;
  virtual ~AudioPlayer() = default;
  /// Starts playback, stopping whatever is playing first.
  virtual void play(const std::filesystem::path& file, Millis duration, Done done) = 0;
  /// Returns true when something was playing.
  virtual bool stop() = 0;
  virtual bool playing() const = 0;
};

/// "Plays" by waiting out the clip duration. Used offline and in tests.
class SilentAudioPlayer final : public AudioPlayer {
 public:
  ~SilentAudioPlayer() override { stop(); }
  void play(const std::filesystem::path& file, Millis duration, Done done) override;
  bool stop() override;
  bool playing() const override;

 private:
  mutable std::mutex mutex_;
  std::jthread worker_;
  std::shared_ptr<std::atomic<bool>> active_;
};

/// Runs an external player, e.g. "mpg123 -q {file}" or "afplay {file}".
/// "{file}" is replaced by the shell-quoted path.
class CommandAudioPlayer final : public AudioPlayer {
 public:
  explicit CommandAudioPlayer(std::string command) : command_(std::move(command)) {}
  ~CommandAudioPlayer() override { stop(); }
  void play(const std::filesystem::path& file, Millis duration, Done done) override;
  bool stop() override;
  bool playing() const override;

 private:
  std::string command_;
  mutable std::mutex mutex_;
  std::jthread worker_;
  int pid_ = -1;
  std::shared_ptr<std::atomic<bool>> active_;
};

}  // namespace quac
