#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "quac/audio.hpp"
#include "quac/capture.hpp"
#include "quac/clock.hpp"
#include "quac/events.hpp"
#include "quac/providers.hpp"
#include "quac/session_log.hpp"
#include "quac/settings.hpp"

namespace quac {

/// The last few delivered feedback texts with their screenshots.
class MemoryBuffer {
 public:
  explicit MemoryBuffer(std::size_t depth = 2) : depth_(depth) {}

  /// Shrinking evicts the oldest entries.
  void set_depth(std::size_t depth);
  std::size_t depth() const;
  void push(std::string text, EncodedImage screenshot);
  MemorySnapshot snapshot() const;
  std::size_t size() const;
  void clear();

 private:
  void evict_locked();

  mutable std::mutex mutex_;
  std::size_t depth_;
  std::deque<std::pair<std::string, EncodedImage>> entries_;
};

struct PipelineDeps {
  SettingsStore& settings;
  CaptureSource& capture;
  VisionProvider& vision;
  TtsProvider& tts;
  AudioPlayer& player;
  Clock& clock;
  SharedLog& log;
  /// Audio clips go to <session_dir>/audio/<event_id>.mp3.
  std::filesystem::path session_dir;
  EventSink events;
  /// Applied to manual runs only.
  RetryPolicy retry;
};

/// Runs feedback and emoji generations one at a time on a worker thread.
///
/// A manual trigger arriving while a run is in flight cancels that run and
/// takes its place. An automatic trigger arriving while busy is dropped.
/// Every run that is accepted produces exactly one log record.
class Pipeline {
 public:
  explicit Pipeline(PipelineDeps deps);
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  struct Submission {
    bool accepted = false;
    std::string event_id;
    std::shared_future<FeedbackEvent> result;
  };

  Submission submit(const Trigger& trigger);

  /// Submit and wait.
  FeedbackEvent run_feedback(TriggerKind source = TriggerKind::manual,
                             std::optional<PersonaId> persona = {});
  FeedbackEvent run_emoji(TriggerKind source = TriggerKind::manual);

  /// Cancels the running and queued runs and stops playback. Returns true
  /// when any of those existed.
  bool cancel_in_flight();

  bool busy() const;
  MemorySnapshot memory() const { return memory_.snapshot(); }
  /// Most recent finished runs, oldest first.
  std::vector<FeedbackEvent> history(std::size_t limit) const;

 private:
  struct Job {
    Trigger trigger;
    std::string event_id;
    CancelToken cancel;
    std::promise<FeedbackEvent> promise;
    /// UI events and playback, run once the record is logged.
    std::function<void()> deliver;
  };

  void worker_loop(std::stop_token st);
  FeedbackEvent execute(Job& job);
  FeedbackEvent execute_feedback(Job& job, const Settings& settings, FeedbackEvent ev);
  FeedbackEvent execute_emoji(Job& job, const Settings& settings, FeedbackEvent ev);
  void finish(Job& job, FeedbackEvent ev);
  void emit(const UiEvent& e);
  std::string next_event_id();

  PipelineDeps deps_;
  MemoryBuffer memory_;

  mutable std::mutex mutex_;
  std::condition_variable_any cv_;
  std::unique_ptr<Job> pending_;
  Job* current_ = nullptr;
  std::deque<FeedbackEvent> history_;
  std::uint64_t next_id_ = 1;
  std::jthread worker_;
};

}  // namespace quac
