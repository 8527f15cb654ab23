#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>

namespace quac {

/// Shared cancellation flag. Copies observe the same state. Blocking calls
/// either wait on it (wait_for) or register a callback that interrupts them.
class CancelToken {
 public:
  CancelToken() : state_(std::make_shared<State>()) {}

  void cancel() const {
    std::map<int, std::function<void()>> callbacks;
    {
      std::lock_guard lock(state_->mutex);
      if (state_->cancelled) return;
      state_->cancelled = true;
      callbacks.swap(state_->callbacks);
    }
    state_->cv.notify_all();
    for (auto& [id, fn] : callbacks) fn();
  }

  bool cancelled() const {
    std::lock_guard lock(state_->mutex);
    return state_->cancelled;
  }

  /// Sleeps for d unless cancelled first. Returns true when cancelled.
  template <class Rep, class Period>
  bool wait_for(std::chrono::duration<Rep, Period> d) const {
    std::unique_lock lock(state_->mutex);
    return state_->cv.wait_for(lock, d, [&] { return state_->cancelled; });
  }

 private:
  struct State {
    std::mutex mutex;
    std::condition_variable cv;
    bool cancelled = false;
    int next_id = 0;
    std::map<int, std::function<void()>> callbacks;
  };

 public:
  class Registration {
   public:
    Registration() = default;
    Registration(Registration&&) noexcept = default;
    Registration& operator=(Registration&& o) noexcept {
      reset();
      state_ = std::move(o.state_);
      id_ = o.id_;
      return *this;
    }
    ~Registration() { reset(); }

   private:
    friend class CancelToken;
    Registration(std::shared_ptr<State> state, int id)
        : state_(std::move(state)), id_(id) {}
    void reset() {
      if (!state_) return;
      std::lock_guard lock(state_->mutex);
      state_->callbacks.erase(id_);
      state_.reset();
    }
    std::shared_ptr<State> state_;
    int id_ = 0;
  };

  /// Runs fn on cancel (immediately if already cancelled). The returned
  /// guard unregisters on destruction.
  [[nodiscard]] Registration on_cancel(std::function<void()> fn) const {
    {
      std::lock_guard lock(state_->mutex);
      if (!state_->cancelled) {
        const int id = state_->next_id++;
        state_->callbacks.emplace(id, std::move(fn));
        return Registration(state_, id);
      }
    }
    fn();
    return {};
  }

 private:
  std::shared_ptr<State> state_;
};

}  // namespace quac
