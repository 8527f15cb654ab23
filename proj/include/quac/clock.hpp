#pragma once

#include <condition_variable>
#include <mutex>
#include <stop_token>

#include "quac/common.hpp"

namespace quac {

class Clock {
 public:
  virtual ~Clock() = default;
  /// Monotone non-decreasing.
  virtual Timestamp now() = 0;
  /// Blocks until now() >= t or the stop token fires. Returns false when
  /// stopped early.
  virtual bool sleep_until(Timestamp t, std::stop_token stop) = 0;
  /// Wakes any sleeper so it can re-read its deadline.
  virtual void interrupt() = 0;
};

/// Wall clock in epoch milliseconds, clamped so it never runs backwards.
class SystemClock final : public Clock {
 public:
  Timestamp now() override;
  bool sleep_until(Timestamp t, std::stop_token stop) override;
  void interrupt() override;

 private:
  std::mutex mutex_;
  std::condition_variable_any cv_;
  Timestamp last_{0};
  unsigned generation_ = 0;
};

/// Virtual time. sleep_until jumps straight to the deadline, so a single
/// thread can drive hours of schedule in microseconds.
class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(Timestamp start = Timestamp{0}) : now_(start) {}

  Timestamp now() override {
    std::lock_guard lock(mutex_);
    return now_;
  }
  bool sleep_until(Timestamp t, std::stop_token stop) override {
    if (stop.stop_requested()) return false;
    advance_to(t);
    return true;
  }
  void interrupt() override {}

  void advance(Millis d) {
    std::lock_guard lock(mutex_);
    now_ += d;
  }
  void advance_to(Timestamp t) {
    std::lock_guard lock(mutex_);
    if (t > now_) now_ = t;
  }

 private:
  std::mutex mutex_;
  Timestamp now_;
};

}  // namespace quac
