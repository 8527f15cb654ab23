#include "quac/clock.hpp"

#include <algorithm>

namespace quac {

Timestamp SystemClock::now() {
  const auto wall = std::chrono::duration_cast<Millis>(
      std::chrono::system_clock::now().time_since_epoch());
  std::lock_guard lock(mutex_);
  last_ = std::max(last_, wall);
  return last_;
}

bool SystemClock::sleep_until(Timestamp t, std::stop_token stop) {
  std::unique_lock lock(mutex_);
  const unsigned gen = generation_;
  const auto deadline = std::chrono::system_clock::time_point(t);
  cv_.wait_until(lock, stop, deadline, [&] { return generation_ != gen; });
  return !stop.stop_requested();
}

void SystemClock::interrupt() {
  {
    std::lock_guard lock(mutex_);
    ++generation_;
  }
  cv_.notify_all();
}

}  // namespace quac
