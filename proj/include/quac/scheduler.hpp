#pragma once

#include <mutex>
#include <optional>
#include <stop_token>
#include <string>

#include "quac/clock.hpp"
#include "quac/trigger.hpp"

namespace quac {

enum class CycleInterval { off, s30, m3, m5 };

/// "off", "30s", "3m", "5m" ("180s" and "300s" are accepted as aliases).
CycleInterval parse_cycle_interval(std::string_view text);
std::string_view to_string(CycleInterval interval);
std::optional<Millis> period_of(CycleInterval interval);

struct CycleConfig {
  CycleInterval voice = CycleInterval::m3;
  CycleInterval emoji = CycleInterval::s30;
  bool operator==(const CycleConfig&) const = default;
};

/// A fixed-period timer whose first fire is one full period after it is
/// armed. Missed periods are skipped, never replayed.
class PeriodicTimer {
 public:
  PeriodicTimer() = default;
  PeriodicTimer(std::optional<Millis> period, Timestamp armed_at) { arm(period, armed_at); }

  void arm(std::optional<Millis> period, Timestamp armed_at);
  std::optional<Timestamp> next_due() const { return next_; }
  /// Returns the fire time if one was due at `now`, and re-arms past `now`.
  std::optional<Timestamp> take_due(Timestamp now);

 private:
  std::optional<Millis> period_;
  std::optional<Timestamp> next_;
};

/// Turns the two cycle intervals into automatic feedback and emoji triggers.
/// An interval change re-phases only that channel, counting from the change.
class CycleScheduler {
 public:
  CycleScheduler(Clock& clock, CycleConfig cfg);

  void reconfigure(CycleConfig cfg);
  CycleConfig config() const;
  std::optional<Timestamp> next_deadline() const;

  /// Emits every trigger due at `now` (voice before emoji on ties).
  std::size_t fire_due(Timestamp now, const TriggerSink& sink);

  /// Live loop; returns when `stop` is requested.
  void run(const TriggerSink& sink, std::stop_token stop);

  /// Drives a simulated clock up to and including `horizon`.
  std::size_t run_until(Timestamp horizon, const TriggerSink& sink);

 private:
  Clock& clock_;
  mutable std::mutex mutex_;
  CycleConfig cfg_;
  PeriodicTimer voice_;
  PeriodicTimer emoji_;
};

}  // namespace quac
