#include "quac/scheduler.hpp"

namespace quac {

std::string_view to_string(TriggerKind kind) {
  return kind == TriggerKind::manual ? "manual" : "auto";
}

TriggerKind parse_trigger_kind(std::string_view name) {
  if (name == "manual") return TriggerKind::manual;
  if (name == "auto") return TriggerKind::automatic;
  throw Error("unknown trigger kind: " + std::string(name));
}

CycleInterval parse_cycle_interval(std::string_view text) {
  if (text == "off") return CycleInterval::off;
  if (text == "30s") return CycleInterval::s30;
  if (text == "3m" || text == "180s") return CycleInterval::m3;
  if (text == "5m" || text == "300s") return CycleInterval::m5;
  throw Error("cycle interval must be one of off, 30s, 3m, 5m (got '" + std::string(text) + "')");
}

std::string_view to_string(CycleInterval interval) {
  switch (interval) {
    case CycleInterval::off: return "off";
    case CycleInterval::s30: return "30s";
    case CycleInterval::m3: return "3m";
    case CycleInterval::m5: return "5m";
  }
  return "?";
}

std::optional<Millis> period_of(CycleInterval interval) {
  switch (interval) {
    case CycleInterval::off: return std::nullopt;
    case CycleInterval::s30: return Millis{30'000};
    case CycleInterval::m3: return Millis{180'000};
    case CycleInterval::m5: return Millis{300'000};
  }
  return std::nullopt;
}

void PeriodicTimer::arm(std::optional<Millis> period, Timestamp armed_at) {
  if (period && period->count() <= 0) throw Error("timer period must be positive");
  period_ = period;
  next_ = period ? std::optional(armed_at + *period) : std::nullopt;
}

std::optional<Timestamp> PeriodicTimer::take_due(Timestamp now) {
  if (!next_ || *next_ > now) return std::nullopt;
  const Timestamp fired = *next_;
  *next_ += *period_;
  if (*next_ <= now) {
    const auto behind = (now - *next_) / *period_ + 1;
    *next_ += behind * *period_;
  }
  return fired;
}

CycleScheduler::CycleScheduler(Clock& clock, CycleConfig cfg) : clock_(clock), cfg_(cfg) {
  const auto now = clock_.now();
  voice_.arm(period_of(cfg.voice), now);
  emoji_.arm(period_of(cfg.emoji), now);
}

void CycleScheduler::reconfigure(CycleConfig cfg) {
  {
    std::lock_guard lock(mutex_);
    const auto now = clock_.now();
    if (cfg.voice != cfg_.voice) voice_.arm(period_of(cfg.voice), now);
    if (cfg.emoji != cfg_.emoji) emoji_.arm(period_of(cfg.emoji), now);
    cfg_ = cfg;
  }
  clock_.interrupt();
}

CycleConfig CycleScheduler::config() const {
  std::lock_guard lock(mutex_);
  return cfg_;
}

std::optional<Timestamp> CycleScheduler::next_deadline() const {
  std::lock_guard lock(mutex_);
  const auto v = voice_.next_due();
  const auto e = emoji_.next_due();
  if (v && e) return std::min(*v, *e);
  return v ? v : e;
}

std::size_t CycleScheduler::fire_due(Timestamp now, const TriggerSink& sink) {
  std::vector<Trigger> due;
  {
    std::lock_guard lock(mutex_);
    if (auto t = voice_.take_due(now)) {
      due.push_back({PayloadKind::feedback, TriggerKind::automatic, std::nullopt, *t});
    }
    if (auto t = emoji_.take_due(now)) {
      due.push_back({PayloadKind::emoji, TriggerKind::automatic, std::nullopt, *t});
    }
  }
  for (const auto& t : due) sink(t);
  return due.size();
}

void CycleScheduler::run(const TriggerSink& sink, std::stop_token stop) {
  while (!stop.stop_requested()) {
    // With both cycles off, wake hourly; reconfigure() interrupts sooner.
    const auto deadline = next_deadline().value_or(clock_.now() + Millis{3'600'000});
    if (!clock_.sleep_until(deadline, stop)) break;
    fire_due(clock_.now(), sink);
  }
}

std::size_t CycleScheduler::run_until(Timestamp horizon, const TriggerSink& sink) {
  std::size_t fired = 0;
  std::stop_source never;
  for (;;) {
    const auto deadline = next_deadline();
    if (!deadline || *deadline > horizon) break;
    clock_.sleep_until(*deadline, never.get_token());
    fired += fire_due(clock_.now(), sink);
  }
  clock_.sleep_until(horizon, never.get_token());
  return fired;
}

}  // namespace quac
