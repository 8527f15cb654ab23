#include "quac/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

namespace quac {
namespace {

constexpr std::size_t kHistoryLimit = 200;

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

void check(const CancelToken& t) {
  if (t.cancelled()) throw Cancelled();
}

}  // namespace

void MemoryBuffer::set_depth(std::size_t depth) {
  std::lock_guard lock(mutex_);
  depth_ = depth;
  evict_locked();
}

std::size_t MemoryBuffer::depth() const {
  std::lock_guard lock(mutex_);
  return depth_;
}

void MemoryBuffer::push(std::string text, EncodedImage screenshot) {
  std::lock_guard lock(mutex_);
  entries_.emplace_back(std::move(text), std::move(screenshot));
  evict_locked();
}

MemorySnapshot MemoryBuffer::snapshot() const {
  std::lock_guard lock(mutex_);
  MemorySnapshot s;
  for (const auto& [text, img] : entries_) {
    s.feedback_texts.push_back(text);
    s.screenshots.push_back(img);
  }
  return s;
}

std::size_t MemoryBuffer::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void MemoryBuffer::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
}

void MemoryBuffer::evict_locked() {
  while (entries_.size() > depth_) entries_.pop_front();
}

Pipeline::Pipeline(PipelineDeps deps)
    : deps_(std::move(deps)), memory_(static_cast<std::size_t>(deps_.settings.get().memory_depth)) {
  worker_ = std::jthread([this](std::stop_token st) { worker_loop(st); });
}

Pipeline::~Pipeline() {
  std::unique_ptr<Job> pending;
  {
    std::lock_guard lock(mutex_);
    pending = std::move(pending_);
    if (current_) current_->cancel.cancel();
  }
  worker_.request_stop();
  if (worker_.joinable()) worker_.join();
  if (pending) {
    FeedbackEvent ev;
    ev.event_id = pending->event_id;
    ev.trigger = pending->trigger.source;
    ev.kind = pending->trigger.kind;
    ev.status = EventStatus::cancelled;
    const auto s = deps_.settings.get();
    ev.persona = pending->trigger.persona_override.value_or(s.persona);
    ev.capture_mode = s.capture_mode;
    finish(*pending, std::move(ev));
  }
  deps_.player.stop();
}

std::string Pipeline::next_event_id() {
  char buf[32];
  std::snprintf(buf, sizeof buf, "evt-%06llu", static_cast<unsigned long long>(next_id_++));
  return buf;
}

Pipeline::Submission Pipeline::submit(const Trigger& trigger) {
  std::unique_ptr<Job> replaced;
  Submission out;
  {
    std::lock_guard lock(mutex_);
    const bool is_busy = current_ || pending_;
    if (trigger.source == TriggerKind::automatic && is_busy) return out;
    if (current_) current_->cancel.cancel();
    replaced = std::move(pending_);

    auto job = std::make_unique<Job>();
    job->trigger = trigger;
    job->event_id = next_event_id();
    out.accepted = true;
    out.event_id = job->event_id;
    out.result = job->promise.get_future().share();
    pending_ = std::move(job);
  }
  cv_.notify_all();
  if (replaced) {
    FeedbackEvent ev;
    ev.event_id = replaced->event_id;
    ev.trigger = replaced->trigger.source;
    ev.kind = replaced->trigger.kind;
    const auto s = deps_.settings.get();
    ev.persona = replaced->trigger.persona_override.value_or(s.persona);
    ev.capture_mode = s.capture_mode;
    ev.status = EventStatus::cancelled;
    finish(*replaced, std::move(ev));
  }
  return out;
}

FeedbackEvent Pipeline::run_feedback(TriggerKind source, std::optional<PersonaId> persona) {
  auto sub = submit(Trigger{PayloadKind::feedback, source, persona, deps_.clock.now()});
  if (!sub.accepted) throw Error("pipeline busy, automatic trigger dropped");
  return sub.result.get();
}

FeedbackEvent Pipeline::run_emoji(TriggerKind source) {
  auto sub = submit(Trigger{PayloadKind::emoji, source, std::nullopt, deps_.clock.now()});
  if (!sub.accepted) throw Error("pipeline busy, automatic trigger dropped");
  return sub.result.get();
}

bool Pipeline::cancel_in_flight() {
  std::unique_ptr<Job> pending;
  bool any = false;
  {
    std::lock_guard lock(mutex_);
    if (current_) {
      current_->cancel.cancel();
      any = true;
    }
    pending = std::move(pending_);
  }
  if (pending) {
    any = true;
    FeedbackEvent ev;
    ev.event_id = pending->event_id;
    ev.trigger = pending->trigger.source;
    ev.kind = pending->trigger.kind;
    const auto s = deps_.settings.get();
    ev.persona = pending->trigger.persona_override.value_or(s.persona);
    ev.capture_mode = s.capture_mode;
    ev.status = EventStatus::cancelled;
    finish(*pending, std::move(ev));
  }
  if (deps_.player.stop()) any = true;
  return any;
}

bool Pipeline::busy() const {
  std::lock_guard lock(mutex_);
  return current_ || pending_;
}

std::vector<FeedbackEvent> Pipeline::history(std::size_t limit) const {
  std::lock_guard lock(mutex_);
  const auto n = std::min(limit, history_.size());
  return {history_.end() - static_cast<std::ptrdiff_t>(n), history_.end()};
}

void Pipeline::emit(const UiEvent& e) {
  if (deps_.events) deps_.events(e);
}

void Pipeline::worker_loop(std::stop_token st) {
  for (;;) {
    std::unique_ptr<Job> job;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, st, [&] { return pending_ != nullptr; });
      if (st.stop_requested()) return;
      job = std::move(pending_);
      current_ = job.get();
    }
    auto ev = execute(*job);
    {
      std::lock_guard lock(mutex_);
      current_ = nullptr;
    }
    finish(*job, std::move(ev));
  }
}

void Pipeline::finish(Job& job, FeedbackEvent ev) {
  try {
    ev = std::get<FeedbackEvent>(deps_.log.append(ev));
  } catch (const Error& e) {
    std::cerr << "quac: log write failed: " << e.what() << "\n";
  }
  {
    std::lock_guard lock(mutex_);
    history_.push_back(ev);
    if (history_.size() > kHistoryLimit) history_.pop_front();
  }
  if (job.deliver) job.deliver();
  job.promise.set_value(std::move(ev));
}

FeedbackEvent Pipeline::execute(Job& job) {
  const auto settings = deps_.settings.get();
  memory_.set_depth(static_cast<std::size_t>(settings.memory_depth));

  FeedbackEvent ev;
  ev.event_id = job.event_id;
  ev.trigger = job.trigger.source;
  ev.kind = job.trigger.kind;
  ev.persona = job.trigger.kind == PayloadKind::feedback
                   ? job.trigger.persona_override.value_or(settings.persona)
                   : settings.persona;
  ev.capture_mode = settings.capture_mode;

  if (job.trigger.kind == PayloadKind::emoji) return execute_emoji(job, settings, std::move(ev));
  return execute_feedback(job, settings, std::move(ev));
}

FeedbackEvent Pipeline::execute_feedback(Job& job, const Settings& settings, FeedbackEvent ev) {
  const auto start = std::chrono::steady_clock::now();
  const bool manual = job.trigger.source == TriggerKind::manual;
  bool announced = false;
  auto announce = [&] {
    emit(GenerationStarted{ev.event_id, ev.kind, ev.persona, ev.trigger});
    announced = true;
  };
  auto fail = [&](std::optional<ProviderErrorKind> kind, const std::string& msg) {
    if (!announced) return;
    job.deliver = [this, e = GenerationFailed{ev.event_id, ev.status, kind, msg}] { emit(e); };
  };

  if (manual) announce();
  EncodedImage shot;
  try {
    shot = capture(settings.capture_mode, deps_.capture, deps_.clock.now(), settings.cursor_region);
  } catch (const CaptureError& e) {
    ev.status = EventStatus::capture_skipped;
    ev.error_message = e.what();
    fail(std::nullopt, e.what());
    return ev;
  }
  if (!manual) announce();

  try {
    check(job.cancel);
    const auto snap = memory_.snapshot();
    ev.memory_depth_used = static_cast<int>(snap.size());
    const auto payload = assemble_feedback(resolve(ev.persona), shot, snap);
    ev.prompt_digest = payload.digest();

    const RetryPolicy policy = manual ? deps_.retry : RetryPolicy{0, Millis{0}};
    auto reply = with_retry(policy, job.cancel, [&] { return deps_.vision.complete(payload, job.cancel); });
    check(job.cancel);
    if (blank(reply)) throw ProviderError(ProviderErrorKind::malformed_reply, "empty reply");
    ev.reply_text = reply;
    ev.word_count = word_count(reply);

    const auto voice = settings.voice_for(ev.persona);
    auto clip = with_retry(policy, job.cancel,
                           [&] { return deps_.tts.synthesize(reply, voice, job.cancel); });
    check(job.cancel);

    const auto rel = std::filesystem::path("audio") / (ev.event_id + ".mp3");
    const auto file = deps_.session_dir / rel;
    std::filesystem::create_directories(file.parent_path());
    {
      std::ofstream out(file, std::ios::binary);
      out.write(reinterpret_cast<const char*>(clip.bytes.data()),
                static_cast<std::streamsize>(clip.bytes.size()));
      if (!out) throw Error("cannot write " + file.string());
    }
    ev.audio_ref = rel.generic_string();
    ev.audio_duration = clip.duration;
    ev.latency = std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - start);
    ev.status = EventStatus::ok;

    memory_.push(reply, shot);
    job.deliver = [this, ready = FeedbackReady{ev.event_id, ev.persona, reply, clip.duration}, file] {
      emit(ready);
      deps_.player.play(file, ready.audio_duration, [this, id = ready.event_id](bool completed) {
        emit(PlaybackFinished{id, completed});
      });
    };
  } catch (const Cancelled&) {
    ev.status = EventStatus::cancelled;
    fail(std::nullopt, "cancelled");
  } catch (const ProviderError& e) {
    ev.status = EventStatus::provider_error;
    ev.error_kind = e.kind();
    ev.http_status = e.http_status();
    ev.error_message = e.what();
    fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    ev.status = EventStatus::provider_error;
    ev.error_message = e.what();
    fail(std::nullopt, e.what());
  }
  if (ev.status != EventStatus::ok) {
    ev.latency = std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - start);
  }
  return ev;
}

FeedbackEvent Pipeline::execute_emoji(Job& job, const Settings& settings, FeedbackEvent ev) {
  const auto start = std::chrono::steady_clock::now();
  bool announced = false;
  try {
    const auto shot =
        capture(settings.capture_mode, deps_.capture, deps_.clock.now(), settings.cursor_region);
    announced = true;
    emit(GenerationStarted{ev.event_id, ev.kind, ev.persona, ev.trigger});
    check(job.cancel);
    const auto payload = assemble_emoji(shot);
    ev.prompt_digest = payload.digest();
    const RetryPolicy policy =
        job.trigger.source == TriggerKind::manual ? deps_.retry : RetryPolicy{0, Millis{0}};
    ev.reply_text =
        with_retry(policy, job.cancel, [&] { return deps_.vision.complete(payload, job.cancel); });
    check(job.cancel);
    ev.word_count = word_count(ev.reply_text);
    ev.emojis = validate_emoji_reply(ev.reply_text);
    ev.status = EventStatus::ok;
    ev.latency = std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - start);
    job.deliver = [this, ready = EmojiReady{ev.event_id, ev.emojis}] { emit(ready); };
    return ev;
  } catch (const CaptureError& e) {
    ev.status = EventStatus::capture_skipped;
    ev.error_message = e.what();
  } catch (const EmojiValidationError& e) {
    ev.status = EventStatus::emoji_rejected;
    ev.error_message = e.what();
  } catch (const Cancelled&) {
    ev.status = EventStatus::cancelled;
  } catch (const ProviderError& e) {
    ev.status = EventStatus::provider_error;
    ev.error_kind = e.kind();
    ev.http_status = e.http_status();
    ev.error_message = e.what();
  } catch (const std::exception& e) {
    ev.status = EventStatus::provider_error;
    ev.error_message = e.what();
  }
  ev.latency = std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - start);
  if (announced) {
    job.deliver = [this, failed = GenerationFailed{ev.event_id, ev.status, ev.error_kind,
                                                   ev.status == EventStatus::cancelled ? "cancelled"
                                                                                       : ev.error_message}] {
      emit(failed);
    };
  }
  return ev;
}

}  // namespace quac
