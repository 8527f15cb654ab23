#include <poll.h>

#include <atomic>
#include <thread>

#include <X11/Xlib.h>
#include <X11/keysym.h>

#include "quac/hotkeys.hpp"

namespace quac {
namespace {

std::atomic<bool> g_grab_failed{false};

int record_bad_access(::Display*, XErrorEvent* e) {
  if (e->error_code == BadAccess) g_grab_failed = true;
  return 0;
}

unsigned x_modifiers(unsigned m) {
  unsigned out = 0;
  if (m & Chord::primary) out |= Mod4Mask;
  if (m & Chord::ctrl) out |= ControlMask;
  if (m & Chord::alt) out |= Mod1Mask;
  if (m & Chord::shift) out |= ShiftMask;
  return out;
}

// Lock keys must not defeat the grab.
constexpr unsigned kIgnoredMasks[] = {0, LockMask, Mod2Mask, LockMask | Mod2Mask};

class X11HotkeyBackend final : public HotkeyBackend {
 public:
  explicit X11HotkeyBackend(::Display* d) : display_(d), root_(DefaultRootWindow(d)) {
    XSelectInput(display_, root_, KeyPressMask);
    thread_ = std::jthread([this](std::stop_token st) { loop(st); });
  }

  ~X11HotkeyBackend() override {
    thread_.request_stop();
    thread_.join();
    XCloseDisplay(display_);
  }

  void grab(const Chord& chord, PressCallback on_press) override {
    std::lock_guard lock(mutex_);
    const auto [code, mods] = resolve(chord);
    g_grab_failed = false;
    auto* previous = XSetErrorHandler(record_bad_access);
    for (unsigned extra : kIgnoredMasks) {
      XGrabKey(display_, code, mods | extra, root_, True, GrabModeAsync, GrabModeAsync);
    }
    XSync(display_, False);
    XSetErrorHandler(previous);
    if (g_grab_failed) {
      for (unsigned extra : kIgnoredMasks) XUngrabKey(display_, code, mods | extra, root_);
      XFlush(display_);
      throw BindingConflict(chord);
    }
    grabs_[{code, mods}] = std::move(on_press);
  }

  void release(const Chord& chord) override {
    std::lock_guard lock(mutex_);
    const auto key = resolve(chord);
    for (unsigned extra : kIgnoredMasks) XUngrabKey(display_, key.first, key.second | extra, root_);
    XFlush(display_);
    grabs_.erase(key);
  }

 private:
  std::pair<int, unsigned> resolve(const Chord& chord) {
    const KeySym sym = XStringToKeysym(chord.key == "SPACE" ? "space" : chord.key.c_str());
    const int code = XKeysymToKeycode(display_, sym);
    if (code == 0) throw Error("no keycode for key " + chord.key);
    return {code, x_modifiers(chord.modifiers)};
  }

  void loop(std::stop_token st) {
    pollfd pfd{ConnectionNumber(display_), POLLIN, 0};
    while (!st.stop_requested()) {
      if (::poll(&pfd, 1, 100) <= 0) continue;
      for (;;) {
        PressCallback cb;
        {
          std::lock_guard lock(mutex_);
          if (!XPending(display_)) break;
          XEvent ev;
          XNextEvent(display_, &ev);
          if (ev.type != KeyPress) continue;
          const unsigned mods = ev.xkey.state & ~(LockMask | Mod2Mask);
          auto it = grabs_.find({static_cast<int>(ev.xkey.keycode), mods});
          if (it == grabs_.end()) continue;
          cb = it->second;
        }
        cb(Timestamp{static_cast<std::int64_t>(ev_time_ms())});
      }
    }
  }

  static std::int64_t ev_time_ms() {
    return std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
  }

  ::Display* display_;
  Window root_;
  std::mutex mutex_;
  std::map<std::pair<int, unsigned>, PressCallback> grabs_;
  std::jthread thread_;
};

}  // namespace

std::unique_ptr<HotkeyBackend> make_platform_hotkey_backend() {
  ::Display* d = XOpenDisplay(nullptr);
  if (!d) return nullptr;
  return std::make_unique<X11HotkeyBackend>(d);
}

}  // namespace quac
