#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "quac/clock.hpp"
#include "quac/trigger.hpp"

namespace quac {

/// A key plus modifiers. `primary` is Command on macOS and the Windows/Super
/// key elsewhere.
struct Chord {
  enum Modifier : unsigned { primary = 1, ctrl = 2, alt = 4, shift = 8 };
  unsigned modifiers = 0;
  std::string key;  // upper-case letter/digit or a named key ("F5", "SPACE")

  bool operator==(const Chord&) const = default;
  auto operator<=>(const Chord&) const = default;
};

/// Accepts "Primary+R", "Cmd+R", "Win+R", "Super+Shift+E", "ctrl+alt+f5".
/// Throws quac::Error.
Chord parse_chord(std::string_view text);
std::string to_string(const Chord& chord);

struct HotkeyBinding {
  Chord feedback{Chord::primary, "R"};
  Chord emoji{Chord::primary, "E"};
  bool operator==(const HotkeyBinding&) const = default;
};

/// Throws quac::Error when the two chords coincide.
void validate(const HotkeyBinding& b);

class BindingConflict : public Error {
 public:
  explicit BindingConflict(const Chord& c)
      : Error("hotkey " + to_string(c) + " is already taken") {}
};

/// OS global-hotkey facility. Callbacks may arrive on any thread.
class HotkeyBackend {
 public:
  using PressCallback = std::function<void(Timestamp pressed_at)>;
  virtual ~HotkeyBackend() = default;
  /// Throws BindingConflict when the OS refuses the chord.
  virtual void grab(const Chord& chord, PressCallback on_press) = 0;
  virtual void release(const Chord& chord) = 0;
};

/// Test double: presses are injected with explicit timestamps.
class FakeHotkeyBackend final : public HotkeyBackend {
 public:
  void grab(const Chord& chord, PressCallback on_press) override;
  void release(const Chord& chord) override;

  /// Marks a chord as owned by another application.
  void reserve(const Chord& chord) { reserved_.insert(chord); }
  /// Returns false when nothing is bound to the chord.
  bool inject(const Chord& chord, Timestamp at);
  std::size_t grabbed() const;

 private:
  mutable std::mutex mutex_;
  std::set<Chord> reserved_;
  std::map<Chord, PressCallback> grabs_;
};

/// Platform backend; nullptr when none is available (no display, or not built).
std::unique_ptr<HotkeyBackend> make_platform_hotkey_backend();

inline constexpr Millis kHotkeyDebounce{300};

/// Live binding of the feedback and emoji chords. Releases them on
/// destruction.
class HotkeyHandle {
 public:
  HotkeyHandle(HotkeyBackend& backend, const HotkeyBinding& bindings, TriggerSink sink);
  ~HotkeyHandle();
  HotkeyHandle(const HotkeyHandle&) = delete;
  HotkeyHandle& operator=(const HotkeyHandle&) = delete;

  const HotkeyBinding& bindings() const { return bindings_; }

 private:
  struct Debounce {
    std::mutex mutex;
    std::optional<Timestamp> last;
  };
  void on_press(PayloadKind kind, Debounce& d, Timestamp at);

  HotkeyBackend& backend_;
  HotkeyBinding bindings_;
  TriggerSink sink_;
  Debounce feedback_;
  Debounce emoji_;
};

std::unique_ptr<HotkeyHandle> bind_hotkeys(HotkeyBackend& backend, const HotkeyBinding& bindings,
                                           TriggerSink sink);

}  // namespace quac
