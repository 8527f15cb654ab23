#include "quac/hotkeys.hpp"

#include <algorithm>
#include <cctype>

namespace quac {
namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

Chord parse_chord(std::string_view text) {
  Chord chord;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto plus = text.find('+', pos);
    const auto token = upper(text.substr(pos, plus == std::string_view::npos ? text.npos : plus - pos));
    const bool last = plus == std::string_view::npos;
    if (token.empty()) throw Error("empty key in chord '" + std::string(text) + "'");
    if (!last) {
      if (token == "PRIMARY" || token == "CMD" || token == "COMMAND" || token == "WIN" ||
          token == "WINDOWS" || token == "SUPER" || token == "META") {
        chord.modifiers |= Chord::primary;
      } else if (token == "CTRL" || token == "CONTROL") {
        chord.modifiers |= Chord::ctrl;
      } else if (token == "ALT" || token == "OPTION") {
        chord.modifiers |= Chord::alt;
      } else if (token == "SHIFT") {
        chord.modifiers |= Chord::shift;
      } else {
        throw Error("unknown modifier '" + token + "' in chord '" + std::string(text) + "'");
      }
      pos = plus + 1;
      continue;
    }
    const bool simple = token.size() == 1 && std::isalnum(static_cast<unsigned char>(token[0]));
    const bool function_key = token.size() >= 2 && token[0] == 'F' &&
                              std::all_of(token.begin() + 1, token.end(), ::isdigit);
    if (!simple && !function_key && token != "SPACE") {
      throw Error("unsupported key '" + token + "' in chord '" + std::string(text) + "'");
    }
    chord.key = token;
    break;
  }
  if (chord.modifiers == 0) throw Error("chord '" + std::string(text) + "' needs a modifier");
  return chord;
}

std::string to_string(const Chord& chord) {
  std::string out;
  if (chord.modifiers & Chord::primary) out += "Primary+";
  if (chord.modifiers & Chord::ctrl) out += "Ctrl+";
  if (chord.modifiers & Chord::alt) out += "Alt+";
  if (chord.modifiers & Chord::shift) out += "Shift+";
  return out + chord.key;
}

void validate(const HotkeyBinding& b) {
  if (b.feedback == b.emoji) throw Error("feedback and emoji hotkeys must differ");
}

void FakeHotkeyBackend::grab(const Chord& chord, PressCallback on_press) {
  std::lock_guard lock(mutex_);
  if (reserved_.count(chord) || grabs_.count(chord)) throw BindingConflict(chord);
  grabs_.emplace(chord, std::move(on_press));
}

void FakeHotkeyBackend::release(const Chord& chord) {
  std::lock_guard lock(mutex_);
  grabs_.erase(chord);
}

bool FakeHotkeyBackend::inject(const Chord& chord, Timestamp at) {
  PressCallback cb;
  {
    std::lock_guard lock(mutex_);
    auto it = grabs_.find(chord);
    if (it == grabs_.end()) return false;
    cb = it->second;
  }
  cb(at);
  return true;
}

std::size_t FakeHotkeyBackend::grabbed() const {
  std::lock_guard lock(mutex_);
  return grabs_.size();
}

HotkeyHandle::HotkeyHandle(HotkeyBackend& backend, const HotkeyBinding& bindings, TriggerSink sink)
    : backend_(backend), bindings_(bindings), sink_(std::move(sink)) {
  validate(bindings_);
  backend_.grab(bindings_.feedback,
                [this](Timestamp at) { on_press(PayloadKind::feedback, feedback_, at); });
  try {
    backend_.grab(bindings_.emoji,
                  [this](Timestamp at) { on_press(PayloadKind::emoji, emoji_, at); });
  } catch (...) {
    backend_.release(bindings_.feedback);
    throw;
  }
}

HotkeyHandle::~HotkeyHandle() {
  backend_.release(bindings_.feedback);
  backend_.release(bindings_.emoji);
}

void HotkeyHandle::on_press(PayloadKind kind, Debounce& d, Timestamp at) {
  {
    std::lock_guard lock(d.mutex);
    // The window slides with every press, so a held key yields one trigger.
    const bool repeat = d.last && at - *d.last < kHotkeyDebounce;
    d.last = at;
    if (repeat) return;
  }
  sink_(Trigger{kind, TriggerKind::manual, std::nullopt, at});
}

std::unique_ptr<HotkeyHandle> bind_hotkeys(HotkeyBackend& backend, const HotkeyBinding& bindings,
                                           TriggerSink sink) {
  return std::make_unique<HotkeyHandle>(backend, bindings, std::move(sink));
}

}  // namespace quac
