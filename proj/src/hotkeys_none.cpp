#include "quac/hotkeys.hpp"

namespace quac {

std::unique_ptr<HotkeyBackend> make_platform_hotkey_backend() { return nullptr; }

}  // namespace quac
