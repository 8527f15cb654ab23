#pragma once

// Token pools for emoji-reply fuzzing. A reply built from these is valid
// exactly when it contains at least one kEmoji token and no kText token.

#include <string>
#include <vector>

namespace testing {

// Each entry is one complete emoji as a user would perceive it.
inline const std::vector<std::string> kEmoji = {
    "\U0001F525",                                  // fire
    "❤️",                                // red heart + VS16
    "\U0001F389",                                  // party popper
    "\U0001F44D\U0001F3FD",                        // thumbs up, skin tone
    "\U0001F469‍\U0001F4BB",                  // woman technologist
    "\U0001F468‍\U0001F469‍\U0001F467",  // family
    "\U0001F1FA\U0001F1F8",                        // flag pair
    "1️⃣",                               // keycap one
    "✨",                                      // sparkles
    "\U0001F95A",                                  // egg
    "\U0001FA91",                                  // chair
    "⭐",                                      // star
};

inline const std::vector<std::string> kText = {"a", "Z", "7", ".", "!", "?", "wow", "é", "中",
                                               "—", "#", ":)"};

inline const std::vector<std::string> kSpace = {"", " ", "  ", "\n", "\t"};

}  // namespace testing
