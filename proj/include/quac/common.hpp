#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace quac {

/// Milliseconds since the Unix epoch (or since an arbitrary origin for
/// simulated clocks).
using Millis = std::chrono::milliseconds;
using Timestamp = std::chrono::milliseconds;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::int64_t to_ms(Timestamp t) { return t.count(); }

}  // namespace quac
