#include "quac/capture.hpp"

namespace quac {

std::unique_ptr<CaptureSource> make_platform_source() {
  throw CaptureError(CaptureError::Kind::unavailable,
                     "no screen capture backend was built for this platform");
}

}  // namespace quac
