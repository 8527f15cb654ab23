#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "quac/image.hpp"

namespace quac {

class CaptureError : public Error {
 public:
  enum class Kind { unavailable, no_active_window };
  CaptureError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Size {
  int width = 0;
  int height = 0;
  bool operator==(const Size&) const = default;
};

/// Parses "WxH" (e.g. "1024x768"). Throws quac::Error.
Size parse_size(std::string_view text);
std::string to_string(Size s);

inline constexpr Size kDefaultCursorRegion{1024, 768};

/// Abstraction over the OS screen. Implementations are driven from a single
/// thread and need not be thread-safe.
class CaptureSource {
 public:
  virtual ~CaptureSource() = default;
  /// Bounds of the display containing the cursor, in global coordinates.
  virtual Rect display_bounds() = 0;
  virtual std::optional<Rect> active_window() = 0;
  virtual Point cursor() = 0;
  /// Grabs pixels of a rectangle given relative to the display origin.
  virtual Frame grab(const Rect& r) = 0;
};

/// Scripted source for tests and offline runs: a deterministic synthetic frame
/// plus settable window and cursor geometry.
class FakeCaptureSource final : public CaptureSource {
 public:
  explicit FakeCaptureSource(Size display = {1920, 1080});
  /// Uses the given frame as the display contents.
  explicit FakeCaptureSource(Frame frame);

  void set_cursor(Point p) { cursor_ = p; }
  void set_active_window(std::optional<Rect> w) { window_ = w; }
  void set_available(bool available) { available_ = available; }

  Rect display_bounds() override;
  std::optional<Rect> active_window() override;
  Point cursor() override;
  Frame grab(const Rect& r) override;

  int grab_count() const { return grabs_; }

 private:
  void check_available() const;

  Frame frame_;
  Point cursor_{0, 0};
  std::optional<Rect> window_;
  bool available_ = true;
  int grabs_ = 0;
};

/// Loads a PNG once and serves it as the display.
std::unique_ptr<CaptureSource> make_png_file_source(const std::filesystem::path& png);

/// Live screen source for the current platform. Throws CaptureError
/// (unavailable) when no display can be opened or none is supported.
std::unique_ptr<CaptureSource> make_platform_source();

/// Rectangle of the given size centred on the cursor and shifted to lie
/// inside the display. Shrinks to the display when the display is smaller.
Rect cursor_region_rect(Point cursor, Size region, const Rect& display);

/// Captures one PNG screenshot for the mode. Throws CaptureError.
EncodedImage capture(CaptureMode mode, CaptureSource& source, Timestamp now,
                     Size cursor_region = kDefaultCursorRegion);

}  // namespace quac
