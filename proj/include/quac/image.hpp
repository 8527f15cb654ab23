#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quac/common.hpp"

namespace quac {

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  int right() const { return x + width; }
  int bottom() const { return y + height; }
  bool empty() const { return width <= 0 || height <= 0; }
  bool contains(const Rect& r) const {
    return r.x >= x && r.y >= y && r.right() <= right() && r.bottom() <= bottom();
  }
  bool operator==(const Rect&) const = default;
};

Rect intersect(const Rect& a, const Rect& b);

/// Packed 8-bit RGB pixels, row-major, no padding.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Frame crop(const Rect& r) const;
};

enum class CaptureMode { whole_screen, active_window, cursor_region };

std::string_view to_string(CaptureMode mode);
/// Throws quac::Error on unknown names.
CaptureMode parse_capture_mode(std::string_view name);

struct EncodedImage {
  std::string media_type = "image/png";
  std::string data_b64;
  Timestamp captured_at{0};
  CaptureMode mode = CaptureMode::whole_screen;
  int width = 0;
  int height = 0;
};

std::vector<std::uint8_t> encode_png(const Frame& frame);
/// Throws quac::Error when the bytes are not a readable PNG.
Frame decode_png(std::span<const std::uint8_t> png);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws quac::Error on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// True when data_b64 decodes to a PNG matching the declared size.
bool is_valid(const EncodedImage& img);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace quac
