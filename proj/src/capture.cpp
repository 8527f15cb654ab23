#include "quac/capture.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>

namespace quac {

Size parse_size(std::string_view text) {
  const auto x = text.find_first_of("xX");
  Size s;
  auto parse = [&](std::string_view part, int& out) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc{} && ptr == part.data() + part.size() && out > 0;
  };
  if (x == std::string_view::npos || !parse(text.substr(0, x), s.width) ||
      !parse(text.substr(x + 1), s.height)) {
    throw Error("expected WxH, got '" + std::string(text) + "'");
  }
  return s;
}

std::string to_string(Size s) { return std::to_string(s.width) + "x" + std::to_string(s.height); }

namespace {

Frame synthetic_frame(Size display) {
  Frame f{display.width, display.height, {}};
  f.rgb.resize(static_cast<std::size_t>(display.width) * display.height * 3);
  for (int y = 0; y < display.height; ++y) {
    for (int x = 0; x < display.width; ++x) {
      auto* px = &f.rgb[(static_cast<std::size_t>(y) * display.width + x) * 3];
      px[0] = static_cast<std::uint8_t>(x * 255 / std::max(1, display.width - 1));
      px[1] = static_cast<std::uint8_t>(y * 255 / std::max(1, display.height - 1));
      px[2] = static_cast<std::uint8_t>(((x / 64) + (y / 64)) % 2 ? 200 : 40);
    }
  }
  return f;
}

class PngFileSource final : public CaptureSource {
 public:
  explicit PngFileSource(Frame frame) : frame_(std::move(frame)) {}
  Rect display_bounds() override { return {0, 0, frame_.width, frame_.height}; }
  std::optional<Rect> active_window() override { return display_bounds(); }
  Point cursor() override { return {frame_.width / 2, frame_.height / 2}; }
  Frame grab(const Rect& r) override { return frame_.crop(r); }

 private:
  Frame frame_;
};

}  // namespace

FakeCaptureSource::FakeCaptureSource(Size display) : frame_(synthetic_frame(display)) {}

FakeCaptureSource::FakeCaptureSource(Frame frame) : frame_(std::move(frame)) {}

void FakeCaptureSource::check_available() const {
  if (!available_) throw CaptureError(CaptureError::Kind::unavailable, "fake display unavailable");
}

Rect FakeCaptureSource::display_bounds() {
  check_available();
  return {0, 0, frame_.width, frame_.height};
}

std::optional<Rect> FakeCaptureSource::active_window() {
  check_available();
  return window_;
}

Point FakeCaptureSource::cursor() {
  check_available();
  return cursor_;
}

Frame FakeCaptureSource::grab(const Rect& r) {
  check_available();
  ++grabs_;
  return frame_.crop(r);
}

std::unique_ptr<CaptureSource> make_png_file_source(const std::filesystem::path& png) {
  std::ifstream in(png, std::ios::binary);
  if (!in) throw CaptureError(CaptureError::Kind::unavailable, "cannot open " + png.string());
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), {}};
  return std::make_unique<PngFileSource>(decode_png(bytes));
}

Rect cursor_region_rect(Point cursor, Size region, const Rect& display) {
  const int w = std::min(region.width, display.width);
  const int h = std::min(region.height, display.height);
  const int x = std::clamp(cursor.x - w / 2, display.x, display.right() - w);
  const int y = std::clamp(cursor.y - h / 2, display.y, display.bottom() - h);
  return {x, y, w, h};
}

EncodedImage capture(CaptureMode mode, CaptureSource& source, Timestamp now, Size cursor_region) {
  const Rect display = source.display_bounds();
  if (display.empty()) throw CaptureError(CaptureError::Kind::unavailable, "display has no area");

  Rect target = display;
  switch (mode) {
    case CaptureMode::whole_screen:
      break;
    case CaptureMode::active_window: {
      auto window = source.active_window();
      if (!window) throw CaptureError(CaptureError::Kind::no_active_window, "no focused window");
      target = intersect(*window, display);
      if (target.empty()) {
        throw CaptureError(CaptureError::Kind::no_active_window, "focused window is off-screen");
      }
      break;
    }
    case CaptureMode::cursor_region:
      target = cursor_region_rect(source.cursor(), cursor_region, display);
      break;
  }

  // Frames are addressed relative to the display origin.
  const Frame frame = source.grab({target.x - display.x, target.y - display.y, target.width, target.height});
  EncodedImage img;
  img.media_type = "image/png";
  img.data_b64 = base64_encode(encode_png(frame));
  img.captured_at = now;
  img.mode = mode;
  img.width = frame.width;
  img.height = frame.height;
  return img;
}

}  // namespace quac
