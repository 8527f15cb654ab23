#include "quac/image.hpp"

#include <algorithm>
#include <cstring>
#include <memory>

#include <openssl/evp.h>
#include <openssl/sha.h>
#include <png.h>

namespace quac {

Rect intersect(const Rect& a, const Rect& b) {
  const int x0 = std::max(a.x, b.x);
  const int y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.right(), b.right());
  const int y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return {x0, y0, 0, 0};
  return {x0, y0, x1 - x0, y1 - y0};
}

Frame Frame::crop(const Rect& r) const {
  const Rect clipped = intersect(r, Rect{0, 0, width, height});
  Frame out{clipped.width, clipped.height, {}};
  out.rgb.resize(static_cast<std::size_t>(clipped.width) * clipped.height * 3);
  for (int row = 0; row < clipped.height; ++row) {
    const auto* src = rgb.data() + (static_cast<std::size_t>(clipped.y + row) * width + clipped.x) * 3;
    auto* dst = out.rgb.data() + static_cast<std::size_t>(row) * clipped.width * 3;
    std::memcpy(dst, src, static_cast<std::size_t>(clipped.width) * 3);
  }
  return out;
}

std::string_view to_string(CaptureMode mode) {
  switch (mode) {
    case CaptureMode::whole_screen: return "whole_screen";
    case CaptureMode::active_window: return "active_window";
    case CaptureMode::cursor_region: return "cursor_region";
  }
  return "?";
}

CaptureMode parse_capture_mode(std::string_view name) {
  for (auto m : {CaptureMode::whole_screen, CaptureMode::active_window, CaptureMode::cursor_region}) {
    if (to_string(m) == name) return m;
  }
  throw Error("unknown capture mode: " + std::string(name));
}

std::vector<std::uint8_t> encode_png(const Frame& frame) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width);
  image.height = static_cast<png_uint_32>(frame.height);
  image.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, frame.rgb.data(), 0, nullptr)) {
    throw Error(std::string("png sizing failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, frame.rgb.data(), 0, nullptr)) {
    throw Error(std::string("png encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

Frame decode_png(std::span<const std::uint8_t> png) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, png.data(), png.size())) {
    throw Error(std::string("not a png: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  Frame f{static_cast<int>(image.width), static_cast<int>(image.height), {}};
  f.rgb.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, f.rgb.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(std::string("png decode failed: ") + image.message);
  }
  return f;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error("base64 length not a multiple of 4");
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw Error("malformed base64");
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

bool is_valid(const EncodedImage& img) {
  if (img.media_type != "image/png") return false;
  try {
    const auto bytes = base64_decode(img.data_b64);
    const Frame f = decode_png(bytes);
    return f.width == img.width && f.height == img.height;
  } catch (const Error&) {
    return false;
  }
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char c : digest) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 0xF]);
  }
  return out;
}

}  // namespace quac
