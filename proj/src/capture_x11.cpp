#include "quac/capture.hpp"

#include <X11/Xatom.h>
#include <X11/Xlib.h>
#include <X11/Xutil.h>

namespace quac {
namespace {

int mask_shift(unsigned long mask) {
  int shift = 0;
  while (mask && !(mask & 1)) {
    mask >>= 1;
    ++shift;
  }
  return shift;
}

class X11Source final : public CaptureSource {
 public:
  X11Source() : display_(XOpenDisplay(nullptr)) {
    if (!display_) throw CaptureError(CaptureError::Kind::unavailable, "cannot open X display");
    root_ = DefaultRootWindow(display_);
  }
  ~X11Source() override { XCloseDisplay(display_); }
  X11Source(const X11Source&) = delete;
  X11Source& operator=(const X11Source&) = delete;

  Rect display_bounds() override {
    XWindowAttributes attrs{};
    XGetWindowAttributes(display_, root_, &attrs);
    return {0, 0, attrs.width, attrs.height};
  }

  std::optional<Rect> active_window() override {
    const Atom prop = XInternAtom(display_, "_NET_ACTIVE_WINDOW", True);
    if (prop == None) return std::nullopt;
    Atom type{};
    int format = 0;
    unsigned long count = 0, remaining = 0;
    unsigned char* data = nullptr;
    if (XGetWindowProperty(display_, root_, prop, 0, 1, False, XA_WINDOW, &type, &format, &count,
                           &remaining, &data) != Success || !data || count == 0) {
      if (data) XFree(data);
      return std::nullopt;
    }
    const Window window = *reinterpret_cast<Window*>(data);
    XFree(data);
    if (window == None) return std::nullopt;

    XWindowAttributes attrs{};
    if (!XGetWindowAttributes(display_, window, &attrs)) return std::nullopt;
    int x = 0, y = 0;
    Window child{};
    XTranslateCoordinates(display_, window, root_, 0, 0, &x, &y, &child);
    return Rect{x, y, attrs.width, attrs.height};
  }

  Point cursor() override {
    Window root_ret{}, child{};
    int rx = 0, ry = 0, wx = 0, wy = 0;
    unsigned int mask = 0;
    XQueryPointer(display_, root_, &root_ret, &child, &rx, &ry, &wx, &wy, &mask);
    return {rx, ry};
  }

  Frame grab(const Rect& r) override {
    XImage* img = XGetImage(display_, root_, r.x, r.y, static_cast<unsigned>(r.width),
                            static_cast<unsigned>(r.height), AllPlanes, ZPixmap);
    if (!img) throw CaptureError(CaptureError::Kind::unavailable, "XGetImage failed");
    const int rs = mask_shift(img->red_mask);
    const int gs = mask_shift(img->green_mask);
    const int bs = mask_shift(img->blue_mask);
    Frame f{r.width, r.height, {}};
    f.rgb.resize(static_cast<std::size_t>(r.width) * r.height * 3);
    for (int y = 0; y < r.height; ++y) {
      for (int x = 0; x < r.width; ++x) {
        const unsigned long px = XGetPixel(img, x, y);
        auto* out = &f.rgb[(static_cast<std::size_t>(y) * r.width + x) * 3];
        out[0] = static_cast<std::uint8_t>((px & img->red_mask) >> rs);
        out[1] = static_cast<std::uint8_t>((px & img->green_mask) >> gs);
        out[2] = static_cast<std::uint8_t>((px & img->blue_mask) >> bs);
      }
    }
    XDestroyImage(img);
    return f;
  }

 private:
  ::Display* display_;
  Window root_{};
};

}  // namespace

std::unique_ptr<CaptureSource> make_platform_source() { return std::make_unique<X11Source>(); }

}  // namespace quac
