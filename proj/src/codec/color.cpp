#include "jpr/codec/color.hpp"

#include <algorithm>
#include <cmath>

namespace jpr::codec {
namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

void require(const ImageU8& img, ColorSpace cs, const char* op) {
  if (img.colorspace != cs)
    throw PreconditionError(std::string(op) + ": expected " + to_string(cs) + " input, got " +
                            to_string(img.colorspace));
  if (img.channels != 3) throw PreconditionError(std::string(op) + ": expected 3 channels");
}

}  // namespace

ImageU8 rgb_to_ycbcr(const ImageU8& img) {
  require(img, ColorSpace::RGB, "rgb_to_ycbcr");
  ImageU8 out(img.height, img.width, 3, ColorSpace::YCbCr);
  for (std::size_t i = 0; i < img.data.size(); i += 3) {
    const double r = img.data[i], g = img.data[i + 1], b = img.data[i + 2];
    out.data[i] = to_byte(0.299 * r + 0.587 * g + 0.114 * b);
    out.data[i + 1] = to_byte(-0.168736 * r - 0.331264 * g + 0.5 * b + 128.0);
    out.data[i + 2] = to_byte(0.5 * r - 0.418688 * g - 0.081312 * b + 128.0);
  }
  return out;
}

ImageU8 ycbcr_to_rgb(const ImageU8& img) {
  require(img, ColorSpace::YCbCr, "ycbcr_to_rgb");
  ImageU8 out(img.height, img.width, 3, ColorSpace::RGB);
  for (std::size_t i = 0; i < img.data.size(); i += 3) {
    const double y = img.data[i], cb = img.data[i + 1] - 128.0, cr = img.data[i + 2] - 128.0;
    out.data[i] = to_byte(y + 1.402 * cr);
    out.data[i + 1] = to_byte(y - 0.344136 * cb - 0.714136 * cr);
    out.data[i + 2] = to_byte(y + 1.772 * cb);
  }
  return out;
}

PlanarYCbCr subsample_420(const ImageU8& ycbcr) {
  require(ycbcr, ColorSpace::YCbCr, "subsample_420");
  if (ycbcr.height % 2 != 0 || ycbcr.width % 2 != 0)
    throw PreconditionError("subsample_420: odd image dimensions " + std::to_string(ycbcr.height) +
                            "x" + std::to_string(ycbcr.width) + "; pad to even size first");
  const int h = ycbcr.height, w = ycbcr.width;
  PlanarYCbCr out{Plane(h, w), Plane(h / 2, w / 2), Plane(h / 2, w / 2)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.y.at(y, x) = ycbcr.at(y, x, 0);
  for (int c = 1; c <= 2; ++c) {
    Plane& dst = c == 1 ? out.cb : out.cr;
    for (int y = 0; y < h / 2; ++y) {
      for (int x = 0; x < w / 2; ++x) {
        const int sum = ycbcr.at(2 * y, 2 * x, c) + ycbcr.at(2 * y, 2 * x + 1, c) +
                        ycbcr.at(2 * y + 1, 2 * x, c) + ycbcr.at(2 * y + 1, 2 * x + 1, c);
        dst.at(y, x) = static_cast<std::uint8_t>((sum + 2) / 4);
      }
    }
  }
  return out;
}

ImageU8 upsample_420(const PlanarYCbCr& planes) {
  const int h = planes.y.height, w = planes.y.width;
  for (const Plane* p : {&planes.cb, &planes.cr}) {
    if (p->height != (h + 1) / 2 || p->width != (w + 1) / 2)
      throw ShapeError("upsample_420: chroma plane " + std::to_string(p->height) + "x" +
                       std::to_string(p->width) + " is not half of luma " + std::to_string(h) +
                       "x" + std::to_string(w));
  }
  ImageU8 out(h, w, 3, ColorSpace::YCbCr);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.at(y, x, 0) = planes.y.at(y, x);
      out.at(y, x, 1) = planes.cb.at(y / 2, x / 2);
      out.at(y, x, 2) = planes.cr.at(y / 2, x / 2);
    }
  }
  return out;
}

}  // namespace jpr::codec
