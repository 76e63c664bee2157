#include "jpr/image.hpp"

#include <algorithm>
#include <cmath>

namespace jpr {

std::string to_string(ColorSpace cs) {
  return cs == ColorSpace::RGB ? "RGB" : "YCbCr";
}

ImageF to_float(const ImageU8& img) {
  ImageF out(img.height, img.width, img.channels, img.colorspace, ValueRange::Byte);
  std::transform(img.data.begin(), img.data.end(), out.data.begin(),
                 [](std::uint8_t v) { return static_cast<float>(v); });
  return out;
}

ImageU8 to_u8(const ImageF& img) {
  ImageU8 out(img.height, img.width, img.channels, img.colorspace, ValueRange::Byte);
  std::transform(img.data.begin(), img.data.end(), out.data.begin(), [](float v) {
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5f), 0.0f, 255.0f));
  });
  return out;
}

}  // namespace jpr
