#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "jpr/error.hpp"

namespace jpr {

enum class ColorSpace { RGB, YCbCr };

// Declared sample interval. Byte images hold [0,255]; Signed images hold the
// model range [-1,1].
enum class ValueRange { Byte, Signed };

std::string to_string(ColorSpace cs);

// Interleaved H x W x C pixel array; the common currency between modules.
template <typename T>
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  ColorSpace colorspace = ColorSpace::RGB;
  ValueRange range = ValueRange::Byte;
  std::vector<T> data;

  Image() = default;
  Image(int h, int w, int c, ColorSpace cs = ColorSpace::RGB,
        ValueRange r = ValueRange::Byte, T fill = T{})
      : height(h), width(w), channels(c), colorspace(cs), range(r),
        data(static_cast<std::size_t>(h) * w * c, fill) {
    if (h < 0 || w < 0 || c < 0) throw ShapeError("negative image dimension");
  }

  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  T& at(int y, int x, int c) { return data[index(y, x, c)]; }
  const T& at(int y, int x, int c) const { return data[index(y, x, c)]; }

  std::size_t size() const { return data.size(); }
  std::span<T> samples() { return data; }
  std::span<const T> samples() const { return data; }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }

  friend bool operator==(const Image&, const Image&) = default;
};

using ImageU8 = Image<std::uint8_t>;
using ImageF = Image<float>;

// One 8-bit sample plane (a single colour component).
struct Plane {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> samples;

  Plane() = default;
  Plane(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), samples(static_cast<std::size_t>(h) * w, fill) {}

  std::uint8_t& at(int y, int x) { return samples[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return samples[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const Plane&, const Plane&) = default;
};

ImageF to_float(const ImageU8& img);
// Rounds half up and clamps to [0,255].
ImageU8 to_u8(const ImageF& img);

}  // namespace jpr
