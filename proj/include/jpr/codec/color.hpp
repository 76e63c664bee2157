#pragma once

#include "jpr/image.hpp"

namespace jpr::codec {

// Full-range BT.601 (JFIF) conversion, rounded to nearest and clamped.
ImageU8 rgb_to_ycbcr(const ImageU8& img);
ImageU8 ycbcr_to_rgb(const ImageU8& img);

struct PlanarYCbCr {
  Plane y;
  Plane cb;
  Plane cr;
};

// 4:2:0 chroma decimation: each chroma sample is the round-half-up mean of its
// 2x2 source neighbourhood. Throws PreconditionError for odd dimensions.
PlanarYCbCr subsample_420(const ImageU8& ycbcr);

// Nearest-neighbour 2x chroma replication back to luma resolution.
ImageU8 upsample_420(const PlanarYCbCr& planes);

}  // namespace jpr::codec
