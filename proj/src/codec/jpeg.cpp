#include "jpr/codec/jpeg.hpp"

#include <algorithm>
#include <cmath>

namespace jpr::codec {

ComponentGrid<SampleBlock> split_blocks(const Plane& plane) {
  ComponentGrid<SampleBlock> grid;
  grid.blocks_wide = (plane.width + 7) / 8;
  grid.blocks_high = (plane.height + 7) / 8;
  grid.blocks.resize(static_cast<std::size_t>(grid.blocks_wide) * grid.blocks_high);
  for (int by = 0; by < grid.blocks_high; ++by)
    for (int bx = 0; bx < grid.blocks_wide; ++bx) {
      SampleBlock& blk = grid.at(by, bx);
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
          const int sy = std::min(by * 8 + y, plane.height - 1);
          const int sx = std::min(bx * 8 + x, plane.width - 1);
          blk[y * 8 + x] = plane.at(sy, sx);
        }
    }
  return grid;
}

Plane merge_blocks(const ComponentGrid<SampleBlock>& blocks, int height, int width) {
  if (blocks.blocks_wide * 8 < width || blocks.blocks_high * 8 < height)
    throw ShapeError("block grid too small for plane");
  Plane out(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      // Nearest integer, ties to even. Flat dequantized blocks land exactly
      // on .5, so values within cosine round-off of a tie count as one.
      const double v = blocks.at(y / 8, x / 8)[(y % 8) * 8 + (x % 8)];
      const double f = std::floor(v);
      double r = std::nearbyint(v);
      if (std::abs(v - f - 0.5) < 1e-9) r = std::fmod(f, 2.0) == 0.0 ? f : f + 1.0;
      out.at(y, x) = static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
    }
  return out;
}

JpegBitstream compress(const ImageU8& rgb, int quality) {
  if (rgb.colorspace != ColorSpace::RGB || rgb.channels != 3)
    throw PreconditionError("compress expects a 3-channel RGB image");
  if (rgb.height < 8 || rgb.width < 8)
    throw PreconditionError("compress needs at least one full 8x8 block");
  const QuantTableSet tables = scale_quant_tables(quality);
  const PlanarYCbCr planes = subsample_420(rgb_to_ycbcr(rgb));

  BlockGrid<CoefficientBlock> coeffs;
  const Plane* sources[3] = {&planes.y, &planes.cb, &planes.cr};
  for (int c = 0; c < 3; ++c) {
    const auto samples = split_blocks(*sources[c]);
    auto& dst = coeffs.components[c];
    dst.blocks_wide = samples.blocks_wide;
    dst.blocks_high = samples.blocks_high;
    dst.blocks.reserve(samples.blocks.size());
    for (const auto& blk : samples.blocks) dst.blocks.push_back(dct_2d(blk));
  }

  QuantizedImage q{rgb.height, rgb.width, tables, quantize(coeffs, tables)};
  return encode_entropy(q);
}

ImageU8 decompress(std::span<const std::uint8_t> bytes) {
  const QuantizedImage q = decode_entropy(bytes);
  const auto coeffs = dequantize(q.grid, q.tables);
  const int ch = (q.height + 1) / 2, cw = (q.width + 1) / 2;
  PlanarYCbCr planes;
  for (int c = 0; c < 3; ++c) {
    const auto& src = coeffs.components[c];
    ComponentGrid<SampleBlock> samples{src.blocks_wide, src.blocks_high, {}};
    samples.blocks.reserve(src.blocks.size());
    for (const auto& blk : src.blocks) samples.blocks.push_back(idct_2d(blk));
    Plane p = c == 0 ? merge_blocks(samples, q.height, q.width) : merge_blocks(samples, ch, cw);
    (c == 0 ? planes.y : c == 1 ? planes.cb : planes.cr) = std::move(p);
  }
  return ycbcr_to_rgb(upsample_420(planes));
}

ImageU8 roundtrip(const ImageU8& rgb, int quality) { return decompress(compress(rgb, quality)); }

}  // namespace jpr::codec
