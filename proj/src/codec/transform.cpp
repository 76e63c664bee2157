#include "jpr/codec/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "jpr/error.hpp"

namespace jpr::codec {
namespace {

// basis[u][x] = alpha(u) * cos((2x+1) u pi / 16), alpha(0) = sqrt(1/8), else sqrt(2/8).
struct CosineBasis {
  std::array<std::array<double, 8>, 8> m{};
  CosineBasis() {
    for (int u = 0; u < 8; ++u) {
      const double alpha = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x)
        m[u][x] = alpha * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
    }
  }
};

const CosineBasis& basis() {
  static const CosineBasis b;
  return b;
}

}  // namespace

const QuantTable kAnnexKLuma = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99};

const QuantTable kAnnexKChroma = {
    17, 18, 24, 47, 99, 99, 99, 99,  //
    18, 21, 26, 66, 99, 99, 99, 99,  //
    24, 26, 56, 99, 99, 99, 99, 99,  //
    47, 66, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99};

const std::array<int, kBlockArea> kZigzagOrder = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

CoefficientBlock dct_2d(const SampleBlock& samples) {
  const auto& c = basis().m;
  std::array<double, kBlockArea> rows{};
  // Transform rows, then columns.
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += c[u][x] * (samples[y * 8 + x] - 128.0);
      rows[y * 8 + u] = acc;
    }
  CoefficientBlock out{};
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += c[v][y] * rows[y * 8 + u];
      out[v * 8 + u] = acc;
    }
  return out;
}

SampleBlock idct_2d(const CoefficientBlock& coeffs) {
  const auto& c = basis().m;
  std::array<double, kBlockArea> cols{};
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += c[v][y] * coeffs[v * 8 + u];
      cols[y * 8 + u] = acc;
    }
  SampleBlock out{};
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += c[u][x] * cols[y * 8 + u];
      out[y * 8 + x] = std::clamp(acc + 128.0, 0.0, 255.0);
    }
  return out;
}

QuantTableSet scale_quant_tables(int quality) {
  if (quality < 1 || quality > 100)
    throw PreconditionError("quality must be in [1,100], got " + std::to_string(quality));
  const long scale = quality < 50 ? 5000 / quality : 200 - 2L * quality;
  auto scale_table = [scale](const QuantTable& base) {
    QuantTable out{};
    for (int i = 0; i < kBlockArea; ++i)
      out[i] = static_cast<std::uint16_t>(std::clamp((base[i] * scale + 50) / 100, 1L, 255L));
    return out;
  };
  return {scale_table(kAnnexKLuma), scale_table(kAnnexKChroma), quality};
}

int quantize_coefficient(double coeff, int step) {
  const double r = coeff / step;
  return static_cast<int>(r < 0 ? -std::floor(-r + 0.5) : std::floor(r + 0.5));
}

BlockGrid<QuantizedBlock> quantize(const BlockGrid<CoefficientBlock>& coeffs,
                                   const QuantTableSet& tables) {
  BlockGrid<QuantizedBlock> out;
  for (int c = 0; c < 3; ++c) {
    const auto& src = coeffs.components[c];
    const QuantTable& table = c == 0 ? tables.luma : tables.chroma;
    auto& dst = out.components[c];
    dst.blocks_wide = src.blocks_wide;
    dst.blocks_high = src.blocks_high;
    dst.blocks.resize(src.blocks.size());
    for (std::size_t b = 0; b < src.blocks.size(); ++b)
      for (int i = 0; i < kBlockArea; ++i)
        dst.blocks[b][i] = quantize_coefficient(src.blocks[b][i], table[i]);
  }
  return out;
}

BlockGrid<CoefficientBlock> dequantize(const BlockGrid<QuantizedBlock>& q,
                                       const QuantTableSet& tables) {
  BlockGrid<CoefficientBlock> out;
  for (int c = 0; c < 3; ++c) {
    const auto& src = q.components[c];
    const QuantTable& table = c == 0 ? tables.luma : tables.chroma;
    auto& dst = out.components[c];
    dst.blocks_wide = src.blocks_wide;
    dst.blocks_high = src.blocks_high;
    dst.blocks.resize(src.blocks.size());
    for (std::size_t b = 0; b < src.blocks.size(); ++b)
      for (int i = 0; i < kBlockArea; ++i)
        dst.blocks[b][i] = static_cast<double>(src.blocks[b][i]) * table[i];
  }
  return out;
}

}  // namespace jpr::codec
