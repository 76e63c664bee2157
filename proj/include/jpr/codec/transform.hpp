#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace jpr::codec {

inline constexpr int kBlockSize = 8;
inline constexpr int kBlockArea = 64;

// Row-major 8x8 blocks.
using SampleBlock = std::array<double, kBlockArea>;
using CoefficientBlock = std::array<double, kBlockArea>;
using QuantizedBlock = std::array<int, kBlockArea>;
using QuantTable = std::array<std::uint16_t, kBlockArea>;

// Orthonormal type-II 2-D DCT of samples in [0,255]; the -128 level shift is
// applied internally.
CoefficientBlock dct_2d(const SampleBlock& samples);

// Inverse of dct_2d: adds the +128 level shift and clamps to [0,255]. No
// rounding is applied.
SampleBlock idct_2d(const CoefficientBlock& coeffs);

// ISO/IEC 10918-1 Annex K base tables in natural (row-major) order.
extern const QuantTable kAnnexKLuma;
extern const QuantTable kAnnexKChroma;

struct QuantTableSet {
  QuantTable luma{};
  QuantTable chroma{};
  int quality = 50;

  friend bool operator==(const QuantTableSet&, const QuantTableSet&) = default;
};

// IJG quality scaling of the Annex K tables. quality must be in [1,100].
QuantTableSet scale_quant_tables(int quality);

// Blocks of one colour component, stored row-major over the block grid.
template <typename BlockT>
struct ComponentGrid {
  int blocks_wide = 0;
  int blocks_high = 0;
  std::vector<BlockT> blocks;

  BlockT& at(int by, int bx) { return blocks[static_cast<std::size_t>(by) * blocks_wide + bx]; }
  const BlockT& at(int by, int bx) const {
    return blocks[static_cast<std::size_t>(by) * blocks_wide + bx];
  }
  friend bool operator==(const ComponentGrid&, const ComponentGrid&) = default;
};

// Component 0 is luma, 1 and 2 are chroma.
template <typename BlockT>
struct BlockGrid {
  std::array<ComponentGrid<BlockT>, 3> components;
  friend bool operator==(const BlockGrid&, const BlockGrid&) = default;
};

// round(coeff / step), halves rounded away from zero.
int quantize_coefficient(double coeff, int step);

BlockGrid<QuantizedBlock> quantize(const BlockGrid<CoefficientBlock>& coeffs,
                                   const QuantTableSet& tables);
BlockGrid<CoefficientBlock> dequantize(const BlockGrid<QuantizedBlock>& q,
                                       const QuantTableSet& tables);

// kZigzagOrder[k] is the natural (row-major) index of the k-th scanned value.
extern const std::array<int, kBlockArea> kZigzagOrder;

template <typename T>
std::array<T, kBlockArea> zigzag(const std::array<T, kBlockArea>& block) {
  std::array<T, kBlockArea> out{};
  for (int k = 0; k < kBlockArea; ++k) out[k] = block[kZigzagOrder[k]];
  return out;
}

template <typename T>
std::array<T, kBlockArea> inverse_zigzag(const std::array<T, kBlockArea>& scanned) {
  std::array<T, kBlockArea> out{};
  for (int k = 0; k < kBlockArea; ++k) out[kZigzagOrder[k]] = scanned[k];
  return out;
}

}  // namespace jpr::codec
