#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jpr/codec/color.hpp"
#include "jpr/codec/transform.hpp"
#include "jpr/image.hpp"

namespace jpr::codec {

// Quality used to produce the maximally compressed training inputs.
inline constexpr int kMaxCompressionQuality = 1;

struct JpegBitstream {
  std::vector<std::uint8_t> bytes;
  std::size_t encoded_size = 0;
  int source_height = 0;
  int source_width = 0;
};

// Everything the entropy stage carries: frame size, the tables written to DQT,
// and the quantized coefficients in natural order.
struct QuantizedImage {
  int height = 0;
  int width = 0;
  QuantTableSet tables;
  BlockGrid<QuantizedBlock> grid;

  friend bool operator==(const QuantizedImage&, const QuantizedImage&) = default;
};

// Block-grid dimensions of a 4:2:0 frame: component c covers
// ceil(H_c/8) x ceil(W_c/8) blocks.
struct GridLayout {
  int luma_wide, luma_high, chroma_wide, chroma_high;
};
GridLayout grid_layout(int height, int width);

// Splits a plane into 8x8 blocks, replicating the last row/column into
// partial blocks.
ComponentGrid<SampleBlock> split_blocks(const Plane& plane);
// Reassembles blocks into a plane of the given size, rounding to nearest
// (ties to even).
Plane merge_blocks(const ComponentGrid<SampleBlock>& blocks, int height, int width);

// Baseline sequential JFIF writer using the Annex K Huffman tables.
// Throws PreconditionError when a coefficient exceeds the baseline range.
JpegBitstream encode_entropy(const QuantizedImage& q);

// Parses a baseline 4:2:0 JFIF stream (ours or a third-party encoder's).
QuantizedImage decode_entropy(std::span<const std::uint8_t> bytes);
inline QuantizedImage decode_entropy(const JpegBitstream& bs) { return decode_entropy(bs.bytes); }

// Full encoder: colour conversion, 4:2:0, block DCT, quantization, entropy.
JpegBitstream compress(const ImageU8& rgb, int quality = kMaxCompressionQuality);

ImageU8 decompress(std::span<const std::uint8_t> bytes);
inline ImageU8 decompress(const JpegBitstream& bs) { return decompress(bs.bytes); }

// decompress(compress(img, quality)); the C(x) of a training pair.
ImageU8 roundtrip(const ImageU8& rgb, int quality = kMaxCompressionQuality);

}  // namespace jpr::codec
