#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "jpr/codec/jpeg.hpp"
#include "jpr/image.hpp"

namespace jpr::dataset {

inline constexpr int kSourceSize = 128;  // side of originals and C(x)
inline constexpr int kModelSize = 512;   // side the generator works at

// One element of the training corpus: an original and its decoded
// maximally-compressed counterpart.
struct PairedSample {
  std::string source_id;
  ImageU8 original;
  ImageU8 compressed;
  std::size_t png_bytes = 0;
  std::size_t jpeg_bytes = 0;
  std::vector<std::uint8_t> jpeg_stream;  // the encoded C(x)
};

struct BuildReport {
  std::size_t accepted = 0;
  std::size_t skipped = 0;  // wrong size; logged as warnings
  std::size_t total_png_bytes = 0;
  std::size_t total_jpeg_bytes = 0;

  // 1 - sum(jpeg) / sum(png)
  double data_reduction() const;
};

// Compresses every 128x128 PNG in png_dir (sorted by filename). Images of
// another size are skipped with a warning; unreadable files throw IoError or
// ParseError naming the path.
std::vector<PairedSample> build_pairs(const std::filesystem::path& png_dir,
                                      int quality = codec::kMaxCompressionQuality,
                                      BuildReport* report = nullptr);

// Same, for an in-memory original whose PNG encoding is `png_bytes` long.
PairedSample make_pair(std::string source_id, const ImageU8& original, std::size_t png_bytes,
                       int quality = codec::kMaxCompressionQuality);

struct DatasetSplit {
  std::vector<PairedSample> train;
  std::vector<PairedSample> test;
  std::uint64_t seed = 0;
};

// Seeded shuffle, then the first round(ratio * n) samples train.
DatasetSplit split(std::vector<PairedSample> pairs, double ratio = 0.8, std::uint64_t seed = 0);

// Portable Fisher-Yates permutation of [0, n) driven by mt19937_64.
std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed);

// Batch order for one epoch, derived from (seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch);

// Bilinear resize with the half-pixel (align-corners=false) convention.
ImageF resize_bilinear(const ImageF& img, int out_height, int out_width);
ImageF upsample_bilinear(const ImageF& img);       // 128 -> 512
ImageF downsample_to_original(const ImageF& img);  // 512 -> 128

// v / 127.5 - 1
ImageF to_model_range(const ImageF& img);
ImageF to_model_range(const ImageU8& img);
// (v + 1) * 127.5 clamped to [0,255]
ImageF from_model_range(const ImageF& img);

// On-disk layout: original/<id>.png, compressed/<id>.png, jpeg/<id>.jpg and
// manifest.jsonl with one record per pair.
struct ManifestRecord {
  std::string source_id;
  std::string split;  // "train" or "test"
  std::string original_path;
  std::string compressed_path;
  std::string jpeg_path;
  std::size_t png_bytes = 0;
  std::size_t jpeg_bytes = 0;
  int quality = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

inline constexpr const char* kManifestName = "manifest.jsonl";

std::string format_manifest(const std::vector<ManifestRecord>& records);
std::vector<ManifestRecord> parse_manifest(const std::string& text);

// Materialises a split (images + JPEG streams + manifest) under out_dir.
void write_dataset(const DatasetSplit& split, const std::filesystem::path& out_dir, int quality);
DatasetSplit load_dataset(const std::filesystem::path& dir);

}  // namespace jpr::dataset
