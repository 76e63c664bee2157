#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "jpr/image.hpp"

namespace jpr::dataset {

// Procedural stand-ins for natural photographs: smooth colour gradients,
// soft blobs, a pink-noise texture and a little sensor noise. They compress
// roughly like real photographs, which makes them usable for desk-scale runs
// when no face corpus is at hand.
struct SyntheticOptions {
  int size = 128;
  int blobs = 6;
  double texture_sigma = 12.0;
  double pixel_sigma = 3.0;   // shared by all channels
  double chroma_sigma = 1.0;  // independent per channel
};

ImageU8 synthesize_image(std::uint64_t seed, const SyntheticOptions& options = {});
std::vector<ImageU8> synthesize_corpus(std::size_t count, std::uint64_t seed,
                                       const SyntheticOptions& options = {});
// Writes synth_NNNN.png files; returns their paths.
std::vector<std::filesystem::path> write_synthetic_corpus(const std::filesystem::path& dir, std::size_t count,
                                                          std::uint64_t seed,
                                                          const SyntheticOptions& options = {});

}  // namespace jpr::dataset
