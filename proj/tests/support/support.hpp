#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "jpr/image.hpp"

namespace jpr::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "jpr");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Uniform random 8-bit RGB image.
ImageU8 random_image(int height, int width, std::uint64_t seed);

// libjpeg decode with float IDCT and box (replicating) chroma upsampling.
ImageU8 libjpeg_decode(std::span<const std::uint8_t> bytes);
// libjpeg baseline 4:2:0 encode at an IJG quality.
std::vector<std::uint8_t> libjpeg_encode(const ImageU8& rgb, int quality);

// Direct per-window SSIM on BT.601 luma: every valid 11x11 window position is
// summed explicitly with a freshly built Gaussian kernel.
double ssim_brute_force(const ImageU8& x, const ImageU8& y);

// Full-range BT.601 RGB -> YCbCr straight from the matrix, unrounded.
void bt601_forward(double r, double g, double b, double& y, double& cb, double& cr);

}  // namespace jpr::testing
