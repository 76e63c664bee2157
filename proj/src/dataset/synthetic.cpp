#include "jpr/dataset/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "jpr/error.hpp"
#include "jpr/png_io.hpp"

namespace jpr::dataset {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(engine_() >> 11) * 0x1.0p-53);
  }
  // Box-Muller, so streams do not depend on the standard library.
  double normal() {
    const double u1 = 1.0 - uniform(0.0, 1.0);
    const double u2 = uniform(0.0, 1.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Sum of bilinearly interpolated random lattices, amplitude proportional to
// the lattice spacing: a cheap 1/f texture normalised to unit deviation.
std::vector<double> pink_noise(int n, Rng& rng) {
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int cell = 2; cell <= n; cell *= 2) {
    const int lattice = n / cell + 2;
    std::vector<double> grid(static_cast<std::size_t>(lattice) * lattice);
    for (auto& g : grid) g = rng.normal();
    const double amp = static_cast<double>(cell);
    for (int y = 0; y < n; ++y) {
      const double fy = static_cast<double>(y) / cell;
      const int y0 = static_cast<int>(fy);
      const double ty = fy - y0;
      for (int x = 0; x < n; ++x) {
        const double fx = static_cast<double>(x) / cell;
        const int x0 = static_cast<int>(fx);
        const double tx = fx - x0;
        auto at = [&](int gy, int gx) { return grid[static_cast<std::size_t>(gy) * lattice + gx]; };
        const double top = at(y0, x0) * (1 - tx) + at(y0, x0 + 1) * tx;
        const double bottom = at(y0 + 1, x0) * (1 - tx) + at(y0 + 1, x0 + 1) * tx;
        out[static_cast<std::size_t>(y) * n + x] += amp * (top * (1 - ty) + bottom * ty);
      }
    }
  }
  double mean = 0.0, sq = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  for (double v : out) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / static_cast<double>(out.size()));
  for (double& v : out) v = (v - mean) / sd;
  return out;
}

}  // namespace

ImageU8 synthesize_image(std::uint64_t seed, const SyntheticOptions& options) {
  const int n = options.size;
  if (n < 8) throw PreconditionError("synthetic images must be at least 8 pixels wide");
  Rng rng(seed);
  std::vector<double> px(static_cast<std::size_t>(n) * n * 3);
  auto at = [&](int y, int x, int c) -> double& { return px[(static_cast<std::size_t>(y) * n + x) * 3 + c]; };

  for (int c = 0; c < 3; ++c) {
    const double base = rng.uniform(40, 200), gx = rng.uniform(-60, 60), gy = rng.uniform(-60, 60);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) at(y, x, c) = base + gx * x / n + gy * y / n;
  }
  for (int b = 0; b < options.blobs; ++b) {
    const double cx = rng.uniform(0, 1), cy = rng.uniform(0, 1), r = rng.uniform(0.1, 0.35);
    const double col[3] = {rng.uniform(-80, 80), rng.uniform(-80, 80), rng.uniform(-80, 80)};
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const double dx = static_cast<double>(x) / n - cx, dy = static_cast<double>(y) / n - cy;
        const double q = (dx * dx + dy * dy) / (r * r);
        const double m = std::exp(-q * q);
        for (int c = 0; c < 3; ++c) at(y, x, c) += m * col[c];
      }
  }
  const auto texture = pink_noise(n, rng);
  ImageU8 img;
  img.height = n;
  img.width = n;
  img.channels = 3;
  img.data.resize(px.size());
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double shared = options.texture_sigma * texture[static_cast<std::size_t>(y) * n + x] +
                            options.pixel_sigma * rng.normal();
      for (int c = 0; c < 3; ++c) {
        double v = at(y, x, c) + shared + options.chroma_sigma * rng.normal();
        img.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
    }
  return img;
}

std::vector<ImageU8> synthesize_corpus(std::size_t count, std::uint64_t seed, const SyntheticOptions& options) {
  std::vector<ImageU8> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(synthesize_image(seed * 1000003ULL + i, options));
  return out;
}

std::vector<std::filesystem::path> write_synthetic_corpus(const std::filesystem::path& dir, std::size_t count,
                                                          std::uint64_t seed, const SyntheticOptions& options) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  const auto images = synthesize_corpus(count, seed, options);
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "synth_%04zu.png", i);
    paths.push_back(dir / name);
    write_png(paths.back(), images[i]);
  }
  return paths;
}

}  // namespace jpr::dataset
