#pragma once

#include <span>
#include <string>
#include <vector>

#include "jpr/image.hpp"

namespace jpr::metrics {

// PSNR reported for identical images, keeping aggregates finite.
inline constexpr double kPsnrCap = 100.0;

// PSNR over all RGB samples jointly, MAX = 255.
double psnr(const ImageU8& x, const ImageU8& y);

struct SsimConstants {
  double dynamic_range = 255.0;
  double k1 = 0.01;
  double k2 = 0.03;
  int window = 11;
  double sigma = 1.5;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

// Real-valued BT.601 luma plane, row-major.
struct LumaPlane {
  int height = 0;
  int width = 0;
  std::vector<double> values;
  double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

LumaPlane luma(const ImageU8& rgb);

// Normalised 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> gaussian_taps(int size, double sigma);

// Mean of the Gaussian-windowed SSIM map over valid window positions,
// computed on luma.
double ssim(const ImageU8& x, const ImageU8& y, const SsimConstants& k = {});

struct VifOptions {
  int scales = 4;
  double noise_variance = 2.0;  // sigma_N^2 of the HVS noise model
};

// Number of pyramid scales an image of this size supports (0..opts.scales).
int vif_feasible_scales(int height, int width, const VifOptions& opts = {});

// Pixel-domain VIF on luma with a Gaussian pyramid. vif(x, x) == 1 exactly.
double vif(const ImageU8& reference, const ImageU8& distorted, const VifOptions& opts = {});

struct EvalRow {
  std::string source_id;
  double psnr = 0.0;
  double ssim = 0.0;
  double vif = 0.0;
  friend bool operator==(const EvalRow&, const EvalRow&) = default;
};

struct EvalReport {
  std::string label;          // column name, e.g. "Restored"
  int quality = 0;            // JPEG quality of the compressed inputs
  std::string checkpoint_id;  // empty when no model was involved
  std::vector<EvalRow> per_image;
  EvalRow aggregate;          // source_id "mean"

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Scores every (reference, test) pair and fills the mean row.
EvalReport evaluate(std::span<const ImageU8> references, std::span<const ImageU8> tests,
                    std::span<const std::string> ids, std::string label = "",
                    int quality = 0, std::string checkpoint_id = "");

// Recomputes the mean row from per_image.
void aggregate(EvalReport& report);

// Metrics-by-column table with one column per report (PSNR / SSIM / VIF rows).
std::string format_table(std::span<const EvalReport> columns);

// Line-delimited JSON: a header record, one record per image, an aggregate.
std::string to_jsonl(const EvalReport& report);
EvalReport parse_jsonl(const std::string& text);

}  // namespace jpr::metrics
