#include <algorithm>
#include <cmath>
#include <string>

#include "jpr/log.hpp"
#include "jpr/metrics/metrics.hpp"

namespace jpr::metrics {
namespace {

void require_same_shape(const ImageU8& x, const ImageU8& y, const char* op) {
  if (!x.same_shape(y))
    throw ShapeError(std::string(op) + ": image dimensions differ (" + std::to_string(x.height) +
                     "x" + std::to_string(x.width) + "x" + std::to_string(x.channels) + " vs " +
                     std::to_string(y.height) + "x" + std::to_string(y.width) + "x" +
                     std::to_string(y.channels) + ")");
}

// 'valid' separable correlation with a symmetric kernel.
LumaPlane filter_valid(const LumaPlane& in, const std::vector<double>& taps) {
  const int n = static_cast<int>(taps.size());
  const int oh = in.height - n + 1, ow = in.width - n + 1;
  LumaPlane rows{in.height, ow, std::vector<double>(static_cast<std::size_t>(in.height) * ow)};
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += taps[k] * in.at(y, x + k);
      rows.values[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  LumaPlane out{oh, ow, std::vector<double>(static_cast<std::size_t>(oh) * ow)};
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += taps[k] * rows.at(y + k, x);
      out.values[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  return out;
}

LumaPlane product(const LumaPlane& a, const LumaPlane& b) {
  LumaPlane out{a.height, a.width, std::vector<double>(a.values.size())};
  for (std::size_t i = 0; i < a.values.size(); ++i) out.values[i] = a.values[i] * b.values[i];
  return out;
}

LumaPlane decimate(const LumaPlane& in) {
  const int oh = (in.height + 1) / 2, ow = (in.width + 1) / 2;
  LumaPlane out{oh, ow, std::vector<double>(static_cast<std::size_t>(oh) * ow)};
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) out.values[static_cast<std::size_t>(y) * ow + x] = in.at(2 * y, 2 * x);
  return out;
}

int vif_window(int scale, int scales) { return (1 << (scales - scale + 1)) + 1; }

}  // namespace

double psnr(const ImageU8& x, const ImageU8& y) {
  require_same_shape(x, y, "psnr");
  if (x.data.empty()) throw ShapeError("psnr: empty images");
  double sse = 0.0;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    const double d = static_cast<double>(x.data[i]) - y.data[i];
    sse += d * d;
  }
  if (sse == 0.0) return kPsnrCap;
  const double mse = sse / static_cast<double>(x.data.size());
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

LumaPlane luma(const ImageU8& rgb) {
  if (rgb.channels != 3 || rgb.colorspace != ColorSpace::RGB)
    throw PreconditionError("luma expects an RGB image");
  LumaPlane out{rgb.height, rgb.width, std::vector<double>(static_cast<std::size_t>(rgb.height) * rgb.width)};
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = 0.299 * rgb.data[3 * i] + 0.587 * rgb.data[3 * i + 1] + 0.114 * rgb.data[3 * i + 2];
  return out;
}

std::vector<double> gaussian_taps(int size, double sigma) {
  std::vector<double> taps(static_cast<std::size_t>(size));
  const double centre = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - centre;
    taps[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

double ssim(const ImageU8& x, const ImageU8& y, const SsimConstants& k) {
  require_same_shape(x, y, "ssim");
  if (x.height < k.window || x.width < k.window)
    throw ShapeError("ssim: image smaller than the " + std::to_string(k.window) + "px window");
  const LumaPlane lx = luma(x), ly = luma(y);
  const auto taps = gaussian_taps(k.window, k.sigma);
  const LumaPlane mx = filter_valid(lx, taps), my = filter_valid(ly, taps);
  const LumaPlane xx = filter_valid(product(lx, lx), taps);
  const LumaPlane yy = filter_valid(product(ly, ly), taps);
  const LumaPlane xy = filter_valid(product(lx, ly), taps);
  const double c1 = k.c1(), c2 = k.c2();
  double total = 0.0;
  for (std::size_t i = 0; i < mx.values.size(); ++i) {
    const double mux = mx.values[i], muy = my.values[i];
    const double vx = xx.values[i] - mux * mux;
    const double vy = yy.values[i] - muy * muy;
    const double cov = xy.values[i] - mux * muy;
    total += ((2.0 * mux * muy + c1) * (2.0 * cov + c2)) /
             ((mux * mux + muy * muy + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.values.size());
}

int vif_feasible_scales(int height, int width, const VifOptions& opts) {
  int h = height, w = width;
  for (int scale = 1; scale <= opts.scales; ++scale) {
    const int n = vif_window(scale, opts.scales);
    if (scale > 1) {
      // The previous scale's window low-passes before decimation.
      const int prev = vif_window(scale - 1, opts.scales);
      h = (h - prev + 1 + 1) / 2;
      w = (w - prev + 1 + 1) / 2;
    }
    if (h < n || w < n) return scale - 1;
  }
  return opts.scales;
}

double vif(const ImageU8& reference, const ImageU8& distorted, const VifOptions& opts) {
  require_same_shape(reference, distorted, "vif");
  const int usable = vif_feasible_scales(reference.height, reference.width, opts);
  if (usable == 0) throw ShapeError("vif: image too small for any pyramid scale");
  if (usable < opts.scales)
    log_warning("vif: image " + std::to_string(reference.height) + "x" +
                std::to_string(reference.width) + " supports only " + std::to_string(usable) +
                " of " + std::to_string(opts.scales) + " scales");

  constexpr double kTiny = 1e-10;
  LumaPlane ref = luma(reference), dist = luma(distorted);
  double num = 0.0, den = 0.0;
  for (int scale = 1; scale <= usable; ++scale) {
    const int n = vif_window(scale, opts.scales);
    if (scale > 1) {
      const auto prev_taps = gaussian_taps(vif_window(scale - 1, opts.scales), vif_window(scale - 1, opts.scales) / 5.0);
      ref = decimate(filter_valid(ref, prev_taps));
      dist = decimate(filter_valid(dist, prev_taps));
    }
    const auto taps = gaussian_taps(n, n / 5.0);
    const LumaPlane mu1 = filter_valid(ref, taps), mu2 = filter_valid(dist, taps);
    const LumaPlane s11 = filter_valid(product(ref, ref), taps);
    const LumaPlane s22 = filter_valid(product(dist, dist), taps);
    const LumaPlane s12 = filter_valid(product(ref, dist), taps);
    for (std::size_t i = 0; i < mu1.values.size(); ++i) {
      double var1 = std::max(0.0, s11.values[i] - mu1.values[i] * mu1.values[i]);
      double var2 = std::max(0.0, s22.values[i] - mu2.values[i] * mu2.values[i]);
      const double cov = s12.values[i] - mu1.values[i] * mu2.values[i];

      // Gain g and residual variance of the GSM channel dist = g * ref + v.
      double g = var1 < kTiny ? 0.0 : cov / var1;
      double sv = var2 - g * cov;
      if (var1 < kTiny) {
        sv = var2;
        var1 = 0.0;
      }
      if (var2 < kTiny) {
        g = 0.0;
        sv = 0.0;
      }
      if (g < 0.0) {
        sv = var2;
        g = 0.0;
      }
      sv = std::max(sv, 0.0);
      num += std::log10(1.0 + g * g * var1 / (sv + opts.noise_variance));
      den += std::log10(1.0 + var1 / opts.noise_variance);
    }
  }
  // A flat reference carries no information; identical flat images score 1.
  if (den == 0.0) return num == 0.0 && reference == distorted ? 1.0 : 0.0;
  return num / den;
}

}  // namespace jpr::metrics
