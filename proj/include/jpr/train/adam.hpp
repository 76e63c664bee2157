#pragma once

#include <cstdint>
#include <vector>

#include <torch/torch.h>

namespace jpr::train {

struct AdamOptions {
  double lr = 1e-5;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
//   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
// Parameters without a gradient are left untouched.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<torch::Tensor> params, AdamOptions options);

  void step();
  void zero_grad();

  const AdamOptions& options() const { return options_; }
  std::int64_t steps() const { return steps_; }
  void set_steps(std::int64_t t) { steps_ = t; }
  const std::vector<torch::Tensor>& params() const { return params_; }
  std::vector<torch::Tensor>& first_moments() { return m_; }
  std::vector<torch::Tensor>& second_moments() { return v_; }
  const std::vector<torch::Tensor>& first_moments() const { return m_; }
  const std::vector<torch::Tensor>& second_moments() const { return v_; }

 private:
  std::vector<torch::Tensor> params_;
  std::vector<torch::Tensor> m_;
  std::vector<torch::Tensor> v_;
  AdamOptions options_;
  std::int64_t steps_ = 0;
};

}  // namespace jpr::train
