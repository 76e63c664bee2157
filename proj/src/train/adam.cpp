#include "jpr/train/adam.hpp"

#include <cmath>

namespace jpr::train {

Adam::Adam(std::vector<torch::Tensor> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (const auto& p : params_) {
    m_.push_back(torch::zeros_like(p));
    v_.push_back(torch::zeros_like(p));
  }
}

void Adam::step() {
  torch::NoGradGuard no_grad;
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(options_.beta1, t);
  const double c2 = 1.0 - std::pow(options_.beta2, t);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    const auto& g = p.grad();
    if (!g.defined()) continue;
    m_[i].mul_(options_.beta1).add_(g, 1.0 - options_.beta1);
    v_[i].mul_(options_.beta2).addcmul_(g, g, 1.0 - options_.beta2);
    auto denom = (v_[i] / c2).sqrt_().add_(options_.eps);
    p.addcdiv_(m_[i], denom, -options_.lr / c1);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) {
    auto& g = p.mutable_grad();
    if (g.defined()) g.zero_();
  }
}

}  // namespace jpr::train
