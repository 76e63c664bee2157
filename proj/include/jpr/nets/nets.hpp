#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "jpr/image.hpp"

namespace jpr::nets {

// Encoder plan of the generator; the last two levels sit at the bottleneck
// width that the hourglass blocks operate on.
struct GeneratorConfig {
  std::vector<std::int64_t> encoder_channels{64, 128, 256, 512, 1024, 1024};
  int hourglass_blocks = 4;
  // Off: the bottleneck is one plain U-Net level (down, up, no residual).
  bool hourglass = true;
  double dropout = 0.7;
  double leaky_slope = 0.2;

  // Divides every channel count (minimum 1); 1 is the full-size network.
  GeneratorConfig scaled(int width_divisor) const;
  nlohmann::json to_json() const;
  static GeneratorConfig from_json(const nlohmann::json& j);
};

struct DiscriminatorConfig {
  std::vector<std::int64_t> channels{64, 128, 256, 512};
  double leaky_slope = 0.2;

  DiscriminatorConfig scaled(int width_divisor) const;
  nlohmann::json to_json() const;
  static DiscriminatorConfig from_json(const nlohmann::json& j);
};

// Bernoulli dropout driven by an explicit generator; `rate` is the drop
// probability. Identity when `active` is false.
torch::Tensor dropout(const torch::Tensor& x, double rate, bool active, at::Generator& gen);

// 4x4 stride-2 conv down, 4x4 stride-2 transposed conv up, additive residual
// from the block input, then LeakyReLU. Shape preserving.
class HourglassBlockImpl : public torch::nn::Module {
 public:
  HourglassBlockImpl(std::int64_t channels, double leaky_slope, double dropout_rate);
  torch::Tensor forward(const torch::Tensor& x, bool dropout_on, at::Generator& gen);

  torch::nn::Conv2d down{nullptr};
  torch::nn::ConvTranspose2d up{nullptr};

 private:
  double slope_;
  double rate_;
};
TORCH_MODULE(HourglassBlock);

// Activations recorded by an instrumented forward pass.
struct ForwardTrace {
  std::vector<std::vector<std::int64_t>> stage_shapes;  // NCHW per stage
};

class GeneratorImpl : public torch::nn::Module {
 public:
  explicit GeneratorImpl(GeneratorConfig cfg = {});

  // x: [N,3,512,512] in [-1,1]. Returns [N,3,512,512] in (-1,1).
  // Encoder stage shapes land in trace->stage_shapes when trace is given.
  torch::Tensor forward(const torch::Tensor& x, bool dropout_on, at::Generator& gen,
                        ForwardTrace* trace = nullptr);

  const GeneratorConfig& config() const { return cfg_; }

  torch::nn::ModuleList encoder{nullptr};
  torch::nn::ModuleList hourglass{nullptr};
  // Plain innermost level used when the hourglass is disabled.
  torch::nn::Conv2d inner_down{nullptr};
  torch::nn::ConvTranspose2d inner_up{nullptr};
  torch::nn::ModuleList decoder{nullptr};

 private:
  GeneratorConfig cfg_;
};
TORCH_MODULE(Generator);

class DiscriminatorImpl : public torch::nn::Module {
 public:
  explicit DiscriminatorImpl(DiscriminatorConfig cfg = {});

  // Scores the channel concatenation of a reference and a candidate image,
  // both [N,3,512,512]. Returns per-patch probabilities [N,1,62,62].
  torch::Tensor forward(const torch::Tensor& reference, const torch::Tensor& candidate,
                        ForwardTrace* trace = nullptr);

  const DiscriminatorConfig& config() const { return cfg_; }

  torch::nn::ModuleList layers{nullptr};

 private:
  DiscriminatorConfig cfg_;
};
TORCH_MODULE(Discriminator);

// Weights ~ N(0, 0.02), biases 0, drawn from `gen`.
void init_weights(torch::nn::Module& module, at::Generator& gen);

struct Models {
  Generator generator;
  Discriminator discriminator;
};

Models init_params(std::uint64_t seed, const GeneratorConfig& g = {},
                   const DiscriminatorConfig& d = {});

// ImageF (HWC) <-> [1,C,H,W] float tensor.
torch::Tensor to_tensor(const ImageF& img);
ImageF to_image(const torch::Tensor& t, ValueRange range = ValueRange::Signed);

// Stable digest of all parameters in registration order.
std::uint64_t parameter_hash(const torch::nn::Module& module);

}  // namespace jpr::nets
