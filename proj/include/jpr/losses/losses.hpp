#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

namespace jpr::losses {

enum class AdvLossVariant { Logless, Log };

std::string to_string(AdvLossVariant v);
AdvLossVariant parse_adv_loss_variant(const std::string& s);

// Discriminator objective on patch maps in (0,1).
// Logless: mean(d_fake) - mean(d_real), in (-1,1).
// Log: mean(log d_fake) - mean(log d_real) as printed in the original form.
torch::Tensor adv_loss_d(const torch::Tensor& d_real, const torch::Tensor& d_fake,
                         AdvLossVariant variant = AdvLossVariant::Logless);

// Generator objective. Logless: mean(1 - d_fake). Log: mean(log(1 - d_fake)).
torch::Tensor adv_loss_g(const torch::Tensor& d_fake,
                         AdvLossVariant variant = AdvLossVariant::Logless);

// Mean absolute pixel difference.
torch::Tensor lf_loss(const torch::Tensor& x, const torch::Tensor& g);

struct LossWeights {
  double adv = 1.0;
  double lf = 20.0;
  double hf = 0.1;

  void validate() const;
  nlohmann::json to_json() const;
  static LossWeights from_json(const nlohmann::json& j);
};

double total_loss(const LossWeights& w, double adv_g, double lf, double hf);
torch::Tensor total_loss(const LossWeights& w, const torch::Tensor& adv_g, const torch::Tensor& lf,
                         const torch::Tensor& hf);

// Frozen VGG-16 trunk ending at conv4_1 (post-ReLU). The default plan is the
// real network; smaller plans give an offline stand-in with the same layout.
struct FeatureExtractorConfig {
  // Conv widths of blocks 1..3 (2, 2 and 3 convs) and of conv4_1.
  std::vector<std::int64_t> channels{64, 64, 128, 128, 256, 256, 256, 512};
  // Model-range images are mapped to [0,1] then normalised per RGB channel.
  std::vector<double> mean{0.485, 0.456, 0.406};
  std::vector<double> stddev{0.229, 0.224, 0.225};

  static FeatureExtractorConfig stand_in(int width_divisor);
  nlohmann::json to_json() const;
};

class FeatureExtractorImpl : public torch::nn::Module {
 public:
  explicit FeatureExtractorImpl(FeatureExtractorConfig cfg = {});

  // Loads weights from a tensor archive whose entries follow torchvision's
  // "features.<index>.weight|bias" naming. Throws IoError / ParseError.
  void load_weights(const std::filesystem::path& path);
  // Random He-normal weights for offline runs.
  void randomize(std::uint64_t seed);

  // x: [N,3,H,W] in [-1,1] -> conv4_1 features [N,C,H/8,W/8].
  torch::Tensor forward(const torch::Tensor& x);

  const FeatureExtractorConfig& config() const { return cfg_; }
  bool loaded() const { return loaded_; }

  torch::nn::ModuleList convs{nullptr};

 private:
  FeatureExtractorConfig cfg_;
  torch::Tensor mean_, std_;
  bool loaded_ = false;
};
TORCH_MODULE(FeatureExtractor);

// Index of each conv inside torchvision's vgg16().features.
inline constexpr int kVggFeatureIndex[8] = {0, 2, 5, 7, 10, 12, 14, 17};

// Mean squared difference of conv4_1 features. The extractor must hold
// weights; no gradient reaches its parameters.
torch::Tensor hf_loss(FeatureExtractor& fe, const torch::Tensor& x, const torch::Tensor& g);

}  // namespace jpr::losses
