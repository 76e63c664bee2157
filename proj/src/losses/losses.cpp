#include "jpr/losses/losses.hpp"

#include <cmath>

#include "jpr/error.hpp"
#include "jpr/serialize/archive.hpp"

namespace jpr::losses {

namespace nn = torch::nn;
using nlohmann::json;

namespace {

// Keeps the printed log variant finite at saturated scores.
constexpr double kLogFloor = 1e-8;

void require_same(const torch::Tensor& a, const torch::Tensor& b, const char* op) {
  if (!a.sizes().equals(b.sizes()))
    throw ShapeError(std::string(op) + ": argument shapes differ");
}

}  // namespace

std::string to_string(AdvLossVariant v) { return v == AdvLossVariant::Log ? "log" : "logless"; }

AdvLossVariant parse_adv_loss_variant(const std::string& s) {
  if (s == "logless") return AdvLossVariant::Logless;
  if (s == "log") return AdvLossVariant::Log;
  throw PreconditionError("adv loss variant must be 'log' or 'logless', got '" + s + "'");
}

torch::Tensor adv_loss_d(const torch::Tensor& d_real, const torch::Tensor& d_fake, AdvLossVariant variant) {
  require_same(d_real, d_fake, "adv_loss_d");
  if (variant == AdvLossVariant::Log)
    return torch::log(d_fake.clamp_min(kLogFloor)).mean() - torch::log(d_real.clamp_min(kLogFloor)).mean();
  return d_fake.mean() - d_real.mean();
}

torch::Tensor adv_loss_g(const torch::Tensor& d_fake, AdvLossVariant variant) {
  if (variant == AdvLossVariant::Log) return torch::log((1.0 - d_fake).clamp_min(kLogFloor)).mean();
  return (1.0 - d_fake).mean();
}

torch::Tensor lf_loss(const torch::Tensor& x, const torch::Tensor& g) {
  require_same(x, g, "lf_loss");
  return (x - g).abs().mean();
}

void LossWeights::validate() const {
  if (adv < 0 || lf < 0 || hf < 0) throw PreconditionError("loss weights must be non-negative");
}

json LossWeights::to_json() const { return {{"adv", adv}, {"lf", lf}, {"hf", hf}}; }

LossWeights LossWeights::from_json(const json& j) {
  return {j.at("adv").get<double>(), j.at("lf").get<double>(), j.at("hf").get<double>()};
}

double total_loss(const LossWeights& w, double adv_g, double lf, double hf) {
  return w.adv * adv_g + w.lf * lf + w.hf * hf;
}

torch::Tensor total_loss(const LossWeights& w, const torch::Tensor& adv_g, const torch::Tensor& lf,
                         const torch::Tensor& hf) {
  return w.adv * adv_g + w.lf * lf + w.hf * hf;
}

FeatureExtractorConfig FeatureExtractorConfig::stand_in(int width_divisor) {
  FeatureExtractorConfig c;
  if (width_divisor < 1) throw PreconditionError("width divisor must be >= 1");
  for (auto& ch : c.channels) ch = std::max<std::int64_t>(1, ch / width_divisor);
  return c;
}

json FeatureExtractorConfig::to_json() const {
  return {{"network", "vgg16"},
          {"layer", "conv4_1"},
          {"activation", "post-relu"},
          {"channels", channels},
          {"input", "model range [-1,1] -> [0,1] -> (v - mean) / std, RGB order"},
          {"mean", mean},
          {"std", stddev}};
}

FeatureExtractorImpl::FeatureExtractorImpl(FeatureExtractorConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.channels.size() != 8) throw PreconditionError("feature extractor needs eight conv widths");
  convs = register_module("convs", nn::ModuleList());
  std::int64_t prev = 3;
  for (auto c : cfg_.channels) {
    convs->push_back(nn::Conv2d(nn::Conv2dOptions(prev, c, 3).padding(1)));
    prev = c;
  }
  for (auto& p : parameters()) p.set_requires_grad(false);
  mean_ = register_buffer("mean", torch::tensor(cfg_.mean, torch::kFloat32).view({1, 3, 1, 1}));
  std_ = register_buffer("std", torch::tensor(cfg_.stddev, torch::kFloat32).view({1, 3, 1, 1}));
}

void FeatureExtractorImpl::load_weights(const std::filesystem::path& path) {
  const auto archive = serialize::read_archive(path);
  torch::NoGradGuard no_grad;
  for (std::size_t k = 0; k < convs->size(); ++k) {
    auto conv = convs[k]->as<nn::Conv2d>();
    const std::string prefix = "features." + std::to_string(kVggFeatureIndex[k]) + ".";
    const std::pair<const char*, torch::Tensor*> entries[] = {{"weight", &conv->weight},
                                                               {"bias", &conv->bias}};
    for (const auto& [name, target] : entries) {
      const auto& src = archive.tensor(prefix + name);
      if (!src.sizes().equals(target->sizes()))
        throw ParseError(path.string() + ": " + prefix + name + " has an unexpected shape");
      target->copy_(src.to(torch::kFloat32));
    }
  }
  loaded_ = true;
}

void FeatureExtractorImpl::randomize(std::uint64_t seed) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  torch::NoGradGuard no_grad;
  // He-normal keeps activations near unit scale through the ReLU stack.
  for (auto& p : named_parameters()) {
    auto& t = p.value();
    if (p.key().ends_with("bias"))
      t.zero_();
    else
      t.normal_(0.0, std::sqrt(2.0 / static_cast<double>(t.size(1) * t.size(2) * t.size(3))), gen);
  }
  loaded_ = true;
}

torch::Tensor FeatureExtractorImpl::forward(const torch::Tensor& x) {
  auto h = ((x + 1.0) * 0.5 - mean_) / std_;
  // Max-pool after convs 2, 4 and 7 (end of blocks 1-3).
  for (std::size_t k = 0; k < convs->size(); ++k) {
    h = torch::relu(convs[k]->as<nn::Conv2d>()->forward(h));
    if (k == 1 || k == 3 || k == 6) h = torch::max_pool2d(h, 2, 2);
  }
  return h;
}

torch::Tensor hf_loss(FeatureExtractor& fe, const torch::Tensor& x, const torch::Tensor& g) {
  require_same(x, g, "hf_loss");
  if (!fe->loaded()) throw Error("hf_loss: feature extractor weights are not loaded");
  torch::Tensor fx;
  {
    torch::NoGradGuard no_grad;
    fx = fe->forward(x);
  }
  return (fx - fe->forward(g)).pow(2).mean();
}

}  // namespace jpr::losses
