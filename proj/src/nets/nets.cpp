#include "jpr/nets/nets.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "jpr/error.hpp"

namespace jpr::nets {

namespace nn = torch::nn;
using nlohmann::json;

namespace {

std::vector<std::int64_t> divide(const std::vector<std::int64_t>& channels, int divisor) {
  if (divisor < 1) throw PreconditionError("width divisor must be >= 1");
  std::vector<std::int64_t> out;
  for (auto c : channels) out.push_back(std::max<std::int64_t>(1, c / divisor));
  return out;
}

nn::Conv2dOptions conv4(std::int64_t in, std::int64_t out, int stride) {
  return nn::Conv2dOptions(in, out, 4).stride(stride).padding(1);
}

nn::ConvTranspose2dOptions deconv4(std::int64_t in, std::int64_t out) {
  return nn::ConvTranspose2dOptions(in, out, 4).stride(2).padding(1);
}

std::string shape_string(const torch::Tensor& t) {
  std::ostringstream s;
  s << t.sizes();
  return s.str();
}

}  // namespace

GeneratorConfig GeneratorConfig::scaled(int width_divisor) const {
  GeneratorConfig c = *this;
  c.encoder_channels = divide(encoder_channels, width_divisor);
  return c;
}

json GeneratorConfig::to_json() const {
  return {{"encoder_channels", encoder_channels},
          {"hourglass_blocks", hourglass_blocks},
          {"hourglass", hourglass},
          {"dropout", dropout},
          {"leaky_slope", leaky_slope},
          {"kernel", 4},
          {"stride", 2}};
}

GeneratorConfig GeneratorConfig::from_json(const json& j) {
  GeneratorConfig c;
  c.encoder_channels = j.at("encoder_channels").get<std::vector<std::int64_t>>();
  c.hourglass_blocks = j.at("hourglass_blocks").get<int>();
  c.hourglass = j.at("hourglass").get<bool>();
  c.dropout = j.at("dropout").get<double>();
  c.leaky_slope = j.at("leaky_slope").get<double>();
  if (c.encoder_channels.size() != 6) throw ParseError("generator needs six encoder stages");
  return c;
}

DiscriminatorConfig DiscriminatorConfig::scaled(int width_divisor) const {
  DiscriminatorConfig c = *this;
  c.channels = divide(channels, width_divisor);
  return c;
}

json DiscriminatorConfig::to_json() const {
  return {{"channels", channels}, {"leaky_slope", leaky_slope}, {"kernel", 4},
          {"strides", {2, 2, 2, 1, 1}}, {"padding", 1}};
}

DiscriminatorConfig DiscriminatorConfig::from_json(const json& j) {
  DiscriminatorConfig c;
  c.channels = j.at("channels").get<std::vector<std::int64_t>>();
  c.leaky_slope = j.at("leaky_slope").get<double>();
  if (c.channels.size() != 4) throw ParseError("discriminator needs four hidden stages");
  return c;
}

torch::Tensor dropout(const torch::Tensor& x, double rate, bool active, at::Generator& gen) {
  if (!active || rate <= 0.0) return x;
  if (rate >= 1.0) return torch::zeros_like(x);
  const double keep = 1.0 - rate;
  auto mask = torch::empty_like(x).bernoulli_(keep, gen);
  return x * mask / keep;
}

HourglassBlockImpl::HourglassBlockImpl(std::int64_t channels, double leaky_slope, double dropout_rate)
    : slope_(leaky_slope), rate_(dropout_rate) {
  down = register_module("down", nn::Conv2d(conv4(channels, channels, 2)));
  up = register_module("up", nn::ConvTranspose2d(deconv4(channels, channels)));
}

torch::Tensor HourglassBlockImpl::forward(const torch::Tensor& x, bool dropout_on, at::Generator& gen) {
  auto h = torch::leaky_relu(down->forward(x), slope_);
  h = dropout(up->forward(h), rate_, dropout_on, gen);
  return torch::leaky_relu(h + x, slope_);
}

GeneratorImpl::GeneratorImpl(GeneratorConfig cfg) : cfg_(std::move(cfg)) {
  const auto& ch = cfg_.encoder_channels;
  if (ch.size() != 6) throw PreconditionError("generator needs six encoder stages");
  encoder = register_module("encoder", nn::ModuleList());
  std::int64_t prev = 3;
  for (auto c : ch) {
    encoder->push_back(nn::Conv2d(conv4(prev, c, 2)));
    prev = c;
  }
  const std::int64_t bottleneck = ch.back();
  hourglass = register_module("hourglass", nn::ModuleList());
  if (cfg_.hourglass) {
    for (int i = 0; i < cfg_.hourglass_blocks; ++i)
      hourglass->push_back(HourglassBlock(bottleneck, cfg_.leaky_slope, cfg_.dropout));
  } else {
    inner_down = register_module("inner_down", nn::Conv2d(conv4(bottleneck, bottleneck, 2)));
    inner_up = register_module("inner_up", nn::ConvTranspose2d(deconv4(bottleneck, bottleneck)));
  }
  // Decoder stage k consumes concat(previous, encoder stage 7-k).
  decoder = register_module("decoder", nn::ModuleList());
  const std::vector<std::int64_t> outs = {ch[4], ch[3], ch[2], ch[1], ch[0], 3};
  prev = bottleneck;
  for (std::size_t k = 0; k < outs.size(); ++k) {
    decoder->push_back(nn::ConvTranspose2d(deconv4(prev + ch[5 - k], outs[k])));
    prev = outs[k];
  }
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& x, bool dropout_on, at::Generator& gen,
                                     ForwardTrace* trace) {
  if (x.dim() != 4 || x.size(1) != 3 || x.size(2) % 128 != 0 || x.size(3) % 128 != 0 ||
      x.size(2) == 0 || x.size(3) == 0)
    throw ShapeError("generator expects input of shape (512,512,3) (NCHW [N,3,512,512]), got " +
                     shape_string(x));
  const double slope = cfg_.leaky_slope;
  std::vector<torch::Tensor> skips;
  auto h = x;
  for (const auto& stage : *encoder) {
    h = torch::leaky_relu(stage->as<nn::Conv2d>()->forward(h), slope);
    skips.push_back(h);
    if (trace) trace->stage_shapes.push_back(h.sizes().vec());
  }
  if (cfg_.hourglass) {
    for (const auto& block : *hourglass) {
      h = block->as<HourglassBlock>()->forward(h, dropout_on, gen);
      if (trace) trace->stage_shapes.push_back(h.sizes().vec());
    }
  } else {
    auto inner = torch::leaky_relu(inner_down->forward(h), slope);
    h = torch::leaky_relu(inner_up->forward(inner), slope);
    if (trace) trace->stage_shapes.push_back(h.sizes().vec());
  }
  const std::size_t last = decoder->size() - 1;
  for (std::size_t k = 0; k <= last; ++k) {
    h = decoder[k]->as<nn::ConvTranspose2d>()->forward(torch::cat({h, skips[5 - k]}, 1));
    h = k == last ? torch::tanh(h) : torch::leaky_relu(h, slope);
    if (trace) trace->stage_shapes.push_back(h.sizes().vec());
  }
  return h;
}

DiscriminatorImpl::DiscriminatorImpl(DiscriminatorConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.channels.size() != 4) throw PreconditionError("discriminator needs four hidden stages");
  const auto& c = cfg_.channels;
  layers = register_module("layers", nn::ModuleList());
  layers->push_back(nn::Conv2d(conv4(6, c[0], 2)));
  layers->push_back(nn::Conv2d(conv4(c[0], c[1], 2)));
  layers->push_back(nn::Conv2d(conv4(c[1], c[2], 2)));
  layers->push_back(nn::Conv2d(conv4(c[2], c[3], 1)));
  layers->push_back(nn::Conv2d(conv4(c[3], 1, 1)));
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& reference, const torch::Tensor& candidate,
                                         ForwardTrace* trace) {
  if (!reference.sizes().equals(candidate.sizes()))
    throw ShapeError("discriminator inputs differ in shape: " + shape_string(reference) + " vs " +
                     shape_string(candidate));
  if (reference.dim() != 4 || reference.size(1) != 3)
    throw ShapeError("discriminator expects [N,3,H,W] inputs, got " + shape_string(reference));
  auto h = torch::cat({reference, candidate}, 1);
  const std::size_t last = layers->size() - 1;
  for (std::size_t k = 0; k <= last; ++k) {
    h = layers[k]->as<nn::Conv2d>()->forward(h);
    h = k == last ? torch::sigmoid(h) : torch::leaky_relu(h, cfg_.leaky_slope);
    if (trace) trace->stage_shapes.push_back(h.sizes().vec());
  }
  return h;
}

void init_weights(nn::Module& module, at::Generator& gen) {
  torch::NoGradGuard no_grad;
  for (auto& p : module.named_parameters()) {
    const auto& name = p.key();
    if (name.size() >= 4 && name.compare(name.size() - 4, 4, "bias") == 0)
      p.value().zero_();
    else
      p.value().normal_(0.0, 0.02, gen);
  }
}

Models init_params(std::uint64_t seed, const GeneratorConfig& g, const DiscriminatorConfig& d) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  Models m{Generator(g), Discriminator(d)};
  init_weights(*m.generator, gen);
  init_weights(*m.discriminator, gen);
  return m;
}

torch::Tensor to_tensor(const ImageF& img) {
  auto t = torch::from_blob(const_cast<float*>(img.data.data()), {img.height, img.width, img.channels},
                            torch::kFloat32);
  return t.permute({2, 0, 1}).unsqueeze(0).contiguous().clone();
}

ImageF to_image(const torch::Tensor& t, ValueRange range) {
  if (t.dim() != 4 || t.size(0) != 1) throw ShapeError("to_image expects a [1,C,H,W] tensor");
  auto hwc = t.detach().to(torch::kFloat32).squeeze(0).permute({1, 2, 0}).contiguous();
  ImageF img(static_cast<int>(hwc.size(0)), static_cast<int>(hwc.size(1)),
             static_cast<int>(hwc.size(2)), ColorSpace::RGB, range);
  std::memcpy(img.data.data(), hwc.data_ptr<float>(), img.data.size() * sizeof(float));
  return img;
}

std::uint64_t parameter_hash(const nn::Module& module) {
  // FNV-1a over names, shapes and raw parameter bytes.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& p : module.named_parameters()) {
    mix(p.key().data(), p.key().size());
    auto t = p.value().detach().contiguous();
    for (auto s : t.sizes()) mix(&s, sizeof s);
    mix(t.data_ptr(), t.numel() * t.element_size());
  }
  return h;
}

}  // namespace jpr::nets
