#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "jpr/codec/jpeg.hpp"
#include "jpr/dataset/dataset.hpp"
#include "jpr/losses/losses.hpp"
#include "jpr/nets/nets.hpp"
#include "jpr/train/adam.hpp"

namespace jpr::train {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 10;
  double lr = 1e-5;
  double beta1 = 0.5;
  double beta2 = 0.999;
  // The discriminator is updated while epoch <= d_stop_epoch (1-based).
  int d_stop_epoch = 10;
  losses::LossWeights weights;
  double dropout_rate = 0.7;
  std::uint64_t seed = 0;
  int quality = codec::kMaxCompressionQuality;
  losses::AdvLossVariant adv_loss = losses::AdvLossVariant::Logless;
  bool hourglass = true;
  bool hf_loss = true;
  // Keep lambda_adv * L_adv(G) against the frozen discriminator after d_stop.
  bool adv_after_d_stop = true;
  // Channel divisor for generator and discriminator (1 = full size).
  int width_divisor = 1;
  // Empty: random stand-in extractor of the given divisor.
  std::string vgg_weights;
  int stand_in_divisor = 8;
  bool evaluate_each_epoch = true;

  void validate() const;
  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static TrainConfig from_json(const nlohmann::json& j);

  nets::GeneratorConfig generator_config() const;
  nets::DiscriminatorConfig discriminator_config() const;
  bool needs_extractor() const { return hf_loss && weights.hf > 0.0; }
};

// Iterations in one epoch: ceil(n / batch_size).
std::int64_t iterations_per_epoch(std::size_t n_train, int batch_size);

struct StepMetrics {
  std::int64_t iteration = 0;
  int epoch = 0;
  double adv_d = 0.0;
  double adv_g = 0.0;
  double lf = 0.0;
  double hf = 0.0;
  double total = 0.0;
  bool d_updated = false;

  nlohmann::json to_json() const;
  static StepMetrics from_json(const nlohmann::json& j);
  friend bool operator==(const StepMetrics&, const StepMetrics&) = default;
};

struct EpochMetrics {
  int epoch = 0;
  double test_psnr = 0.0;
  double test_ssim = 0.0;
  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct TrainState {
  nets::Generator generator{nullptr};
  nets::Discriminator discriminator{nullptr};
  Adam gen_opt;
  Adam disc_opt;
  int epoch = 1;                // epoch the next step belongs to
  std::int64_t iteration = 0;   // completed steps
  at::Generator rng;            // dropout stream
  std::vector<StepMetrics> history;
  std::vector<EpochMetrics> evaluations;
  double best_psnr = -1.0;
};

// Fresh state: parameters from init_params(seed), zeroed optimizer moments.
TrainState make_state(const TrainConfig& cfg);

// Extractor for HF loss per cfg (pretrained weights or seeded stand-in).
// Returns an empty holder when the configuration does not use HF loss.
losses::FeatureExtractor make_extractor(const TrainConfig& cfg);

class NonFiniteLossError : public Error {
 public:
  NonFiniteLossError(const std::string& what, StepMetrics metrics)
      : Error(what), metrics_(metrics) {}
  const StepMetrics& metrics() const { return metrics_; }

 private:
  StepMetrics metrics_;
};

// Model-range 512x512 tensors for a batch: originals and compressed inputs.
struct BatchTensors {
  torch::Tensor original;    // x upsampled, [B,3,512,512]
  torch::Tensor compressed;  // C(x) upsampled, [B,3,512,512]
};
BatchTensors prepare_batch(std::span<const dataset::PairedSample> batch);
BatchTensors prepare_batch(std::span<const dataset::PairedSample* const> batch);

// One optimisation step at state.epoch: discriminator first (while it is
// still trained), then the generator on the weighted total loss.
StepMetrics train_step(TrainState& state, const BatchTensors& batch, const TrainConfig& cfg,
                       losses::FeatureExtractor extractor);

struct TrainOptions {
  std::filesystem::path checkpoint_dir;  // empty: no checkpoints
  bool resume = false;                   // continue from checkpoint_dir/latest
  std::function<void(const StepMetrics&)> on_step;
  std::function<void(const EpochMetrics&)> on_epoch;
};

// Runs epochs state.epoch..cfg.epochs over split.train, evaluating on
// split.test after each epoch and writing ckpt files when configured.
TrainState train(const dataset::DatasetSplit& split, const TrainConfig& cfg,
                 const TrainOptions& options = {});
void train(TrainState& state, const dataset::DatasetSplit& split, const TrainConfig& cfg,
           losses::FeatureExtractor extractor, const TrainOptions& options = {});

// Upsample -> generator (no dropout) -> downsample -> [0,255].
ImageU8 restore(nets::Generator& generator, const ImageU8& compressed);

inline constexpr const char* kCheckpointFormat = "jpr-train-state/1";

struct Checkpoint {
  TrainConfig config;
  TrainState state;
};

void save_checkpoint(const TrainState& state, const TrainConfig& cfg, const std::filesystem::path& path);
// Throws ParseError on any corruption; never returns a partial state.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::filesystem::path epoch_checkpoint_path(const std::filesystem::path& dir, int epoch);
std::filesystem::path best_checkpoint_path(const std::filesystem::path& dir);
// Highest epoch_NNN.ckpt in dir, if any.
std::optional<std::filesystem::path> latest_checkpoint(const std::filesystem::path& dir);

}  // namespace jpr::train
