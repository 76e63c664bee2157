#include "jpr/train/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "jpr/log.hpp"
#include "jpr/metrics/metrics.hpp"
#include "jpr/serialize/archive.hpp"

namespace jpr::train {

using nlohmann::json;

namespace {

// Disables gradient tracking on a module's parameters for a scope.
class FreezeGuard {
 public:
  explicit FreezeGuard(torch::nn::Module& m) : params_(m.parameters()) {
    for (auto& p : params_) p.set_requires_grad(false);
  }
  ~FreezeGuard() {
    for (auto& p : params_) p.set_requires_grad(true);
  }
  FreezeGuard(const FreezeGuard&) = delete;
  FreezeGuard& operator=(const FreezeGuard&) = delete;

 private:
  std::vector<torch::Tensor> params_;
};

torch::Tensor stack_model_range(std::span<const ImageU8* const> images) {
  std::vector<torch::Tensor> parts;
  parts.reserve(images.size());
  for (const ImageU8* img : images)
    parts.push_back(nets::to_tensor(dataset::to_model_range(dataset::upsample_bilinear(to_float(*img)))));
  return torch::cat(parts, 0);
}

AdamOptions adam_options(const TrainConfig& cfg) { return {cfg.lr, cfg.beta1, cfg.beta2, 1e-8}; }

std::string describe(const StepMetrics& m) {
  std::ostringstream s;
  s << m.to_json().dump();
  return s.str();
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw PreconditionError("epochs must be >= 1");
  if (batch_size < 1) throw PreconditionError("batch_size must be >= 1");
  if (d_stop_epoch > epochs) throw PreconditionError("d_stop_epoch must not exceed epochs");
  if (!(lr > 0.0)) throw PreconditionError("lr must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw PreconditionError("Adam betas must be in [0,1)");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw PreconditionError("dropout_rate must be in [0,1)");
  if (width_divisor < 1 || stand_in_divisor < 1) throw PreconditionError("width divisors must be >= 1");
  weights.validate();
  (void)codec::scale_quant_tables(quality);
}

json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"lr", lr},
          {"beta1", beta1},
          {"beta2", beta2},
          {"d_stop_epoch", d_stop_epoch},
          {"lambda_adv", weights.adv},
          {"lambda_lf", weights.lf},
          {"lambda_hf", weights.hf},
          {"dropout_rate", dropout_rate},
          {"seed", seed},
          {"quality", quality},
          {"adv_loss", losses::to_string(adv_loss)},
          {"hourglass", hourglass},
          {"hf_loss", hf_loss},
          {"adv_after_d_stop", adv_after_d_stop},
          {"width_divisor", width_divisor},
          {"vgg_weights", vgg_weights},
          {"stand_in_divisor", stand_in_divisor},
          {"evaluate_each_epoch", evaluate_each_epoch}};
}

TrainConfig TrainConfig::from_json(const json& j) {
  if (!j.is_object()) throw ParseError("train config must be a JSON object");
  TrainConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "lr") c.lr = value.get<double>();
      else if (key == "beta1") c.beta1 = value.get<double>();
      else if (key == "beta2") c.beta2 = value.get<double>();
      else if (key == "d_stop_epoch") c.d_stop_epoch = value.get<int>();
      else if (key == "lambda_adv") c.weights.adv = value.get<double>();
      else if (key == "lambda_lf") c.weights.lf = value.get<double>();
      else if (key == "lambda_hf") c.weights.hf = value.get<double>();
      else if (key == "dropout_rate") c.dropout_rate = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "quality") c.quality = value.get<int>();
      else if (key == "adv_loss") c.adv_loss = losses::parse_adv_loss_variant(value.get<std::string>());
      else if (key == "hourglass") c.hourglass = value.get<bool>();
      else if (key == "hf_loss") c.hf_loss = value.get<bool>();
      else if (key == "adv_after_d_stop") c.adv_after_d_stop = value.get<bool>();
      else if (key == "width_divisor") c.width_divisor = value.get<int>();
      else if (key == "vgg_weights") c.vgg_weights = value.get<std::string>();
      else if (key == "stand_in_divisor") c.stand_in_divisor = value.get<int>();
      else if (key == "evaluate_each_epoch") c.evaluate_each_epoch = value.get<bool>();
      else throw ParseError("unknown train config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  return c;
}

nets::GeneratorConfig TrainConfig::generator_config() const {
  nets::GeneratorConfig g;
  g.hourglass = hourglass;
  g.dropout = dropout_rate;
  return g.scaled(width_divisor);
}

nets::DiscriminatorConfig TrainConfig::discriminator_config() const {
  return nets::DiscriminatorConfig{}.scaled(width_divisor);
}

std::int64_t iterations_per_epoch(std::size_t n_train, int batch_size) {
  if (batch_size < 1) throw PreconditionError("batch_size must be >= 1");
  return static_cast<std::int64_t>((n_train + batch_size - 1) / batch_size);
}

json StepMetrics::to_json() const {
  return {{"iteration", iteration}, {"epoch", epoch}, {"adv_d", adv_d}, {"adv_g", adv_g},
          {"lf", lf}, {"hf", hf}, {"total", total}, {"d_updated", d_updated}};
}

StepMetrics StepMetrics::from_json(const json& j) {
  StepMetrics m;
  m.iteration = j.at("iteration").get<std::int64_t>();
  m.epoch = j.at("epoch").get<int>();
  m.adv_d = j.at("adv_d").get<double>();
  m.adv_g = j.at("adv_g").get<double>();
  m.lf = j.at("lf").get<double>();
  m.hf = j.at("hf").get<double>();
  m.total = j.at("total").get<double>();
  m.d_updated = j.at("d_updated").get<bool>();
  return m;
}

TrainState make_state(const TrainConfig& cfg) {
  cfg.validate();
  auto models = nets::init_params(cfg.seed, cfg.generator_config(), cfg.discriminator_config());
  TrainState s;
  s.generator = models.generator;
  s.discriminator = models.discriminator;
  s.gen_opt = Adam(s.generator->parameters(), adam_options(cfg));
  s.disc_opt = Adam(s.discriminator->parameters(), adam_options(cfg));
  // Offset keeps the dropout stream distinct from the init stream.
  s.rng = at::make_generator<at::CPUGeneratorImpl>(cfg.seed + 0x5EED);
  return s;
}

losses::FeatureExtractor make_extractor(const TrainConfig& cfg) {
  if (!cfg.needs_extractor()) return losses::FeatureExtractor(nullptr);
  if (!cfg.vgg_weights.empty()) {
    losses::FeatureExtractor fe(losses::FeatureExtractorConfig{});
    fe->load_weights(cfg.vgg_weights);
    return fe;
  }
  losses::FeatureExtractor fe(losses::FeatureExtractorConfig::stand_in(cfg.stand_in_divisor));
  fe->randomize(cfg.seed + 0xFEA7);
  return fe;
}

BatchTensors prepare_batch(std::span<const dataset::PairedSample* const> batch) {
  if (batch.empty()) throw PreconditionError("empty batch");
  std::vector<const ImageU8*> originals, compressed;
  for (const auto* s : batch) {
    if (!s->original.same_shape(s->compressed))
      throw ShapeError("pair " + s->source_id + ": original and compressed sizes differ");
    originals.push_back(&s->original);
    compressed.push_back(&s->compressed);
  }
  return {stack_model_range(originals), stack_model_range(compressed)};
}

BatchTensors prepare_batch(std::span<const dataset::PairedSample> batch) {
  std::vector<const dataset::PairedSample*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  return prepare_batch(std::span<const dataset::PairedSample* const>(ptrs));
}

StepMetrics train_step(TrainState& state, const BatchTensors& batch, const TrainConfig& cfg,
                       losses::FeatureExtractor extractor) {
  const bool use_hf = cfg.needs_extractor();
  if (use_hf && !extractor) throw PreconditionError("train_step: HF loss enabled but no extractor given");
  state.generator->train();
  state.discriminator->train();

  StepMetrics m;
  m.epoch = state.epoch;
  m.iteration = state.iteration + 1;
  m.d_updated = state.epoch <= cfg.d_stop_epoch;

  const auto& x = batch.original;
  auto g = state.generator->forward(batch.compressed, /*dropout_on=*/true, state.rng);

  if (m.d_updated) {
    auto d_real = state.discriminator->forward(x, x);
    auto d_fake = state.discriminator->forward(x, g.detach());
    auto loss_d = losses::adv_loss_d(d_real, d_fake, cfg.adv_loss);
    m.adv_d = loss_d.item<double>();
    if (!std::isfinite(m.adv_d)) throw NonFiniteLossError("non-finite discriminator loss: " + describe(m), m);
    state.disc_opt.zero_grad();
    loss_d.backward();
    state.disc_opt.step();
  }

  FreezeGuard frozen(*state.discriminator);
  auto d_fake = state.discriminator->forward(x, g);
  if (!m.d_updated) {
    torch::NoGradGuard no_grad;
    m.adv_d = losses::adv_loss_d(state.discriminator->forward(x, x), d_fake.detach(), cfg.adv_loss).item<double>();
  }
  auto adv_g = losses::adv_loss_g(d_fake, cfg.adv_loss);
  auto lf = losses::lf_loss(x, g);
  auto hf = use_hf ? losses::hf_loss(extractor, x, g) : torch::zeros({}, g.options());
  losses::LossWeights w = cfg.weights;
  if (!cfg.hf_loss) w.hf = 0.0;
  if (!m.d_updated && !cfg.adv_after_d_stop) w.adv = 0.0;
  auto total = losses::total_loss(w, adv_g, lf, hf);

  m.adv_g = adv_g.item<double>();
  m.lf = lf.item<double>();
  m.hf = hf.item<double>();
  m.total = total.item<double>();
  for (double v : {m.adv_g, m.lf, m.hf, m.total})
    if (!std::isfinite(v)) throw NonFiniteLossError("non-finite generator loss: " + describe(m), m);

  state.gen_opt.zero_grad();
  total.backward();
  state.gen_opt.step();

  state.iteration = m.iteration;
  state.history.push_back(m);
  return m;
}

ImageU8 restore(nets::Generator& generator, const ImageU8& compressed) {
  if (compressed.height != dataset::kSourceSize || compressed.width != dataset::kSourceSize ||
      compressed.channels != 3)
    throw ShapeError("restore expects a 128x128x3 image");
  torch::NoGradGuard no_grad;
  generator->eval();
  auto unused = at::make_generator<at::CPUGeneratorImpl>(0);
  const auto input = nets::to_tensor(dataset::to_model_range(dataset::upsample_bilinear(to_float(compressed))));
  const auto out = generator->forward(input, /*dropout_on=*/false, unused);
  const auto small = dataset::downsample_to_original(nets::to_image(out, ValueRange::Signed));
  return to_u8(dataset::from_model_range(small));
}

namespace {

EpochMetrics evaluate_epoch(TrainState& state, const dataset::DatasetSplit& split, int epoch) {
  EpochMetrics e;
  e.epoch = epoch;
  if (split.test.empty()) return e;
  double psnr_sum = 0.0, ssim_sum = 0.0;
  for (const auto& s : split.test) {
    const auto restored = restore(state.generator, s.compressed);
    psnr_sum += metrics::psnr(s.original, restored);
    ssim_sum += metrics::ssim(s.original, restored);
  }
  e.test_psnr = psnr_sum / static_cast<double>(split.test.size());
  e.test_ssim = ssim_sum / static_cast<double>(split.test.size());
  return e;
}

}  // namespace

void train(TrainState& state, const dataset::DatasetSplit& split, const TrainConfig& cfg,
           losses::FeatureExtractor extractor, const TrainOptions& options) {
  cfg.validate();
  if (split.train.empty()) throw PreconditionError("train: empty training split");
  if (!options.checkpoint_dir.empty()) std::filesystem::create_directories(options.checkpoint_dir);
  const std::size_t n = split.train.size();
  const auto bs = static_cast<std::size_t>(cfg.batch_size);

  for (; state.epoch <= cfg.epochs; ++state.epoch) {
    const auto order = dataset::epoch_order(n, cfg.seed, state.epoch);
    for (std::size_t start = 0; start < n; start += bs) {
      std::vector<const dataset::PairedSample*> members;
      for (std::size_t k = start; k < std::min(n, start + bs); ++k) members.push_back(&split.train[order[k]]);
      const auto batch = prepare_batch(std::span<const dataset::PairedSample* const>(members));
      const auto m = train_step(state, batch, cfg, extractor);
      if (options.on_step) options.on_step(m);
    }
    if (cfg.evaluate_each_epoch && !split.test.empty()) {
      const auto e = evaluate_epoch(state, split, state.epoch);
      state.evaluations.push_back(e);
      if (options.on_epoch) options.on_epoch(e);
      const bool best = e.test_psnr > state.best_psnr;
      if (best) state.best_psnr = e.test_psnr;
      if (best && !options.checkpoint_dir.empty()) {
        TrainState snapshot = state;
        snapshot.epoch = state.epoch + 1;
        save_checkpoint(snapshot, cfg, best_checkpoint_path(options.checkpoint_dir));
      }
    }
    if (!options.checkpoint_dir.empty()) {
      // Saved with epoch = the next one so a resume continues there.
      const int finished = state.epoch;
      ++state.epoch;
      save_checkpoint(state, cfg, epoch_checkpoint_path(options.checkpoint_dir, finished));
      --state.epoch;
    }
  }
}

TrainState train(const dataset::DatasetSplit& split, const TrainConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  TrainState state;
  if (options.resume && !options.checkpoint_dir.empty()) {
    if (auto latest = latest_checkpoint(options.checkpoint_dir)) {
      auto ckpt = load_checkpoint(*latest);
      log_info("resuming from " + latest->string() + " at epoch " + std::to_string(ckpt.state.epoch));
      state = std::move(ckpt.state);
    } else {
      state = make_state(cfg);
    }
  } else {
    state = make_state(cfg);
  }
  train(state, split, cfg, make_extractor(cfg), options);
  return state;
}

namespace {

void add_module(serialize::Archive& a, const std::string& prefix, const torch::nn::Module& m) {
  for (const auto& item : m.named_parameters()) a.add(prefix + item.key(), item.value().detach());
}

void add_moments(serialize::Archive& a, const std::string& prefix, const torch::nn::Module& m,
                 const Adam& opt) {
  const auto named = m.named_parameters();
  for (std::size_t i = 0; i < named.size(); ++i) {
    a.add(prefix + "m." + named[i].key(), opt.first_moments().at(i));
    a.add(prefix + "v." + named[i].key(), opt.second_moments().at(i));
  }
}

void copy_into(torch::Tensor& dst, const torch::Tensor& src, const std::string& name) {
  if (dst.sizes() != src.sizes())
    throw ParseError("checkpoint tensor '" + name + "' has the wrong shape");
  torch::NoGradGuard no_grad;
  dst.copy_(src);
}

void load_module(const serialize::Archive& a, const std::string& prefix, torch::nn::Module& m) {
  for (auto& item : m.named_parameters()) copy_into(item.value(), a.tensor(prefix + item.key()), prefix + item.key());
}

void load_moments(const serialize::Archive& a, const std::string& prefix, torch::nn::Module& m, Adam& opt) {
  const auto named = m.named_parameters();
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto mk = prefix + "m." + named[i].key();
    const auto vk = prefix + "v." + named[i].key();
    copy_into(opt.first_moments().at(i), a.tensor(mk), mk);
    copy_into(opt.second_moments().at(i), a.tensor(vk), vk);
  }
}

}  // namespace

void save_checkpoint(const TrainState& state, const TrainConfig& cfg, const std::filesystem::path& path) {
  serialize::Archive a;
  json history = json::array();
  for (const auto& m : state.history) history.push_back(m.to_json());
  json evals = json::array();
  for (const auto& e : state.evaluations)
    evals.push_back({{"epoch", e.epoch}, {"test_psnr", e.test_psnr}, {"test_ssim", e.test_ssim}});
  a.meta = {{"format", kCheckpointFormat},
            {"config", cfg.to_json()},
            {"generator", state.generator->config().to_json()},
            {"discriminator", state.discriminator->config().to_json()},
            {"epoch", state.epoch},
            {"iteration", state.iteration},
            {"gen_opt_steps", state.gen_opt.steps()},
            {"disc_opt_steps", state.disc_opt.steps()},
            {"best_psnr", state.best_psnr},
            {"history", history},
            {"evaluations", evals}};
  add_module(a, "gen.", *state.generator);
  add_module(a, "disc.", *state.discriminator);
  add_moments(a, "opt.gen.", *state.generator, state.gen_opt);
  add_moments(a, "opt.disc.", *state.discriminator, state.disc_opt);
  auto rng = state.rng;
  a.add("rng", rng.get_state());
  serialize::write_archive(path, a);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto a = serialize::read_archive(path);
  try {
    if (a.meta.at("format").get<std::string>() != kCheckpointFormat)
      throw ParseError("unsupported checkpoint format in " + path.string());
    Checkpoint c;
    c.config = TrainConfig::from_json(a.meta.at("config"));
    c.config.validate();
    c.state = make_state(c.config);
    auto& s = c.state;
    if (nets::GeneratorConfig::from_json(a.meta.at("generator")).to_json() !=
        s.generator->config().to_json())
      throw ParseError("checkpoint generator architecture does not match its config");
    load_module(a, "gen.", *s.generator);
    load_module(a, "disc.", *s.discriminator);
    load_moments(a, "opt.gen.", *s.generator, s.gen_opt);
    load_moments(a, "opt.disc.", *s.discriminator, s.disc_opt);
    s.gen_opt.set_steps(a.meta.at("gen_opt_steps").get<std::int64_t>());
    s.disc_opt.set_steps(a.meta.at("disc_opt_steps").get<std::int64_t>());
    s.epoch = a.meta.at("epoch").get<int>();
    s.iteration = a.meta.at("iteration").get<std::int64_t>();
    s.best_psnr = a.meta.at("best_psnr").get<double>();
    for (const auto& h : a.meta.at("history")) s.history.push_back(StepMetrics::from_json(h));
    for (const auto& e : a.meta.at("evaluations"))
      s.evaluations.push_back({e.at("epoch").get<int>(), e.at("test_psnr").get<double>(),
                               e.at("test_ssim").get<double>()});
    try {
      s.rng.set_state(a.tensor("rng"));
    } catch (const c10::Error&) {
      throw ParseError("checkpoint rng state is invalid");
    }
    return c;
  } catch (const json::exception& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what());
  } catch (const PreconditionError& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what());
  }
}

std::filesystem::path epoch_checkpoint_path(const std::filesystem::path& dir, int epoch) {
  char name[32];
  std::snprintf(name, sizeof name, "epoch_%03d.ckpt", epoch);
  return dir / name;
}

std::filesystem::path best_checkpoint_path(const std::filesystem::path& dir) { return dir / "best.ckpt"; }

std::optional<std::filesystem::path> latest_checkpoint(const std::filesystem::path& dir) {
  std::optional<std::filesystem::path> best;
  int best_epoch = -1;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    const auto name = entry.path().filename().string();
    int epoch = 0;
    char tail[8] = {};
    if (std::sscanf(name.c_str(), "epoch_%d.%4s", &epoch, tail) == 2 && std::string(tail) == "ckpt" &&
        epoch > best_epoch) {
      best_epoch = epoch;
      best = entry.path();
    }
  }
  return best;
}

}  // namespace jpr::train
