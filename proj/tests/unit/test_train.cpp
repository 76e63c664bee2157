#include "torch_doctest.hpp"

#include <cmath>
#include <fstream>

#include "jpr/dataset/synthetic.hpp"
#include "jpr/error.hpp"
#include "jpr/metrics/metrics.hpp"
#include "jpr/png_io.hpp"
#include "jpr/serialize/archive.hpp"
#include "jpr/train/trainer.hpp"
#include "support.hpp"

namespace jpr::train {

std::ostream& operator<<(std::ostream& os, const StepMetrics& m) { return os << m.to_json().dump(); }
std::ostream& operator<<(std::ostream& os, const EpochMetrics& m) {
  return os << "{epoch " << m.epoch << ", psnr " << m.test_psnr << ", ssim " << m.test_ssim << "}";
}

}  // namespace jpr::train

using namespace jpr;
using namespace jpr::train;

namespace {

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 2;
  cfg.d_stop_epoch = 1;
  cfg.width_divisor = 16;
  cfg.stand_in_divisor = 16;
  cfg.seed = 5;
  cfg.evaluate_each_epoch = false;
  return cfg;
}

dataset::DatasetSplit tiny_split(std::size_t n_train, std::size_t n_test = 0, std::uint64_t seed = 1) {
  dataset::DatasetSplit s;
  const auto images = dataset::synthesize_corpus(n_train + n_test, seed);
  for (std::size_t i = 0; i < images.size(); ++i) {
    auto p = dataset::make_pair("p" + std::to_string(i), images[i], encode_png(images[i]).size());
    (i < n_train ? s.train : s.test).push_back(std::move(p));
  }
  return s;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void spit(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

bool same_tensors(const std::vector<torch::Tensor>& a, const std::vector<torch::Tensor>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!torch::equal(a[i], b[i])) return false;
  return true;
}

}  // namespace

TEST_SUITE("adam") {

TEST_CASE("adam matches the closed-form update") {
  auto p = torch::tensor({1.0, -2.0, 0.5}, torch::kFloat64).requires_grad_(true);
  AdamOptions o{1e-3, 0.5, 0.999, 1e-8};
  Adam opt({p}, o);
  std::vector<double> ref{1.0, -2.0, 0.5}, m(3, 0.0), v(3, 0.0);
  const std::vector<std::vector<double>> grads{{0.3, -1.0, 2.0}, {0.1, 0.0, -4.0}, {-0.2, 0.5, 1.0}};
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    opt.zero_grad();
    p.mutable_grad() = torch::tensor(grads[t - 1], torch::kFloat64);
    opt.step();
    for (int i = 0; i < 3; ++i) {
      const double g = grads[t - 1][i];
      m[i] = o.beta1 * m[i] + (1 - o.beta1) * g;
      v[i] = o.beta2 * v[i] + (1 - o.beta2) * g * g;
      const double mh = m[i] / (1 - std::pow(o.beta1, t)), vh = v[i] / (1 - std::pow(o.beta2, t));
      ref[i] -= o.lr * mh / (std::sqrt(vh) + o.eps);
      CHECK(std::abs(p[i].item<double>() - ref[i]) <= 1e-10);
    }
  }
  CHECK(opt.steps() == 3);
}

TEST_CASE("adam skips parameters without gradients") {
  auto a = torch::ones({2}).requires_grad_(true);
  auto b = torch::ones({2}).requires_grad_(true);
  Adam opt({a, b}, {});
  a.mutable_grad() = torch::ones({2});
  opt.step();
  CHECK(torch::equal(b, torch::ones({2})));
  CHECK_FALSE(torch::equal(a, torch::ones({2})));
}

}  // TEST_SUITE

TEST_SUITE("archive") {

TEST_CASE("archive round trip") {
  serialize::Archive ar;
  ar.meta = {{"k", "v"}, {"n", 3}};
  ar.add("f", torch::arange(12, torch::kFloat32).view({3, 4}));
  ar.add("d", torch::tensor({1.5, -2.5}, torch::kFloat64));
  ar.add("i", torch::tensor({7, 8, 9}, torch::kInt64));
  ar.add("u", torch::tensor({1, 2}, torch::kUInt8));
  ar.add("s", torch::tensor(4.0));
  const auto back = serialize::decode_archive(serialize::encode_archive(ar));
  CHECK(back.meta == ar.meta);
  REQUIRE(back.tensors.size() == ar.tensors.size());
  for (const auto& [name, t] : ar.tensors) {
    CHECK(back.tensor(name).dtype() == t.dtype());
    CHECK(torch::equal(back.tensor(name), t));
  }
  CHECK_THROWS_AS(back.tensor("missing"), ParseError);
  CHECK_THROWS(ar.add("f", torch::zeros({1})));
}

TEST_CASE("archive rejects corruption") {
  serialize::Archive ar;
  ar.add("w", torch::randn({16, 16}));
  const auto bytes = serialize::encode_archive(ar);
  for (std::size_t at : {std::size_t{0}, std::size_t{9}, bytes.size() / 2, bytes.size() - 1}) {
    auto bad = bytes;
    bad[at] ^= 0x40;
    CHECK_THROWS_AS(serialize::decode_archive(bad), ParseError);
  }
  auto cut = bytes;
  cut.resize(bytes.size() - 7);
  CHECK_THROWS_AS(serialize::decode_archive(cut), ParseError);
  CHECK_THROWS_AS(serialize::decode_archive(std::vector<std::uint8_t>{}), ParseError);
}

}  // TEST_SUITE

TEST_SUITE("trainer") {

TEST_CASE("iteration arithmetic") {
  CHECK(iterations_per_epoch(3200, 10) * 30 == 9600);
  CHECK(iterations_per_epoch(8, 2) * 3 == 12);
  CHECK(iterations_per_epoch(9, 2) == 5);
}

TEST_CASE("config validation and json") {
  TrainConfig cfg;
  CHECK(cfg.epochs == 30);
  CHECK(cfg.batch_size == 10);
  CHECK(cfg.lr == 1e-5);
  CHECK(cfg.d_stop_epoch == 10);
  CHECK(cfg.dropout_rate == 0.7);
  CHECK(cfg.weights.lf == 20.0);
  CHECK_NOTHROW(cfg.validate());
  auto bad = cfg;
  bad.d_stop_epoch = 31;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
  bad = cfg;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);

  cfg.hourglass = false;
  cfg.adv_loss = losses::AdvLossVariant::Log;
  const auto back = TrainConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(TrainConfig::from_json({{"epochs", 12}}).epochs == 12);
  CHECK_THROWS_AS(TrainConfig::from_json({{"epochz", 12}}), ParseError);
}

TEST_CASE("one epoch runs the expected number of finite steps") {
  auto cfg = tiny_config();
  cfg.epochs = 1;
  std::vector<StepMetrics> steps;
  TrainOptions opt;
  opt.on_step = [&](const StepMetrics& m) { steps.push_back(m); };
  const auto state = train::train(tiny_split(5), cfg, opt);
  REQUIRE(steps.size() == 3u);
  CHECK(state.iteration == 3);
  for (const auto& m : steps) {
    CHECK(std::isfinite(m.total));
    CHECK(m.hf > 0.0);
    CHECK(m.d_updated);
    CHECK(m.total == doctest::Approx(losses::total_loss(cfg.weights, m.adv_g, m.lf, m.hf)).epsilon(1e-5));
  }
  CHECK(state.history == steps);
}

TEST_CASE("discriminator is frozen after its last epoch") {
  auto cfg = tiny_config();
  cfg.epochs = 12;
  cfg.d_stop_epoch = 10;
  auto state = make_state(cfg);
  auto fe = make_extractor(cfg);
  const auto split = tiny_split(2);
  const auto batch = prepare_batch(std::span(split.train));
  state.epoch = 10;
  const auto before = nets::parameter_hash(*state.discriminator);
  CHECK(train_step(state, batch, cfg, fe).d_updated);
  const auto trained = nets::parameter_hash(*state.discriminator);
  CHECK(trained != before);
  const auto g_before = nets::parameter_hash(*state.generator);
  state.epoch = 11;
  const auto m = train_step(state, batch, cfg, fe);
  CHECK_FALSE(m.d_updated);
  CHECK(std::isfinite(m.adv_d));
  CHECK(nets::parameter_hash(*state.discriminator) == trained);
  CHECK(nets::parameter_hash(*state.generator) != g_before);
  for (const auto& p : state.discriminator->parameters()) CHECK(p.requires_grad());
}

TEST_CASE("seeded runs are bit-identical") {
  const auto cfg = tiny_config();
  const auto split = tiny_split(4);
  const auto a = train::train(split, cfg);
  const auto b = train::train(split, cfg);
  REQUIRE(a.history.size() == 4u);
  CHECK(a.history == b.history);
  CHECK(nets::parameter_hash(*a.generator) == nets::parameter_hash(*b.generator));
  auto other = cfg;
  other.seed = 6;
  CHECK_FALSE(train::train(split, other).history == a.history);
}

TEST_CASE("resume reproduces an uninterrupted run") {
  testing::TempDir dir("resume");
  auto cfg = tiny_config();
  const auto split = tiny_split(4, 2);
  cfg.evaluate_each_epoch = true;
  const auto full = train::train(split, cfg);

  auto first = cfg;
  first.epochs = 1;
  TrainOptions opt;
  opt.checkpoint_dir = dir.path();
  train::train(split, first, opt);
  CHECK(std::filesystem::exists(epoch_checkpoint_path(dir.path(), 1)));
  CHECK(std::filesystem::exists(best_checkpoint_path(dir.path())));
  REQUIRE(latest_checkpoint(dir.path()).has_value());

  opt.resume = true;
  const auto resumed = train::train(split, cfg, opt);
  CHECK(resumed.history == full.history);
  CHECK(resumed.evaluations == full.evaluations);
  CHECK(nets::parameter_hash(*resumed.generator) == nets::parameter_hash(*full.generator));
  CHECK(*latest_checkpoint(dir.path()) == epoch_checkpoint_path(dir.path(), 2));
}

TEST_CASE("checkpoint round trip and corruption") {
  testing::TempDir dir("ckpt");
  auto cfg = tiny_config();
  cfg.epochs = 1;
  const auto split = tiny_split(2);
  auto state = train::train(split, cfg);
  state.best_psnr = 23.5;
  state.evaluations.push_back({1, 23.5, 0.7});
  const auto path = dir / "s.ckpt";
  save_checkpoint(state, cfg, path);
  auto ck = load_checkpoint(path);
  CHECK(ck.config.to_json() == cfg.to_json());
  CHECK(ck.state.epoch == state.epoch);
  CHECK(ck.state.iteration == state.iteration);
  CHECK(ck.state.history == state.history);
  CHECK(ck.state.evaluations == state.evaluations);
  CHECK(ck.state.best_psnr == state.best_psnr);
  CHECK(nets::parameter_hash(*ck.state.generator) == nets::parameter_hash(*state.generator));
  CHECK(nets::parameter_hash(*ck.state.discriminator) == nets::parameter_hash(*state.discriminator));
  CHECK(ck.state.gen_opt.steps() == state.gen_opt.steps());
  CHECK(ck.state.disc_opt.steps() == state.disc_opt.steps());
  CHECK(same_tensors(ck.state.gen_opt.first_moments(), state.gen_opt.first_moments()));
  CHECK(same_tensors(ck.state.gen_opt.second_moments(), state.gen_opt.second_moments()));
  CHECK(same_tensors(ck.state.disc_opt.second_moments(), state.disc_opt.second_moments()));
  CHECK(torch::equal(ck.state.rng.get_state(), state.rng.get_state()));
  CHECK(serialize::read_archive(path).meta.at("format") == kCheckpointFormat);

  const auto bytes = slurp(path);
  auto bad = bytes;
  bad[bad.size() / 3] ^= 0x01;
  spit(dir / "bad.ckpt", bad);
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt"), ParseError);
  bad = bytes;
  bad.resize(bytes.size() / 2);
  spit(dir / "short.ckpt", bad);
  CHECK_THROWS_AS(load_checkpoint(dir / "short.ckpt"), ParseError);
  CHECK_THROWS(load_checkpoint(dir / "missing.ckpt"));
}

TEST_CASE("restore contract") {
  auto cfg = tiny_config();
  auto state = make_state(cfg);
  const auto img = dataset::synthesize_image(3);
  const auto a = restore(state.generator, img);
  CHECK(a.height == 128);
  CHECK(a.width == 128);
  CHECK(a.channels == 3);
  CHECK(a == restore(state.generator, img));
  CHECK_THROWS_AS(restore(state.generator, testing::random_image(64, 64, 1)), ShapeError);
}

TEST_CASE("pixel loss alone overfits a single pair") {
  auto cfg = tiny_config();
  cfg.epochs = 200;
  cfg.d_stop_epoch = 200;
  cfg.batch_size = 1;
  cfg.weights = {0.0, 20.0, 0.0};
  cfg.lr = 1e-3;
  cfg.dropout_rate = 0.0;
  const auto split = tiny_split(1);
  const auto state = train::train(split, cfg);
  REQUIRE(state.history.size() == 200u);
  CHECK(state.history.back().lf <= 0.5 * state.history.front().lf);
  auto g = state.generator;
  const auto& pair = split.train[0];
  CHECK(metrics::psnr(pair.original, restore(g, pair.compressed)) > metrics::psnr(pair.original, pair.compressed));
}

}  // TEST_SUITE
