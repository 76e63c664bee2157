// Acceptance checks 1-9. Each prints one "criterion N: PASS|FAIL" line with the
// measured values; the process fails when any selected criterion fails.
//
//   acceptance            run all criteria
//   acceptance 3 5        run only the listed ones

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "jpr/cli/cli.hpp"
#include "jpr/codec/jpeg.hpp"
#include "jpr/dataset/dataset.hpp"
#include "jpr/dataset/synthetic.hpp"
#include "jpr/log.hpp"
#include "jpr/losses/losses.hpp"
#include "jpr/metrics/metrics.hpp"
#include "jpr/nets/nets.hpp"
#include "jpr/png_io.hpp"
#include "jpr/train/trainer.hpp"
#include "support.hpp"

using namespace jpr;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// n pairs from the procedural corpus, compressed at maximum strength.
dataset::DatasetSplit small_split(std::size_t n, std::uint64_t seed) {
  dataset::DatasetSplit s;
  const auto images = dataset::synthesize_corpus(n, seed);
  for (std::size_t i = 0; i < n; ++i)
    s.train.push_back(dataset::make_pair("a" + std::to_string(i), images[i], encode_png(images[i]).size()));
  return s;
}

double mean_psnr(const std::vector<dataset::PairedSample>& pairs, const std::function<ImageU8(const ImageU8&)>& f) {
  double sum = 0;
  for (const auto& p : pairs) sum += metrics::psnr(p.original, f(p.compressed));
  return sum / static_cast<double>(pairs.size());
}

Outcome codec_interop() {
  int worst = 0;
  std::size_t samples = 0;
  for (int q : {2, 50, 95})
    for (std::uint64_t i = 0; i < 32; ++i) {
      const auto img = decode_png(encode_png(testing::random_image(128, 128, 7000 + i)));
      const auto bs = codec::compress(img, q);
      const auto ours = codec::decompress(bs);
      const auto ref = testing::libjpeg_decode(bs.bytes);
      if (!ref.same_shape(ours)) return {false, "reference decoder returned a different shape"};
      for (std::size_t k = 0; k < ours.data.size(); ++k) worst = std::max(worst, std::abs(ours.data[k] - ref.data[k]));
      samples += ours.data.size();
    }
  return {worst <= 1, "max |ours - libjpeg| = " + std::to_string(worst) + " over " + std::to_string(samples) +
                          " samples (96 streams, q 2/50/95)"};
}

Outcome compression_rate() {
  testing::TempDir dir("acc2");
  dataset::write_synthetic_corpus(dir.path(), 32, 2024);
  dataset::BuildReport report;
  const auto pairs = dataset::build_pairs(dir.path(), codec::kMaxCompressionQuality, &report);
  const double r = report.data_reduction();
  return {pairs.size() == 32 && r >= 0.95 && r <= 0.985,
          "reduction " + fmt("%.4f", r) + " over " + std::to_string(pairs.size()) + " images at quality " +
              std::to_string(codec::kMaxCompressionQuality) + ", window [0.95, 0.985]"};
}

Outcome metric_oracles() {
  double worst_ssim = 0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto x = testing::random_image(16, 16, 100 + i), y = testing::random_image(16, 16, 900 + i);
    worst_ssim = std::max(worst_ssim, std::abs(metrics::ssim(x, y) - testing::ssim_brute_force(x, y)));
  }
  const auto x = testing::random_image(64, 64, 1);
  const double cap = metrics::psnr(x, x);
  ImageU8 base(64, 64, 3, ColorSpace::RGB, ValueRange::Byte, 100), shifted = base;
  for (auto& v : shifted.data) v = static_cast<std::uint8_t>(v + 16);
  const double p16 = metrics::psnr(base, shifted);
  int vif_exact = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const auto img = testing::random_image(128, 128, 300 + i);
    vif_exact += metrics::vif(img, img) == 1.0;
  }
  const bool ok = worst_ssim <= 1e-6 && cap == 100.0 && std::abs(p16 - 24.03) <= 0.01 && vif_exact == 10;
  std::ostringstream d;
  d << "ssim max dev " << fmt("%.2e", worst_ssim) << "; psnr(x,x) " << fmt("%.1f", cap) << "; psnr(+16) "
    << fmt("%.4f", p16) << " vs 24.03 +- 0.01; vif(x,x)==1 for " << vif_exact << "/10";
  return {ok, d.str()};
}

Outcome architecture_shapes() {
  torch::NoGradGuard no_grad;
  auto m = nets::init_params(1);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(0);
  auto in = torch::rand({1, 3, 512, 512}, gen) * 2 - 1;
  nets::ForwardTrace trace;
  const auto y = m.generator->forward(in, false, gen, &trace);
  const auto d = m.discriminator->forward(in, y);
  const auto s6 = trace.stage_shapes.at(5);
  const bool ok = y.sizes().vec() == std::vector<std::int64_t>{1, 3, 512, 512} &&
                  d.sizes().vec() == std::vector<std::int64_t>{1, 1, 62, 62} &&
                  s6 == std::vector<std::int64_t>{1, 1024, 8, 8};
  std::ostringstream o;
  o << "generator " << y.sizes() << ", discriminator " << d.sizes() << ", encoder stage 6 " << s6;
  return {ok, o.str()};
}

Outcome loss_analytics() {
  using namespace losses;
  auto full = [](double v) { return torch::full({1, 1, 62, 62}, v, torch::kFloat64); };
  double worst = 0;
  auto track = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  track(adv_loss_d(full(1.0), full(0.0)).item<double>(), -1.0);
  track(adv_loss_d(full(0.3), full(0.3)).item<double>(), 0.0);
  track(adv_loss_d(full(0.2), full(0.7)).item<double>(), 0.5);
  track(total_loss({1.0, 20.0, 0.1}, 0.5, 0.02, 1.0), 1.0);
  track(total_loss({1.0, 20.0, 0.1}, 0.0, 0.0, 0.0), 0.0);
  track(total_loss({0.0, 0.0, 0.0}, 0.4, 0.3, 7.0), 0.0);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(4);
  const auto x = torch::rand({1, 3, 64, 64}, gen) * 2 - 1;
  FeatureExtractor fe(FeatureExtractorConfig::stand_in(8));
  fe->randomize(3);
  track(lf_loss(x, x).item<double>(), 0.0);
  track(hf_loss(fe, x, x).item<double>(), 0.0);

  auto g = (torch::rand({1, 3, 64, 64}, gen) * 2 - 1).requires_grad_(true);
  hf_loss(fe, x, g).backward();
  bool isolated = true;
  for (const auto& p : fe->parameters())
    if (p.requires_grad() || (p.grad().defined() && p.grad().abs().max().item<double>() != 0.0)) isolated = false;
  return {worst <= 1e-7 && isolated, "max deviation " + fmt("%.2e", worst) +
                                         "; extractor gradients " + (isolated ? "all zero" : "NONZERO")};
}

train::TrainConfig tiny_config() {
  train::TrainConfig cfg;
  cfg.epochs = 12;
  cfg.d_stop_epoch = 10;
  cfg.batch_size = 2;
  cfg.width_divisor = 16;
  cfg.stand_in_divisor = 16;
  cfg.seed = 77;
  cfg.evaluate_each_epoch = false;
  return cfg;
}

Outcome discriminator_freeze() {
  const auto cfg = tiny_config();
  const auto split = small_split(4, 12);
  auto state = train::make_state(cfg);
  std::map<int, std::vector<std::uint64_t>> hashes;
  train::TrainOptions opt;
  opt.on_step = [&](const train::StepMetrics& m) { hashes[m.epoch].push_back(nets::parameter_hash(*state.discriminator)); };
  train::train(state, split, cfg, train::make_extractor(cfg), opt);
  std::set<std::uint64_t> late{hashes[10].back()};
  for (int e = 11; e <= 12; ++e) late.insert(hashes[e].begin(), hashes[e].end());
  const bool moved_before = hashes[1].front() != hashes[10].back();
  const std::size_t n_late = hashes[11].size() + hashes[12].size();
  return {late.size() == 1 && n_late == 4 && moved_before,
          std::to_string(late.size()) + " distinct discriminator hash(es) from the end of epoch 10 through " + std::to_string(n_late) +
              " iterations of epochs 11-12; updated during epochs 1-10: " + (moved_before ? "yes" : "no")};
}

Outcome overfit_smoke() {
  train::TrainConfig cfg;  // default hyperparameters: lr 1e-5, lambdas 1/20/0.1, dropout 0.7, d_stop 10
  cfg.batch_size = 2;
  cfg.epochs = 50;  // 8 pairs / batch 2 = 4 iterations per epoch -> 200 generator iterations
  cfg.seed = 1;
  cfg.evaluate_each_epoch = false;
  if (const char* w = std::getenv(cli::kVggWeightsEnv)) cfg.vgg_weights = w;
  const auto split = small_split(8, 31);
  const auto t0 = std::chrono::steady_clock::now();
  const auto state = train::train(split, cfg);
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  auto g = state.generator;
  const double before = mean_psnr(split.train, [](const ImageU8& c) { return c; });
  const double after = mean_psnr(split.train, [&](const ImageU8& c) { return train::restore(g, c); });
  return {state.iteration == 200 && after - before >= 0.5,
          "PSNR compressed " + fmt("%.3f", before) + " dB, restored " + fmt("%.3f", after) + " dB, gain " +
              fmt("%+.3f", after - before) + " dB (need >= +0.5) after " + std::to_string(state.iteration) +
              " iterations, full width, " + fmt("%.1f", minutes) + " min"};
}

Outcome determinism() {
  auto cfg = tiny_config();
  cfg.epochs = 3;
  cfg.d_stop_epoch = 2;
  const auto split = small_split(4, 5);
  const auto a = train::train(split, cfg);
  const auto b = train::train(split, cfg);
  const bool same = a.history == b.history && !a.history.empty();
  return {same, std::to_string(a.history.size()) + " steps; histories " + (same ? "bit-identical" : "DIFFER")};
}

// Three metric rows with `columns` value cells each; filled tables may not
// contain "-" placeholders.
bool table_shape(const std::string& table, std::size_t columns, bool filled) {
  std::istringstream in(table);
  int metric_rows = 0;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("| PSNR", 0) != 0 && line.rfind("| SSIM", 0) != 0 && line.rfind("| VIF", 0) != 0) continue;
    ++metric_rows;
    if (static_cast<std::size_t>(std::count(line.begin(), line.end(), '|')) != columns + 2) return false;
    if (filled && line.find(" - ") != std::string::npos) return false;
  }
  return metric_rows == 3;
}

Outcome ablation_tables() {
  const auto spec = cli::desk_scale_spec();
  const bool dry_ok = table_shape(cli::format_lambda_stop_table(spec, {}), 6, false) &&
                      table_shape(cli::format_hourglass_vgg_table({}), 3, false);

  const auto split = small_split(8, 99);
  // Table-2 grid: structure only, at a short schedule.
  auto lambda_spec = spec;
  lambda_spec.hourglass_vgg = false;
  lambda_spec.base.epochs = 2;
  lambda_spec.base.d_stop_epoch = 1;
  const auto lambda_results = cli::run_ablation(lambda_spec, split, cli::EvalSplit::Train);
  const auto table2 = cli::format_lambda_stop_table(lambda_spec, lambda_results);

  auto hg_spec = spec;
  hg_spec.lambda_stop = false;
  const auto hg_results = cli::run_ablation(hg_spec, split, cli::EvalSplit::Train);
  const auto table3 = cli::format_hourglass_vgg_table(hg_results);
  std::printf("%s\n%s", table2.c_str(), table3.c_str());

  double off_off = NAN, on_on = NAN;
  for (const auto& r : hg_results) {
    if (r.cell.id == "hg0-vgg0" && r.ok) off_off = r.mean.psnr;
    if (r.cell.id == "hg1-vgg1" && r.ok) on_on = r.mean.psnr;
  }
  const bool shapes = dry_ok && table_shape(table2, 6, true) && table_shape(table3, 3, true);
  const bool direction = on_on >= off_off;
  return {shapes && direction,
          std::string("tables ") + (shapes ? "well-formed" : "MALFORMED") + "; hourglass/VGG on/on PSNR " +
              fmt("%.3f", on_on) + " vs off/off " + fmt("%.3f", off_off) + " on the training pairs (" +
              std::to_string(hg_spec.base.epochs) + " epochs, width/" + std::to_string(hg_spec.base.width_divisor) +
              ", lr " + fmt("%g", hg_spec.base.lr) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
  set_log_level(LogLevel::Warning);
  const std::vector<std::pair<int, std::function<Outcome()>>> all = {
      {1, codec_interop},        {2, compression_rate}, {3, metric_oracles},
      {4, architecture_shapes},  {5, loss_analytics},   {6, discriminator_freeze},
      {7, overfit_smoke},        {8, determinism},      {9, ablation_tables}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  bool all_ok = true;
  for (const auto& [id, check] : all) {
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s - %s [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    all_ok = all_ok && o.pass;
  }
  return all_ok ? 0 : 1;
}
