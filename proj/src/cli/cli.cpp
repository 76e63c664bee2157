#include "jpr/cli/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "jpr/codec/jpeg.hpp"
#include "jpr/dataset/synthetic.hpp"
#include "jpr/error.hpp"
#include "jpr/log.hpp"
#include "jpr/png_io.hpp"

namespace jpr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::span<const std::uint8_t> as_bytes(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::vector<fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("input directory not found: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png") out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

void prepare_output(const fs::path& dir, bool no_clobber) {
  if (no_clobber && fs::exists(dir) && !fs::is_empty(dir))
    throw PreconditionError("output directory " + dir.string() + " is not empty (--no-clobber)");
  fs::create_directories(dir);
}

std::string fmt(double v, int precision = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string lambda_label(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

// Flags shared by train and ablate that override a TrainConfig.
struct TrainFlags {
  std::string config_path;
  int epochs = 0, batch_size = 0, d_stop_epoch = 0, width_divisor = 0, quality = 0;
  double lr = 0, lambda_adv = 0, lambda_lf = 0, lambda_hf = 0;
  std::uint64_t seed = 0;
  bool no_hourglass = false, no_hf_loss = false, no_adv_after_stop = false;
  std::string adv_loss, vgg_weights;
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App& app) {
    opts["config"] = app.add_option("--config", config_path, "JSON file with TrainConfig keys")->check(CLI::ExistingFile);
    opts["epochs"] = app.add_option("--epochs", epochs)->check(CLI::PositiveNumber);
    opts["batch"] = app.add_option("--batch-size", batch_size)->check(CLI::PositiveNumber);
    opts["lr"] = app.add_option("--lr", lr)->check(CLI::PositiveNumber);
    opts["adv"] = app.add_option("--lambda-adv", lambda_adv)->check(CLI::NonNegativeNumber);
    opts["lf"] = app.add_option("--lambda-lf", lambda_lf)->check(CLI::NonNegativeNumber);
    opts["hf"] = app.add_option("--lambda-hf", lambda_hf)->check(CLI::NonNegativeNumber);
    opts["dstop"] = app.add_option("--d-stop-epoch", d_stop_epoch)->check(CLI::NonNegativeNumber);
    opts["seed"] = app.add_option("--seed", seed);
    opts["quality"] = app.add_option("--quality", quality, "JPEG quality of the inputs")->check(CLI::Range(1, 100));
    opts["width"] = app.add_option("--width-divisor", width_divisor, "divide every channel count")->check(CLI::PositiveNumber);
    opts["advloss"] = app.add_option("--adv-loss", adv_loss)->check(CLI::IsMember({"log", "logless"}));
    opts["vgg"] = app.add_option("--vgg-weights", vgg_weights, std::string("VGG16 archive (default $") + kVggWeightsEnv + ")");
    app.add_flag("--no-hourglass", no_hourglass);
    app.add_flag("--no-hf-loss", no_hf_loss);
    app.add_flag("--no-adv-after-stop", no_adv_after_stop, "drop the adversarial term once D is frozen");
  }

  bool given(const char* key) const { return opts.at(key)->count() > 0; }

  void apply(train::TrainConfig& cfg) const {
    if (given("config")) {
      const auto raw = read_file(config_path);
      try {
        cfg = train::TrainConfig::from_json(json::parse(raw.begin(), raw.end()));
      } catch (const json::exception& e) {
        throw ParseError(config_path + ": " + e.what());
      }
    }
    if (given("epochs")) cfg.epochs = epochs;
    if (given("batch")) cfg.batch_size = batch_size;
    if (given("lr")) cfg.lr = lr;
    if (given("adv")) cfg.weights.adv = lambda_adv;
    if (given("lf")) cfg.weights.lf = lambda_lf;
    if (given("hf")) cfg.weights.hf = lambda_hf;
    if (given("dstop")) cfg.d_stop_epoch = d_stop_epoch;
    if (given("seed")) cfg.seed = seed;
    if (given("quality")) cfg.quality = quality;
    if (given("width")) cfg.width_divisor = width_divisor;
    if (given("advloss")) cfg.adv_loss = losses::parse_adv_loss_variant(adv_loss);
    if (no_hourglass) cfg.hourglass = false;
    if (no_hf_loss) cfg.hf_loss = false;
    if (no_adv_after_stop) cfg.adv_after_d_stop = false;
    if (given("vgg")) {
      cfg.vgg_weights = vgg_weights;
    } else if (cfg.vgg_weights.empty()) {
      if (const char* env = std::getenv(kVggWeightsEnv); env && *env) cfg.vgg_weights = env;
    }
    cfg.validate();
  }
};

// ---- compress / roundtrip ------------------------------------------------

int cmd_compress(const fs::path& in, const fs::path& out, int quality, bool no_clobber, bool decode) {
  const auto inputs = list_pngs(in);
  prepare_output(out, no_clobber);
  std::size_t png_total = 0, jpeg_total = 0;
  std::string report;
  for (const auto& path : inputs) {
    const auto png = read_file(path);
    const auto img = decode_png(png);
    const auto bs = codec::compress(img, quality);
    const auto stem = path.stem().string();
    if (decode)
      write_png(out / (stem + ".png"), codec::decompress(bs));
    else
      write_file_atomic(out / (stem + ".jpg"), bs.bytes);
    png_total += png.size();
    jpeg_total += bs.bytes.size();
    report += json{{"file", path.filename().string()},
                   {"png_bytes", png.size()},
                   {"jpeg_bytes", bs.bytes.size()},
                   {"reduction", 1.0 - static_cast<double>(bs.bytes.size()) / static_cast<double>(png.size())}}
                  .dump() +
              "\n";
  }
  const double reduction =
      png_total == 0 ? 0.0 : 1.0 - static_cast<double>(jpeg_total) / static_cast<double>(png_total);
  report += json{{"file", "*"}, {"png_bytes", png_total}, {"jpeg_bytes", jpeg_total}, {"reduction", reduction}}.dump() +
            "\n";
  write_file_atomic(out / "sizes.jsonl", as_bytes(report));
  std::cout << inputs.size() << " files, quality " << quality << ", png " << png_total << " B, jpeg "
            << jpeg_total << " B, reduction " << fmt(reduction, 4) << "\n";
  return 0;
}

// ---- build-dataset -------------------------------------------------------

int cmd_build_dataset(const fs::path& in, const fs::path& out, int quality, std::uint64_t seed, double ratio,
                      bool no_clobber) {
  if (!fs::is_directory(in)) throw IoError("input directory not found: " + in.string());
  prepare_output(out, no_clobber);
  dataset::BuildReport report;
  auto pairs = dataset::build_pairs(in, quality, &report);
  if (pairs.empty()) throw PreconditionError("no usable 128x128 PNG images in " + in.string());
  const auto split = dataset::split(std::move(pairs), ratio, seed);
  dataset::write_dataset(split, out, quality);
  std::cout << report.accepted << " pairs (" << split.train.size() << " train, " << split.test.size()
            << " test), " << report.skipped << " skipped, data reduction " << fmt(report.data_reduction(), 4)
            << "\n";
  return 0;
}

// ---- train ---------------------------------------------------------------

int cmd_train(const fs::path& in, const fs::path& ckpt_dir, const train::TrainConfig& cfg, bool resume,
              bool no_clobber) {
  const auto data = dataset::load_dataset(in);
  if (!resume) prepare_output(ckpt_dir, no_clobber);
  fs::create_directories(ckpt_dir);
  const auto cfg_text = cfg.to_json().dump(2) + "\n";
  write_file_atomic(ckpt_dir / "config.json", as_bytes(cfg_text));

  train::TrainOptions options;
  options.checkpoint_dir = ckpt_dir;
  options.resume = resume;
  options.on_step = [](const train::StepMetrics& m) { log_info(m.to_json().dump()); };
  options.on_epoch = [](const train::EpochMetrics& e) {
    log_info("epoch " + std::to_string(e.epoch) + " test PSNR " + fmt(e.test_psnr) + " SSIM " + fmt(e.test_ssim));
  };
  log_info("training on " + std::to_string(data.train.size()) + " pairs, " +
           std::to_string(train::iterations_per_epoch(data.train.size(), cfg.batch_size)) + " iterations per epoch");
  const auto state = train::train(data, cfg, options);

  std::string log_text;
  for (const auto& m : state.history) log_text += m.to_json().dump() + "\n";
  write_file_atomic(ckpt_dir / "train_log.jsonl", as_bytes(log_text));
  std::cout << state.iteration << " iterations, final checkpoint "
            << train::epoch_checkpoint_path(ckpt_dir, cfg.epochs).string() << "\n";
  return 0;
}

// ---- restore -------------------------------------------------------------

fs::path resolve_checkpoint(const fs::path& p) {
  if (fs::is_regular_file(p)) return p;
  if (fs::is_directory(p)) {
    if (fs::is_regular_file(train::best_checkpoint_path(p))) return train::best_checkpoint_path(p);
    if (auto latest = train::latest_checkpoint(p)) return *latest;
  }
  throw IoError("no checkpoint found at " + p.string());
}

int cmd_restore(const fs::path& ckpt, const fs::path& in, const fs::path& out, bool no_clobber) {
  const auto inputs = list_pngs(in);
  const auto path = resolve_checkpoint(ckpt);
  auto loaded = train::load_checkpoint(path);
  prepare_output(out, no_clobber);
  for (const auto& p : inputs) write_png(out / p.filename(), train::restore(loaded.state.generator, read_png(p)));
  std::cout << inputs.size() << " images restored with " << path.string() << "\n";
  return 0;
}

// ---- evaluate ------------------------------------------------------------

int cmd_evaluate(const fs::path& in, const fs::path& restored_dir, const std::string& which,
                 const fs::path& out_file) {
  const auto data = dataset::load_dataset(in);
  std::vector<const dataset::PairedSample*> samples;
  if (which != "test")
    for (const auto& s : data.train) samples.push_back(&s);
  if (which != "train")
    for (const auto& s : data.test) samples.push_back(&s);
  if (samples.empty()) throw PreconditionError("no samples in the '" + which + "' split of " + in.string());

  std::vector<ImageU8> originals, compressed, restored;
  std::vector<std::string> ids;
  for (const auto* s : samples) {
    originals.push_back(s->original);
    compressed.push_back(s->compressed);
    ids.push_back(s->source_id);
    if (!restored_dir.empty()) restored.push_back(read_png(restored_dir / (s->source_id + ".png")));
  }
  const int quality = [&] {
    const auto raw = read_file(in / dataset::kManifestName);
    const auto records = dataset::parse_manifest(std::string(raw.begin(), raw.end()));
    return records.empty() ? 0 : records.front().quality;
  }();
  std::vector<metrics::EvalReport> columns;
  columns.push_back(metrics::evaluate(originals, compressed, ids, "Lossy Compress.", quality));
  if (!restored_dir.empty())
    columns.push_back(metrics::evaluate(originals, restored, ids, "Restored", quality, restored_dir.string()));
  std::cout << metrics::format_table(columns);
  if (!out_file.empty()) {
    std::string text;
    for (const auto& c : columns) text += metrics::to_jsonl(c);
    if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
    write_file_atomic(out_file, as_bytes(text));
  }
  return 0;
}

// ---- ablate --------------------------------------------------------------

int cmd_ablate(const AblationSpec& spec, const fs::path& in, const fs::path& out, EvalSplit eval_split,
               bool dry_run, bool no_clobber) {
  std::vector<CellResult> results;
  if (dry_run) {
    std::cout << format_plan(spec);
  } else {
    const auto data = dataset::load_dataset(in);
    if (!out.empty()) prepare_output(out, no_clobber);
    results = run_ablation(spec, data, eval_split, [](const CellResult& r) {
      if (r.ok)
        log_info("cell " + r.cell.id + ": PSNR " + fmt(r.mean.psnr) + " SSIM " + fmt(r.mean.ssim) + " VIF " +
                 fmt(r.mean.vif));
      else
        log(LogLevel::Error, "cell " + r.cell.id + " failed: " + r.error);
    });
  }
  std::string tables;
  if (spec.lambda_stop) tables += format_lambda_stop_table(spec, results) + "\n";
  if (spec.hourglass_vgg) tables += format_hourglass_vgg_table(results);
  std::cout << tables;
  if (!dry_run && !out.empty()) {
    write_file_atomic(out / "tables.md", as_bytes(tables));
    std::string lines;
    for (const auto& r : results)
      lines += json{{"cell", r.cell.id},
                    {"ok", r.ok},
                    {"error", r.error},
                    {"psnr", r.mean.psnr},
                    {"ssim", r.mean.ssim},
                    {"vif", r.mean.vif},
                    {"config", r.cell.config.to_json()}}
                   .dump() +
               "\n";
    write_file_atomic(out / "cells.jsonl", as_bytes(lines));
  }
  const bool failed = std::any_of(results.begin(), results.end(), [](const CellResult& r) { return !r.ok; });
  return failed ? 1 : 0;
}

const CellResult* find_result(std::span<const CellResult> results, const std::string& id) {
  for (const auto& r : results)
    if (r.cell.id == id) return &r;
  return nullptr;
}

std::string lambda_stop_id(double lf, bool stop) { return "lf" + lambda_label(lf) + (stop ? "-stop" : "-nonstop"); }
std::string hourglass_vgg_id(bool hourglass, bool vgg) {
  return std::string("hg") + (hourglass ? "1" : "0") + "-vgg" + (vgg ? "1" : "0");
}

constexpr struct {
  bool hourglass;
  bool vgg;
} kHourglassVggGrid[] = {{false, false}, {true, false}, {true, true}};

void table_row(std::ostringstream& out, const std::string& head, const std::vector<std::string>& cells) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "| %-16s|", head.c_str());
  out << buf;
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, " %12s |", c.c_str());
    out << buf;
  }
  out << "\n";
}

void metric_rows(std::ostringstream& out, const std::vector<const CellResult*>& cols) {
  const struct {
    const char* name;
    double metrics::EvalRow::*field;
  } rows[] = {{"PSNR", &metrics::EvalRow::psnr}, {"SSIM", &metrics::EvalRow::ssim}, {"VIF", &metrics::EvalRow::vif}};
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    for (const auto* r : cols) cells.push_back(r && r->ok ? fmt(r->mean.*row.field) : "-");
    table_row(out, row.name, cells);
  }
}

}  // namespace

std::vector<AblationCell> AblationSpec::cells() const {
  std::vector<AblationCell> out;
  if (lambda_stop) {
    for (double lf : lambda_lf)
      for (bool stop : {false, true}) {
        AblationCell c{AblationTable::LambdaStop, lambda_stop_id(lf, stop), base};
        c.config.weights.lf = lf;
        c.config.hourglass = true;
        c.config.hf_loss = true;
        c.config.d_stop_epoch = stop ? base.d_stop_epoch : base.epochs;
        out.push_back(std::move(c));
      }
  }
  if (hourglass_vgg) {
    for (const auto& g : kHourglassVggGrid) {
      AblationCell c{AblationTable::HourglassVgg, hourglass_vgg_id(g.hourglass, g.vgg), base};
      c.config.hourglass = g.hourglass;
      c.config.hf_loss = g.vgg;
      out.push_back(std::move(c));
    }
  }
  return out;
}

AblationSpec desk_scale_spec() {
  AblationSpec spec;
  auto& b = spec.base;
  b.epochs = 40;
  b.batch_size = 2;
  b.d_stop_epoch = 10;
  b.width_divisor = 8;
  b.lr = 1e-3;
  b.evaluate_each_epoch = false;
  return spec;
}

AblationSpec full_scale_spec() { return AblationSpec{}; }

std::vector<CellResult> run_ablation(const AblationSpec& spec, const dataset::DatasetSplit& data,
                                     EvalSplit eval_split, const std::function<void(const CellResult&)>& on_cell) {
  const auto& eval_set = eval_split == EvalSplit::Train ? data.train : data.test;
  if (eval_set.empty()) throw PreconditionError("ablation: the evaluation split is empty");
  std::vector<ImageU8> originals;
  std::vector<std::string> ids;
  for (const auto& s : eval_set) {
    originals.push_back(s.original);
    ids.push_back(s.source_id);
  }
  std::vector<CellResult> results;
  for (const auto& cell : spec.cells()) {
    CellResult r;
    r.cell = cell;
    try {
      auto cfg = cell.config;
      cfg.validate();
      auto state = train::make_state(cfg);
      train::train(state, data, cfg, train::make_extractor(cfg));
      std::vector<ImageU8> restored;
      for (const auto& s : eval_set) restored.push_back(train::restore(state.generator, s.compressed));
      r.mean = metrics::evaluate(originals, restored, ids, cell.id).aggregate;
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    if (on_cell) on_cell(r);
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_lambda_stop_table(const AblationSpec& spec, std::span<const CellResult> results) {
  std::ostringstream out;
  std::vector<std::string> groups, modes;
  std::vector<const CellResult*> cols;
  for (double lf : spec.lambda_lf) {
    groups.push_back("lambda_LF=" + lambda_label(lf));
    groups.push_back("");
    for (bool stop : {false, true}) {
      modes.push_back(stop ? "stop" : "nonstop");
      cols.push_back(find_result(results, lambda_stop_id(lf, stop)));
    }
  }
  table_row(out, "Metrics", groups);
  table_row(out, "", modes);
  out << "|-----------------|";
  for (std::size_t i = 0; i < cols.size(); ++i) out << "--------------|";
  out << "\n";
  metric_rows(out, cols);
  return out.str();
}

std::string format_hourglass_vgg_table(std::span<const CellResult> results) {
  std::ostringstream out;
  std::vector<std::string> hg, vgg;
  std::vector<const CellResult*> cols;
  for (const auto& g : kHourglassVggGrid) {
    hg.push_back(g.hourglass ? "O" : "X");
    vgg.push_back(g.vgg ? "O" : "X");
    cols.push_back(find_result(results, hourglass_vgg_id(g.hourglass, g.vgg)));
  }
  table_row(out, "Hourglass Block", hg);
  table_row(out, "VGG-16", vgg);
  out << "|-----------------|";
  for (std::size_t i = 0; i < cols.size(); ++i) out << "--------------|";
  out << "\n";
  metric_rows(out, cols);
  return out.str();
}

std::string format_plan(const AblationSpec& spec) {
  std::ostringstream out;
  const auto cells = spec.cells();
  out << cells.size() << " cells\n";
  for (const auto& c : cells) {
    const auto& k = c.config;
    out << "  " << c.id << ": epochs=" << k.epochs << " batch=" << k.batch_size << " lr=" << k.lr
        << " lambda_lf=" << lambda_label(k.weights.lf) << " d_stop_epoch=" << k.d_stop_epoch
        << " hourglass=" << (k.hourglass ? "on" : "off") << " hf_loss=" << (k.hf_loss ? "on" : "off")
        << " width_divisor=" << k.width_divisor << "\n";
  }
  return out.str();
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"JPEG artifact restoration toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose);
  app.add_flag("-q,--quiet", quiet);

  std::string in, out, checkpoint, restored, split_name = "test", eval_split = "test", grid = "all";
  int quality = codec::kMaxCompressionQuality;
  std::uint64_t seed = 0;
  double ratio = 0.8;
  std::size_t count = 32;
  bool no_clobber = false, dry_run = false, full_scale = false, resume = false;

  auto* compress = app.add_subcommand("compress", "encode PNG files as baseline JPEG");
  auto* roundtrip = app.add_subcommand("roundtrip", "encode and decode PNG files, writing the decoded PNGs");
  for (auto* sub : {compress, roundtrip}) {
    sub->add_option("--in", in, "directory of PNG files")->required();
    sub->add_option("--out", out)->required();
    sub->add_option("--quality", quality)->check(CLI::Range(1, 100));
    sub->add_flag("--no-clobber", no_clobber);
  }

  auto* build = app.add_subcommand("build-dataset", "compress a PNG corpus into training pairs");
  build->add_option("--in", in)->required();
  build->add_option("--out", out)->required();
  build->add_option("--quality", quality)->check(CLI::Range(1, 100));
  build->add_option("--seed", seed);
  build->add_option("--train-ratio", ratio)->check(CLI::Range(0.0, 1.0));
  build->add_flag("--no-clobber", no_clobber);

  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "train the restoration GAN on a dataset");
  train_cmd->add_option("--in", in, "dataset directory")->required();
  train_cmd->add_option("--checkpoint,--out", checkpoint, "checkpoint directory")->required();
  train_cmd->add_flag("--resume", resume);
  train_cmd->add_flag("--no-clobber", no_clobber);
  train_flags.add(*train_cmd);

  auto* restore_cmd = app.add_subcommand("restore", "restore compressed PNGs with a trained generator");
  restore_cmd->add_option("--checkpoint", checkpoint, "checkpoint file or directory")->required();
  restore_cmd->add_option("--in", in)->required();
  restore_cmd->add_option("--out", out)->required();
  restore_cmd->add_flag("--no-clobber", no_clobber);

  auto* evaluate = app.add_subcommand("evaluate", "score compressed and restored images against originals");
  evaluate->add_option("--in", in, "dataset directory")->required();
  evaluate->add_option("--restored", restored, "directory of restored PNGs named by source id");
  evaluate->add_option("--split", split_name)->check(CLI::IsMember({"train", "test", "all"}));
  evaluate->add_option("--out", out, "JSONL report file");

  TrainFlags ablate_flags;
  auto* ablate = app.add_subcommand("ablate", "run the lambda/stop and hourglass/feature-loss grids");
  ablate->add_option("--in", in, "dataset directory");
  ablate->add_option("--out", out, "directory for tables.md and cells.jsonl");
  ablate->add_option("--grid", grid)->check(CLI::IsMember({"lambda-stop", "hourglass-vgg", "all"}));
  ablate->add_option("--eval-split", eval_split)->check(CLI::IsMember({"train", "test"}));
  ablate->add_flag("--dry-run", dry_run, "print the planned grid without training");
  ablate->add_flag("--full-scale", full_scale, "full-width networks and the default hyperparameters");
  ablate->add_flag("--no-clobber", no_clobber);
  ablate_flags.add(*ablate);

  auto* synth = app.add_subcommand("synth-corpus", "write procedural 128x128 PNG images");
  synth->add_option("--out", out)->required();
  synth->add_option("--count", count)->check(CLI::PositiveNumber);
  synth->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  set_log_level(quiet ? LogLevel::Warning : verbose ? LogLevel::Debug : LogLevel::Info);

  try {
    if (*compress) return cmd_compress(in, out, quality, no_clobber, false);
    if (*roundtrip) return cmd_compress(in, out, quality, no_clobber, true);
    if (*build) return cmd_build_dataset(in, out, quality, seed, ratio, no_clobber);
    if (*train_cmd) {
      train::TrainConfig cfg;
      train_flags.apply(cfg);
      return cmd_train(in, checkpoint, cfg, resume, no_clobber);
    }
    if (*restore_cmd) return cmd_restore(checkpoint, in, out, no_clobber);
    if (*evaluate) return cmd_evaluate(in, restored, split_name, out);
    if (*ablate) {
      AblationSpec spec = full_scale ? full_scale_spec() : desk_scale_spec();
      ablate_flags.apply(spec.base);
      spec.lambda_stop = grid != "hourglass-vgg";
      spec.hourglass_vgg = grid != "lambda-stop";
      if (!dry_run && in.empty()) throw PreconditionError("ablate needs --in unless --dry-run is given");
      if (full_scale && spec.base.vgg_weights.empty())
        log_warning(std::string("no pretrained VGG16 weights (set ") + kVggWeightsEnv +
                    "); the feature loss uses a random stand-in");
      return cmd_ablate(spec, in, out, eval_split == "train" ? EvalSplit::Train : EvalSplit::Test, dry_run,
                        no_clobber);
    }
    if (*synth) {
      const auto paths = dataset::write_synthetic_corpus(out, count, seed);
      std::cout << paths.size() << " images written to " << out << "\n";
      return 0;
    }
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("jpr");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace jpr::cli
