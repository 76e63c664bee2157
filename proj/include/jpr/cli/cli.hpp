#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "jpr/dataset/dataset.hpp"
#include "jpr/metrics/metrics.hpp"
#include "jpr/train/trainer.hpp"

namespace jpr::cli {

// Environment variable naming a pretrained VGG16 archive (tools/export_vgg16.py).
inline constexpr const char* kVggWeightsEnv = "JPR_VGG16_WEIGHTS";

enum class AblationTable { LambdaStop, HourglassVgg };

struct AblationCell {
  AblationTable table = AblationTable::LambdaStop;
  std::string id;  // e.g. "lf20-stop", "hg1-vgg0"
  train::TrainConfig config;
};

// Two grids over a base configuration: lambda_lf x {nonstop, stop} and the
// three hourglass/feature-loss combinations. "nonstop" keeps the
// discriminator training for every epoch; "stop" uses base.d_stop_epoch.
struct AblationSpec {
  train::TrainConfig base;
  std::vector<double> lambda_lf{5.0, 10.0, 20.0};
  bool lambda_stop = true;
  bool hourglass_vgg = true;

  std::vector<AblationCell> cells() const;
};

// Small corpus, few epochs, narrow networks.
AblationSpec desk_scale_spec();
// Paper hyperparameters at full width.
AblationSpec full_scale_spec();

enum class EvalSplit { Train, Test };

struct CellResult {
  AblationCell cell;
  bool ok = false;
  std::string error;
  metrics::EvalRow mean;
};

// Trains every cell from scratch and scores the restored images of the chosen
// split. A failing cell is recorded and the remaining cells still run.
std::vector<CellResult> run_ablation(const AblationSpec& spec, const dataset::DatasetSplit& data,
                                     EvalSplit eval_split,
                                     const std::function<void(const CellResult&)>& on_cell = {});

// Metrics x configurations tables. Cells without a result print "-".
std::string format_lambda_stop_table(const AblationSpec& spec, std::span<const CellResult> results);
std::string format_hourglass_vgg_table(std::span<const CellResult> results);
std::string format_plan(const AblationSpec& spec);

// Entry point of the jpr binary. Returns the process exit code.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace jpr::cli
