#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "attrep/checkpoint.hpp"
#include "attrep/config.hpp"
#include "attrep/data.hpp"
#include "attrep/metrics.hpp"
#include "attrep/train.hpp"

namespace attrep {

// Train and eval splits materialized from a DataConfig. For cifar10, train is
// the deficient-regime subsample of the train batches and eval is
// test_batch.bin (or a carved val_fraction split when the test file is
// absent). For synthetic, one generated pool is split into train/test with
// shared class templates.
struct DataSplits {
  Dataset train;
  Dataset eval;
};
DataSplits load_splits(const DataConfig& cfg, std::uint64_t seed);

struct RunResult {
  std::string run_dir;
  EvalMetrics final_metrics;
  LossBreakdown final_breakdown;
  std::vector<MetricsRecord> records;
};

// Full training run: writes config.json, metrics.csv, timings.csv,
// checkpoint.bin and code_version.txt into the run directory. `resume_from`
// continues bit-exactly from a saved checkpoint of the same config.
RunResult run_training(const RunConfig& cfg, const std::string& resume_from = "",
                       std::ostream* log = nullptr);

// Cumulative ablation ladder; each stage enables one more component on top of
// the previous stage. The final stage retrains nothing: it re-evaluates the
// +aux_classifier checkpoints with head fusion switched on.
std::vector<std::string> ablation_ladder();
// Stage configs are derived from the base config: earlier stages zero the
// weights of components that are not yet enabled.
RunConfig ablation_stage_config(const RunConfig& base, int stage);

struct AblationRow {
  std::string stage;
  std::vector<double> student_top1;  // per seed; NaN marks a failed run
  std::vector<double> teacher_top1;
  double mean = 0.0, stddev = 0.0;  // over student_top1
  std::vector<std::string> failures;
};

struct AblationReport {
  std::vector<AblationRow> rows;
  std::string report_csv;
  std::string report_txt;
};

// Runs stages x seeds, writes report.csv and report.txt under out_dir and
// archives every stage's full config. A failing run is recorded and the
// report is still produced.
AblationReport run_ablation(const RunConfig& base, int num_stages,
                            const std::vector<std::uint64_t>& seeds, const std::string& out_dir,
                            std::ostream* log = nullptr);

// Arithmetic mean of per-model probability vectors, per sample.
std::vector<Vec> ensemble_average(const std::vector<std::vector<Vec>>& per_model_probs);

// Penultimate features + labels as CSV (label,f0,...,f{F-1}).
void export_features(const Network& net, const Eigen::VectorXd& params, const Dataset& ds,
                     const AugPolicy& policy, const std::string& path);

}  // namespace attrep
