#pragma once

#include <cstdint>
#include <string>

#include "attrep/augment.hpp"
#include "attrep/losses.hpp"
#include "attrep/model.hpp"
#include "attrep/train.hpp"

#include <json.hpp>

namespace attrep {

struct DataConfig {
  std::string kind = "synthetic";  // "cifar10" | "synthetic"
  std::string dir;                 // CIFAR-10 binary directory
  int n_per_class = 50;            // deficient-regime subsample of the train split
  int num_classes = 10;
  int image_size = 32;
  int synthetic_test_per_class = 100;
  double synthetic_noise = 48.0;
  double val_fraction = 0.1;  // eval split carved from train when no test split exists
  void validate() const;
};

// Everything a run needs; serialized verbatim into the run directory and the
// checkpoint header.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "runs/run";
  DataConfig data;
  ModelSpec model;
  LossConfig loss;
  ScheduleConfig schedule;
  AugPolicy augment;
  TrainOptions train;
  void validate() const;
};

// Strict parsers: every key must be known, every value in range.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& cfg);

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);

// FNV-1a hash (hex) of the canonical JSON dump; stored in checkpoints and
// run directories to pin the exact configuration.
std::string config_digest(const RunConfig& cfg);

// Library version and source revision baked in at build time.
const char* code_revision();

// Applies the ATTREP_OUTPUT_ROOT environment override to a relative path.
std::string resolve_output_dir(const std::string& dir);

}  // namespace attrep
