#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "cetnet/features.hpp"
#include "cetnet/metrics.hpp"
#include "cetnet/model.hpp"
#include "cetnet/optimizer.hpp"

namespace cetnet {

// Output root override for relative output directories.
inline constexpr const char* kOutputRootEnv = "CETNET_OUTPUT_ROOT";

struct DataConfig {
  std::string source = "synthetic";  // synthetic | csv
  std::string csv;                   // path, csv source only
  // Generator settings; its schema mirrors TrainConfig::model.schema.
  SyntheticSpec synthetic;
  SplitFractions split;
  std::uint64_t split_seed = 7;

  bool operator==(const DataConfig&) const = default;
};

struct EvalConfig {
  // One-epoch runs sample validation NE every `cadence` optimizer steps.
  std::size_t cadence = 50;
  GaucWeighting gauc_weighting = GaucWeighting::kUniform;
  // Score the training split with the selected parameters at the end of a run.
  bool train_metrics = true;
  bool write_checkpoint = true;

  bool operator==(const EvalConfig&) const = default;
};

struct TrainConfig {
  // Free-form tag (ablation variant, sweep cell); part of the config hash.
  std::string label;
  DataConfig data;
  ModelConfig model;
  OptimizerConfig optimizer;
  std::size_t batch_size = 1024;
  std::size_t epochs = 1;
  std::uint64_t seed = 42;
  bool shuffle = true;
  EvalConfig eval;
  std::string output_dir = "runs";

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Canonical JSON form. Missing keys take defaults on the way back in;
/// unknown keys are a ConfigError.
nlohmann::json config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const nlohmann::json& j);

/// YAML config text or file. Same layout as the JSON form.
TrainConfig parse_config(const std::string& yaml_text);
TrainConfig load_config(const std::string& path);

// Hex FNV-1a 64 of the canonical JSON, excluding output_dir.
std::string config_hash(const TrainConfig& cfg);

// output_dir, placed under $CETNET_OUTPUT_ROOT when that is set and the path is relative.
std::string resolve_output_dir(const TrainConfig& cfg);

}  // namespace cetnet
