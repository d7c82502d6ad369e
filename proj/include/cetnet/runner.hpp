#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cetnet/checkpoint.hpp"
#include "cetnet/config.hpp"
#include "cetnet/fusion.hpp"
#include "cetnet/metrics.hpp"
#include "cetnet/model.hpp"

namespace cetnet {

// Fused and per-component metrics for one dataset.
struct EvalReport {
  MetricsReport fused;
  std::vector<std::string> names;
  std::vector<MetricsReport> components;
};

struct EpochLog {
  std::size_t epoch = 0;
  LossBreakdown train_loss;  // mean over the epoch's batches
  EvalReport val;
  double seconds = 0.0;
};

struct CurvePoint {
  std::size_t step = 0;
  double ne = 0.0;
};

struct RunRecord {
  std::string config_hash;
  std::string label;
  nlohmann::json config;  // post-transformation config
  std::size_t parameters = 0;
  std::size_t steps = 0;
  std::size_t best_epoch = 0;
  std::vector<EpochLog> epochs;
  EvalReport val;  // at the selected epoch
  EvalReport test;
  std::optional<EvalReport> train;
  std::vector<CurvePoint> ne_curve;
  double wall_seconds = 0.0;
  std::string checkpoint;
};

void to_json(nlohmann::json& j, const EvalReport& r);
void to_json(nlohmann::json& j, const RunRecord& r);

DatasetSplits prepare_data(const TrainConfig& cfg);

/// Keeps one split per distinct data section so sweeps generate data once.
class DataCache {
 public:
  const DatasetSplits& get(const TrainConfig& cfg);

 private:
  std::map<std::string, DatasetSplits> cache_;
};

EvalReport evaluate(const Model& model, const Dataset& data,
                    GaucWeighting weighting = GaucWeighting::kUniform);

struct LoadedModel {
  TrainConfig config;
  Model model;
};

LoadedModel load_model(const std::string& checkpoint_path);

// Scores `data` with a saved model. A schema that differs from the model's is a ConfigError.
EvalReport evaluate(const std::string& checkpoint_path, const Dataset& data);

/// Trains with per-epoch validation, keeps the parameters of the best
/// validation AUC and reports test metrics for them. Writes the checkpoint
/// when enabled. A non-finite loss raises DivergenceError with the batch index.
RunRecord train(const TrainConfig& cfg, const DatasetSplits& data);
RunRecord train(const TrainConfig& cfg);

/// Single pass in stored order; validation NE every eval.cadence steps plus the last step if off-cadence.
RunRecord one_epoch(const TrainConfig& cfg, const DatasetSplits& data);

enum class AblationVariant {
  kFull,
  kNoConfidenceFusion,
  kNoKl,
  kNoMultiEmbedding,
  kNoGradientStop,
  kSingleEmbeddingConcat,
  kMultiEmbeddingConcat,
};

std::string to_string(AblationVariant v);
AblationVariant ablation_from_string(const std::string& s);
std::vector<AblationVariant> all_ablations();  // the six variants, without kFull

TrainConfig apply_ablation(const TrainConfig& base, AblationVariant variant);
RunRecord run_ablation(const TrainConfig& base, AblationVariant variant, const DatasetSplits& data);

enum class SweepMode { kSe, kMe, kOursSum, kOursConcat };

std::string to_string(SweepMode m);
SweepMode sweep_mode_from_string(const std::string& s);

/// Config for one sweep cell. The base dimension is the first component's
/// embed_dim. At multiplier 1 every mode is the single base model.
TrainConfig sweep_config(const TrainConfig& base, SweepMode mode, std::size_t multiplier);

struct SweepCell {
  SweepMode mode;
  std::size_t multiplier;
  std::uint64_t seed;
  RunRecord record;
};

std::vector<SweepCell> scale_sweep(const TrainConfig& base, const std::vector<std::size_t>& multipliers,
                                   const std::vector<SweepMode>& modes,
                                   const std::vector<std::uint64_t>& seeds, DataCache& cache);

// One JSON object per line.
void append_record(const std::string& path, const RunRecord& record);
void write_sweep_csv(const std::string& path, const std::vector<SweepCell>& cells);

}  // namespace cetnet
