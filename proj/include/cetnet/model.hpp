#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cetnet/components.hpp"
#include "cetnet/embedding_bank.hpp"
#include "cetnet/features.hpp"
#include "cetnet/fusion.hpp"
#include "cetnet/nn.hpp"

namespace cetnet {

// Which embedding a component's own prediction head reads.
enum class HeadInput { kRaw, kProjected };

std::string to_string(HeadInput h);
HeadInput head_input_from_string(const std::string& s);

struct ModelConfig {
  FeatureSchema schema;
  std::vector<ComponentConfig> components;
  BankMode bank_mode = BankMode::kMulti;
  bool share_dense_mlp = true;
  FusionConfig fusion;
  std::size_t d_proj = 16;
  HeadInput head_input = HeadInput::kRaw;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);
void to_json(nlohmann::json& j, const ComponentConfig& c);
void from_json(const nlohmann::json& j, ComponentConfig& c);
void to_json(nlohmann::json& j, const FusionConfig& c);
void from_json(const nlohmann::json& j, FusionConfig& c);

struct ForwardPass {
  std::vector<Tensor> embeddings;   // e_m, [B x d_out]
  std::vector<Tensor> projected;    // e'_m, [B x d_proj]; empty in single mode
  std::vector<Tensor> predictions;  // per-component heads, [B]
  FusionResult fusion;              // unset in single mode
  Tensor prediction;                // model output, [B]
};

// Plain-number outputs for evaluation.
struct Predictions {
  std::vector<double> fused;
  std::vector<std::vector<double>> components;
};

/// Embedding bank, component models, per-component projections and the
/// fused readout, with every trainable leaf registered by name.
class Model {
 public:
  static Model create(const ModelConfig& cfg, Rng& rng);

  const ModelConfig& config() const { return cfg_; }
  const EmbeddingBank& bank() const { return bank_; }
  const std::vector<ComponentModel>& components() const { return components_; }
  const std::vector<Linear>& projections() const { return projections_; }
  const Linear& readout_layer() const { return readout_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  bool single() const { return cfg_.fusion.mode == FusionMode::kSingle; }

  ComponentInputs inputs(std::size_t component, const ExampleBatch& batch) const;
  ForwardPass forward(const ExampleBatch& batch) const;
  Objective objective(const ForwardPass& pass, std::span<const double> labels) const;

  // Forward without recording a graph.
  Predictions predict(const ExampleBatch& batch) const;
  // Same, over a whole dataset in chunks of `chunk` rows.
  Predictions predict(const Dataset& data, std::size_t chunk = 4096) const;

 private:
  ModelConfig cfg_;
  EmbeddingBank bank_;
  std::vector<ComponentModel> components_;
  std::vector<Linear> projections_;
  Linear readout_;
  ParamStore params_;
};

}  // namespace cetnet
