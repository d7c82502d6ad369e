#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "cetnet/features.hpp"
#include "cetnet/nn.hpp"
#include "cetnet/tensor.hpp"

namespace cetnet {

enum class ComponentKind { kMlpTower, kCrossNet, kSeqAttention, kHierEnsemble };

std::string to_string(ComponentKind kind);
ComponentKind component_kind_from_string(const std::string& s);

struct ComponentConfig {
  std::string name;
  ComponentKind kind = ComponentKind::kMlpTower;
  std::size_t depth = 2;
  std::size_t hidden = 64;
  std::size_t d_out = 16;
  // Width of this component's embedding table rows.
  std::size_t embed_dim = 16;
  // Hidden width of the attention scorer (seq_attention only).
  std::size_t attention_hidden = 16;

  void validate() const;
  bool operator==(const ComponentConfig&) const = default;
};

/// Embedded features for one component, as produced by its embedding bank slot.
struct ComponentInputs {
  Tensor sparse;                                 // [B x n x d]
  std::vector<Tensor> sequences;                 // k tensors of [B x N x d]
  std::vector<std::vector<std::size_t>> lengths; // k vectors of [B]
  Tensor dense;                                  // [B x d]
  std::size_t target_index = 0;                  // sparse field used as attention query

  std::size_t batch() const { return sparse.dim(0); }
  std::size_t embed_dim() const { return sparse.dim(2); }
};

struct ComponentOutput {
  Tensor embedding;   // [B x d_out]
  Tensor prediction;  // [B], clamped into [kProbEps, 1 - kProbEps]
};

/// Masked-mean pools each sequence and concatenates
/// [sparse rows | pooled sequences | dense] into [B x (n + k + 1) * d].
Tensor flatten_inputs(const ComponentInputs& in);

std::size_t flattened_width(const FeatureSchema& schema, std::size_t embed_dim);

// ---------------------------------------------------------------------------
// Bodies. Each maps inputs to the output embedding e_m.
// ---------------------------------------------------------------------------

// Stacked (linear, ReLU) layers; the last layer has width d_out.
struct MlpTower {
  Mlp tower;
  Tensor encode(const ComponentInputs& in) const { return tower(flatten_inputs(in)); }
  void register_to(ParamStore& store, const std::string& prefix) const;
};

// x_{l+1} = x_0 * (x_l W_l + b_l) + x_l, then a linear map to d_out.
struct CrossNet {
  std::vector<Linear> layers;
  Linear out;
  Tensor encode(const ComponentInputs& in) const;
  void register_to(ParamStore& store, const std::string& prefix) const;
};

// Target-aware attention over each sequence. Scores come from an MLP over
// [h_t | q | h_t * q]; pooled contexts join the sparse and dense features in a tower.
struct SeqAttention {
  Mlp scorer;
  Mlp tower;
  Tensor encode(const ComponentInputs& in) const;
  // Attention weights [B x N] for one sequence field.
  Tensor attention_weights(const ComponentInputs& in, std::size_t field) const;
  void register_to(ParamStore& store, const std::string& prefix) const;
};

// Blocks z_{l+1} = proj([cross(z_l) | relu(mlp(z_l))]) + z_l, then a linear map to d_out.
struct HierEnsemble {
  struct Block {
    Linear cross;
    Linear mlp;
    Linear proj;
  };
  std::vector<Block> blocks;
  Linear out;
  Tensor encode(const ComponentInputs& in) const;
  void register_to(ParamStore& store, const std::string& prefix) const;
};

class ComponentModel {
 public:
  using Body = std::variant<MlpTower, CrossNet, SeqAttention, HierEnsemble>;

  /// `head_in` is the width the prediction head consumes (d_out when 0).
  static ComponentModel create(const ComponentConfig& cfg, const FeatureSchema& schema, Rng& rng,
                               std::size_t head_in = 0);

  const ComponentConfig& config() const { return cfg_; }
  Body& body() { return body_; }
  const Body& body() const { return body_; }
  Linear& head() { return head_; }
  const Linear& head() const { return head_; }

  Tensor embed(const ComponentInputs& in) const;
  // sigma(head(x)) clamped, [B].
  Tensor predict(const Tensor& head_input) const;
  ComponentOutput forward(const ComponentInputs& in) const;

  void register_to(ParamStore& store, const std::string& prefix) const;

 private:
  ComponentConfig cfg_;
  Body body_;
  Linear head_;
};

}  // namespace cetnet
