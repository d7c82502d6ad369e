#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cetnet/nn.hpp"
#include "cetnet/tensor.hpp"

namespace cetnet {

enum class FusionMode {
  kWeightedConcat,  // [w_1 e'_1 | ... | w_N e'_N]
  kWeightedSum,     // sum_m w_m e'_m
  kPlainConcat,     // [e'_1 | ... | e'_N], weights reported as 1/N
  kSingle,          // one component, its own head is the prediction
};

std::string to_string(FusionMode mode);
FusionMode fusion_mode_from_string(const std::string& s);

struct FusionConfig {
  FusionMode mode = FusionMode::kWeightedConcat;
  bool use_confidence = true;
  bool use_gradient_stop = true;
  double alpha = 0.5;
  std::size_t n_components = 2;
  // Include the per-component BCE terms in the objective.
  bool component_losses = true;

  void validate() const;
  bool operator==(const FusionConfig&) const = default;
};

struct FusionResult {
  Tensor confidences;  // [B x N]
  Tensor weights;      // [B x N]
  Tensor fused;        // [B x D]
  Tensor prediction;   // [B]
};

struct LossBreakdown {
  std::vector<double> component;  // L_m
  double fusion = 0.0;            // L_fusion
  double kl = 0.0;                // L_kl
  double total = 0.0;             // L_final
};

struct Objective {
  Tensor total;
  LossBreakdown breakdown;
};

// -(p ln p) - (1-p) ln(1-p), after clamping p into [kProbEps, 1 - kProbEps].
Tensor binary_entropy(const Tensor& p);

// C = -H(p); detached from the graph when `gradient_stop` is set.
Tensor confidence(const Tensor& p, bool gradient_stop);

// Per-example softmax over components. confidences: N tensors of [B] -> [B x N].
Tensor fusion_weights(const std::vector<Tensor>& confidences);

// projected: N tensors of [B x d_proj]; weights: [B x N].
Tensor fuse(const std::vector<Tensor>& projected, const Tensor& weights, FusionMode mode);

// sigma(e W + b), clamped. [B x D] -> [B]
Tensor readout(const Linear& layer, const Tensor& fused);

// Mean binary cross-entropy in nats.
Tensor bce(const Tensor& p, std::span<const double> labels);

// Batch mean of 1/2 KL(a||b) + 1/2 KL(b||a) for Bernoulli predictions.
Tensor symmetric_kl(const Tensor& a, const Tensor& b);

// Mean of symmetric_kl over all unordered pairs; zero for fewer than two inputs.
Tensor pairwise_symmetric_kl(const std::vector<Tensor>& predictions);

/// Confidence-based fusion of projected component embeddings.
FusionResult fuse_components(const FusionConfig& cfg, const std::vector<Tensor>& predictions,
                             const std::vector<Tensor>& projected, const Linear& readout_layer);

/// L_final = L_fusion + sum_m L_m + alpha * L_kl from already-computed scalar terms.
Objective total_objective(const Tensor& fusion_loss, const std::vector<Tensor>& component_losses,
                          const Tensor& kl_loss, double alpha);

/// Same arithmetic on plain numbers.
LossBreakdown total_objective(double fusion_loss, const std::vector<double>& component_losses,
                              double kl_loss, double alpha);

}  // namespace cetnet
