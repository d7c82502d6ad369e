#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cetnet/nn.hpp"

namespace cetnet {

struct OptimizerConfig {
  std::string kind = "adam";
  double lr = 1e-3;
  double weight_decay = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
  bool operator==(const OptimizerConfig&) const = default;
};

/// Adam with decoupled weight decay over every leaf in a ParamStore.
class Adam {
 public:
  Adam(const ParamStore& params, OptimizerConfig cfg);

  // Applies one update from the gradients currently held by the parameters.
  void step();
  std::size_t steps() const { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  OptimizerConfig cfg_;
  std::size_t t_ = 0;
};

}  // namespace cetnet
