#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cetnet/rng.hpp"
#include "cetnet/tensor.hpp"

namespace cetnet {

// uniform(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out)))
Tensor xavier_uniform(Rng& rng, std::size_t fan_in, std::size_t fan_out);
Tensor normal_param(Rng& rng, Shape shape, double stddev);
Tensor zeros_param(Shape shape);

/// Named, ordered set of trainable leaves. Registering the same tensor twice
/// (shared parameters) keeps a single entry.
class ParamStore {
 public:
  void add(const std::string& name, const Tensor& t);
  const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::size_t size() const { return items_.size(); }
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

struct Linear {
  Tensor weight;  // [in x out]
  Tensor bias;    // [out]

  static Linear init(Rng& rng, std::size_t in, std::size_t out);
  static Linear zeros(std::size_t in, std::size_t out);
  std::size_t in() const { return weight.dim(0); }
  std::size_t out() const { return weight.dim(1); }
  Tensor operator()(const Tensor& x) const { return add_bias(matmul(x, weight), bias); }
  void register_to(ParamStore& store, const std::string& prefix) const;
};

/// Stack of linear layers with ReLU after every layer except, optionally, the last.
struct Mlp {
  std::vector<Linear> layers;
  bool relu_last = true;

  static Mlp init(Rng& rng, std::size_t in, const std::vector<std::size_t>& widths,
                  bool relu_last);
  std::size_t out() const { return layers.back().out(); }
  Tensor operator()(const Tensor& x) const;
  void register_to(ParamStore& store, const std::string& prefix) const;
};

}  // namespace cetnet
