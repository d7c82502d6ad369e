#include "cetnet/nn.hpp"

#include <algorithm>
#include <cmath>

namespace cetnet {

Tensor xavier_uniform(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  std::vector<double> v(fan_in * fan_out);
  for (auto& x : v) x = dist(rng);
  return Tensor::parameter({fan_in, fan_out}, std::move(v));
}

Tensor normal_param(Rng& rng, Shape shape, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor::parameter(std::move(shape), std::move(v));
}

Tensor zeros_param(Shape shape) {
  std::vector<double> v(shape_numel(shape), 0.0);
  return Tensor::parameter(std::move(shape), std::move(v));
}

void ParamStore::add(const std::string& name, const Tensor& t) {
  for (const auto& [n, existing] : items_) {
    if (existing.id() == t.id()) return;
    if (n == name) throw ArgumentError("duplicate parameter name " + name);
  }
  items_.emplace_back(name, t);
}

const Tensor& ParamStore::get(const std::string& name) const {
  for (const auto& [n, t] : items_) {
    if (n == name) return t;
  }
  throw ArgumentError("unknown parameter " + name);
}

bool ParamStore::contains(const std::string& name) const {
  return std::any_of(items_.begin(), items_.end(), [&](const auto& p) { return p.first == name; });
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : items_) n += t.numel();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [_, t] : items_) t.zero_grad();
}

Linear Linear::init(Rng& rng, std::size_t in, std::size_t out) {
  return {xavier_uniform(rng, in, out), zeros_param({out})};
}

Linear Linear::zeros(std::size_t in, std::size_t out) {
  return {zeros_param({in, out}), zeros_param({out})};
}

void Linear::register_to(ParamStore& store, const std::string& prefix) const {
  store.add(prefix + ".weight", weight);
  store.add(prefix + ".bias", bias);
}

Mlp Mlp::init(Rng& rng, std::size_t in, const std::vector<std::size_t>& widths, bool relu_last) {
  if (widths.empty()) throw ArgumentError("Mlp needs at least one layer");
  Mlp m;
  m.relu_last = relu_last;
  for (auto w : widths) {
    m.layers.push_back(Linear::init(rng, in, w));
    in = w;
  }
  return m;
}

Tensor Mlp::operator()(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = layers[i](h);
    if (relu_last || i + 1 < layers.size()) h = relu(h);
  }
  return h;
}

void Mlp::register_to(ParamStore& store, const std::string& prefix) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].register_to(store, prefix + "." + std::to_string(i));
  }
}

}  // namespace cetnet
