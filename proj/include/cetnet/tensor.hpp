#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cetnet/errors.hpp"

namespace cetnet {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

// Every probability that reaches a log is clamped into [kProbEps, 1 - kProbEps].
inline constexpr double kProbEps = 1e-7;

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents that require grad.
  std::function<void(Node&)> backward;
};

}  // namespace detail

/// Dense row-major float64 array that records the operations producing it.
///
/// Tensors are cheap handles; copies share storage and graph position. A
/// tensor created by an operation keeps its inputs alive until it is dropped.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double fill);
  static Tensor from(Shape shape, std::vector<double> values);
  static Tensor scalar(double v);
  // Leaf that accumulates gradient.
  static Tensor parameter(Shape shape, std::vector<double> values);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  // Direct write access; intended for parameter leaves (optimizers, init, tests).
  std::span<double> mutable_data();
  double item() const;
  double operator[](std::size_t i) const { return data()[i]; }

  bool requires_grad() const;
  void set_requires_grad(bool on);
  bool is_leaf() const;

  // Zeros when backward has not reached this tensor.
  std::span<const double> grad() const;
  std::vector<double> grad_copy() const;
  void zero_grad();

  /// Reverse-mode sweep from this scalar. Intermediate gradients are rebuilt
  /// on every call; leaf gradients accumulate until zero_grad().
  void backward() const;

  const detail::Node* id() const { return node_.get(); }

  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// While alive on this thread, operations record no graph.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// ---------------------------------------------------------------------------
// Primitives. All results are checked finite; a non-finite value throws
// NumericError naming the operation.
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);

// Binary elementwise ops take equal shapes or a one-element operand.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& x);
Tensor sigmoid(const Tensor& x);
// Throws NumericError on any non-positive input.
Tensor log(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double c);
// Gradient passes only where lo < x < hi.
Tensor clamp(const Tensor& x, double lo, double hi);

// Softmax along the last axis (1-D or 2-D), max-subtracted.
Tensor softmax(const Tensor& x);
// x: [R x N]. Row r is softmaxed over its first lengths[r] entries; the rest
// are exactly 0. A row of length 0 is all zeros.
Tensor masked_softmax(const Tensor& x, std::span<const std::size_t> lengths);

// table: [V x d] -> [n x d]. Backward scatter-adds, duplicates accumulate.
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> ids);

// Forward identity; contributes nothing to any ancestor's gradient.
Tensor stop_gradient(const Tensor& x);

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor reshape(const Tensor& x, Shape shape);
Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t count);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// [R x C] -> [R]
Tensor row_sum(const Tensor& x);

// x: [R x C] + b: [C]
Tensor add_bias(const Tensor& x, const Tensor& b);
// x: [R x C] scaled row-wise by w: [R]
Tensor scale_rows(const Tensor& x, const Tensor& w);
// x: [R x d] -> [R*times x d], each row repeated `times` times consecutively.
Tensor repeat_rows(const Tensor& x, std::size_t times);

// x: [R x N x d] -> [R x d], mean over the first lengths[r] positions
// (zero vector when lengths[r] == 0).
Tensor masked_mean(const Tensor& x, std::span<const std::size_t> lengths);
// weights: [R x N], values: [R x N x d] -> [R x d]
Tensor attention_pool(const Tensor& weights, const Tensor& values);

}  // namespace cetnet
