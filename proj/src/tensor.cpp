#include "cetnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace cetnet {

using detail::Node;

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

namespace {

thread_local bool g_grad_enabled = true;

void check_finite(const Node& n) {
  for (double v : n.value) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value produced by ") + n.op);
    }
  }
}

std::shared_ptr<Node> make_leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor of shape " + shape_str(shape) + " given " +
                     std::to_string(values.size()) + " values");
  }
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  check_finite(*n);
  return n;
}

// Builds an op result. Parents are recorded only when one of them needs grad.
Tensor make_result(const char* op, Shape shape, std::vector<double> values,
                   std::vector<std::shared_ptr<Node>> parents,
                   std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->shape = std::move(shape);
  n->value = std::move(values);
  check_finite(*n);
  bool any = std::any_of(parents.begin(), parents.end(),
                         [](const auto& p) { return p->requires_grad; });
  if (any && g_grad_enabled) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward = std::move(backward);
  }
  return Tensor(std::move(n));
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw ArgumentError(std::string(op) + ": undefined tensor");
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  require_defined(t, op);
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_str(t.shape()));
  }
}

template <class F, class G>
Tensor unary(const char* op, const Tensor& x, F f, G dfdx) {
  require_defined(x, op);
  const auto& xv = x.node()->value;
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  return make_result(op, x.shape(), std::move(out), {x.node()}, [dfdx](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      p.grad[i] += self.grad[i] * dfdx(p.value[i], self.value[i]);
    }
  });
}

enum class Broadcast { kNone, kScalarA, kScalarB };

Broadcast binary_mode(const Tensor& a, const Tensor& b, const char* op) {
  require_defined(a, op);
  require_defined(b, op);
  if (a.shape() == b.shape()) return Broadcast::kNone;
  if (b.numel() == 1) return Broadcast::kScalarB;
  if (a.numel() == 1) return Broadcast::kScalarA;
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) + " and " +
                   shape_str(b.shape()));
}

// f(a, b) with partials (da, db) evaluated at (a, b).
template <class F, class DA, class DB>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, F f, DA dfda, DB dfdb) {
  Broadcast mode = binary_mode(a, b, op);
  const Shape& shape = mode == Broadcast::kScalarA ? b.shape() : a.shape();
  std::size_t n = shape_numel(shape);
  const auto& av = a.node()->value;
  const auto& bv = b.node()->value;
  auto ai = [mode](std::size_t i) { return mode == Broadcast::kScalarA ? 0 : i; };
  auto bi = [mode](std::size_t i) { return mode == Broadcast::kScalarB ? 0 : i; };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(av[ai(i)], bv[bi(i)]);
  return make_result(op, shape, std::move(out), {a.node(), b.node()},
                     [dfda, dfdb, ai, bi](Node& self) {
                       Node& pa = *self.parents[0];
                       Node& pb = *self.parents[1];
                       for (std::size_t i = 0; i < self.grad.size(); ++i) {
                         double x = pa.value[ai(i)], y = pb.value[bi(i)];
                         if (pa.requires_grad) pa.grad[ai(i)] += self.grad[i] * dfda(x, y);
                         if (pb.requires_grad) pb.grad[bi(i)] += self.grad[i] * dfdb(x, y);
                       }
                     });
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

// ---------------------------------------------------------------------------
// Tensor
// ---------------------------------------------------------------------------

Tensor Tensor::zeros(Shape shape) {
  std::size_t n = shape_numel(shape);
  return Tensor(make_leaf(std::move(shape), std::vector<double>(n, 0.0), false));
}

Tensor Tensor::full(Shape shape, double fill) {
  std::size_t n = shape_numel(shape);
  return Tensor(make_leaf(std::move(shape), std::vector<double>(n, fill), false));
}

Tensor Tensor::from(Shape shape, std::vector<double> values) {
  return Tensor(make_leaf(std::move(shape), std::move(values), false));
}

Tensor Tensor::scalar(double v) { return from({1}, {v}); }

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  return Tensor(make_leaf(std::move(shape), std::move(values), true));
}

const Shape& Tensor::shape() const {
  require_defined(*this, "shape");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_str(shape()));
  }
  return node_->shape[axis];
}

std::size_t Tensor::numel() const { return node_ ? node_->value.size() : 0; }

std::span<const double> Tensor::data() const {
  require_defined(*this, "data");
  return node_->value;
}

std::span<double> Tensor::mutable_data() {
  require_defined(*this, "mutable_data");
  return node_->value;
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  return node_->value[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool on) {
  require_defined(*this, "set_requires_grad");
  if (!is_leaf()) throw ArgumentError("requires_grad can only be changed on leaf tensors");
  node_->requires_grad = on;
}

bool Tensor::is_leaf() const { return node_ && !node_->backward; }

std::span<const double> Tensor::grad() const {
  require_defined(*this, "grad");
  if (node_->grad.size() != node_->value.size()) node_->grad.assign(node_->value.size(), 0.0);
  return node_->grad;
}

std::vector<double> Tensor::grad_copy() const {
  auto g = grad();
  return {g.begin(), g.end()};
}

void Tensor::zero_grad() {
  require_defined(*this, "zero_grad");
  node_->grad.assign(node_->value.size(), 0.0);
}

void Tensor::backward() const {
  require_defined(*this, "backward");
  if (numel() != 1) {
    throw ArgumentError("backward requires a scalar loss, got shape " + shape_str(shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (n->backward) {
      n->grad.assign(n->value.size(), 0.0);
    } else if (n->grad.size() != n->value.size()) {
      n->grad.assign(n->value.size(), 0.0);
    }
  }
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: inner dimensions differ: " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()));
  }
  const auto& av = a.node()->value;
  const auto& bv = b.node()->value;
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return make_result("matmul", {m, n}, std::move(out), {a.node(), b.node()},
                     [m, k, n](Node& self) {
                       Node& pa = *self.parents[0];
                       Node& pb = *self.parents[1];
                       const double* g = self.grad.data();
                       if (pa.requires_grad) {
                         // dA = dC * B^T
                         for (std::size_t i = 0; i < m; ++i) {
                           const double* grow = g + i * n;
                           for (std::size_t p = 0; p < k; ++p) {
                             const double* brow = pb.value.data() + p * n;
                             double acc = 0.0;
                             for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                             pa.grad[i * k + p] += acc;
                           }
                         }
                       }
                       if (pb.requires_grad) {
                         // dB = A^T * dC
                         for (std::size_t i = 0; i < m; ++i) {
                           const double* grow = g + i * n;
                           for (std::size_t p = 0; p < k; ++p) {
                             const double aip = pa.value[i * k + p];
                             if (aip == 0.0) continue;
                             double* dbrow = pb.grad.data() + p * n;
                             for (std::size_t j = 0; j < n; ++j) dbrow[j] += aip * grow[j];
                           }
                         }
                       }
                     });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor neg(const Tensor& x) {
  return unary(
      "neg", x, [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Tensor sigmoid(const Tensor& x) {
  return unary("sigmoid", x, sigmoid_scalar, [](double, double s) { return s * (1.0 - s); });
}

Tensor log(const Tensor& x) {
  require_defined(x, "log");
  for (double v : x.data()) {
    if (!(v > 0.0)) throw NumericError("log of non-positive value " + std::to_string(v));
  }
  return unary(
      "log", x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor exp(const Tensor& x) {
  return unary(
      "exp", x, [](double v) { return std::exp(v); }, [](double, double e) { return e; });
}

Tensor relu(const Tensor& x) {
  return unary(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      "scale", x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double c) {
  return unary(
      "add_scalar", x, [c](double v) { return v + c; }, [](double, double) { return 1.0; });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  return unary(
      "clamp", x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v, double) { return (v > lo && v < hi) ? 1.0 : 0.0; });
}

namespace {

// Shared softmax kernel: rows of width n, each using its first len[r] entries.
template <class LenFn>
Tensor row_softmax(const char* op, const Tensor& x, std::size_t rows, std::size_t n, LenFn len) {
  const auto& xv = x.node()->value;
  std::vector<double> out(rows * n, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t l = len(r);
    if (l == 0) continue;
    const double* xr = xv.data() + r * n;
    double mx = *std::max_element(xr, xr + l);
    double z = 0.0;
    for (std::size_t j = 0; j < l; ++j) z += (out[r * n + j] = std::exp(xr[j] - mx));
    for (std::size_t j = 0; j < l; ++j) out[r * n + j] /= z;
  }
  return make_result(op, x.shape(), std::move(out), {x.node()}, [rows, n, len](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t l = len(r);
      const double* s = self.value.data() + r * n;
      const double* g = self.grad.data() + r * n;
      double dot = 0.0;
      for (std::size_t j = 0; j < l; ++j) dot += g[j] * s[j];
      for (std::size_t j = 0; j < l; ++j) p.grad[r * n + j] += s[j] * (g[j] - dot);
    }
  });
}

}  // namespace

Tensor softmax(const Tensor& x) {
  require_defined(x, "softmax");
  if (x.numel() == 0) throw ArgumentError("softmax of an empty tensor");
  if (x.rank() == 1) {
    std::size_t n = x.dim(0);
    return row_softmax("softmax", x, 1, n, [n](std::size_t) { return n; });
  }
  require_rank(x, 2, "softmax");
  std::size_t n = x.dim(1);
  return row_softmax("softmax", x, x.dim(0), n, [n](std::size_t) { return n; });
}

Tensor masked_softmax(const Tensor& x, std::span<const std::size_t> lengths) {
  require_rank(x, 2, "masked_softmax");
  const std::size_t rows = x.dim(0), n = x.dim(1);
  if (lengths.size() != rows) {
    throw ShapeError("masked_softmax: " + std::to_string(lengths.size()) + " lengths for " +
                     shape_str(x.shape()));
  }
  std::vector<std::size_t> lens(lengths.begin(), lengths.end());
  for (auto& l : lens) l = std::min(l, n);
  return row_softmax("masked_softmax", x, rows, n, [lens](std::size_t r) { return lens[r]; });
}

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> ids) {
  require_rank(table, 2, "gather_rows");
  const std::size_t v = table.dim(0), d = table.dim(1);
  for (auto id : ids) {
    if (id >= v) {
      throw LookupError("embedding id " + std::to_string(id) + " out of range for table with " +
                        std::to_string(v) + " rows");
    }
  }
  const auto& tv = table.node()->value;
  std::vector<double> out(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(tv.data() + ids[i] * d, d, out.data() + i * d);
  }
  std::vector<std::size_t> idv(ids.begin(), ids.end());
  return make_result("gather_rows", {ids.size(), d}, std::move(out), {table.node()},
                     [idv = std::move(idv), d](Node& self) {
                       Node& p = *self.parents[0];
                       for (std::size_t i = 0; i < idv.size(); ++i) {
                         double* dst = p.grad.data() + idv[i] * d;
                         const double* src = self.grad.data() + i * d;
                         for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
                       }
                     });
}

Tensor stop_gradient(const Tensor& x) {
  require_defined(x, "stop_gradient");
  auto n = std::make_shared<Node>();
  n->op = "stop_gradient";
  n->shape = x.shape();
  n->value = x.node()->value;
  return Tensor(std::move(n));
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw ArgumentError("concat of an empty list");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) {
    throw ShapeError("concat: axis " + std::to_string(axis) + " out of range for " +
                     shape_str(first));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= first[i];
  for (std::size_t i = axis + 1; i < first.size(); ++i) inner *= first[i];

  Shape out_shape = first;
  out_shape[axis] = 0;
  std::vector<std::size_t> chunk;  // contiguous run per outer index, per part
  std::vector<std::shared_ptr<Node>> nodes;
  for (const auto& t : parts) {
    const Shape& s = t.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = (i == axis) || s[i] == first[i];
    if (!ok) {
      throw ShapeError("concat: cannot join " + shape_str(first) + " with " + shape_str(s) +
                       " on axis " + std::to_string(axis));
    }
    out_shape[axis] += s[axis];
    chunk.push_back(s[axis] * inner);
    nodes.push_back(t.node());
  }
  std::size_t row = 0;
  for (auto c : chunk) row += c;
  std::vector<double> out(outer * row);
  for (std::size_t o = 0; o < outer; ++o) {
    std::size_t off = o * row;
    for (std::size_t p = 0; p < parts.size(); ++p) {
      std::copy_n(nodes[p]->value.data() + o * chunk[p], chunk[p], out.data() + off);
      off += chunk[p];
    }
  }
  return make_result("concat", std::move(out_shape), std::move(out), std::move(nodes),
                     [chunk, outer, row](Node& self) {
                       for (std::size_t o = 0; o < outer; ++o) {
                         std::size_t off = o * row;
                         for (std::size_t p = 0; p < chunk.size(); ++p) {
                           Node& pn = *self.parents[p];
                           if (pn.requires_grad) {
                             const double* src = self.grad.data() + off;
                             double* dst = pn.grad.data() + o * chunk[p];
                             for (std::size_t j = 0; j < chunk[p]; ++j) dst[j] += src[j];
                           }
                           off += chunk[p];
                         }
                       }
                     });
}

Tensor reshape(const Tensor& x, Shape shape) {
  require_defined(x, "reshape");
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: " + shape_str(x.shape()) + " to " + shape_str(shape));
  }
  return make_result("reshape", std::move(shape), x.node()->value, {x.node()}, [](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
  });
}

Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t count) {
  require_rank(x, 2, "slice_cols");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  if (start + count > cols) {
    throw ShapeError("slice_cols: [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") out of " + shape_str(x.shape()));
  }
  const auto& xv = x.node()->value;
  std::vector<double> out(rows * count);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(xv.data() + r * cols + start, count, out.data() + r * count);
  }
  return make_result("slice_cols", {rows, count}, std::move(out), {x.node()},
                     [rows, cols, start, count](Node& self) {
                       Node& p = *self.parents[0];
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t j = 0; j < count; ++j) {
                           p.grad[r * cols + start + j] += self.grad[r * count + j];
                         }
                       }
                     });
}

Tensor sum(const Tensor& x) {
  require_defined(x, "sum");
  double s = 0.0;
  for (double v : x.data()) s += v;
  return make_result("sum", {1}, {s}, {x.node()}, [](Node& self) {
    Node& p = *self.parents[0];
    for (auto& g : p.grad) g += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  require_defined(x, "mean");
  if (x.numel() == 0) throw ArgumentError("mean of an empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor row_sum(const Tensor& x) {
  require_rank(x, 2, "row_sum");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  const auto& xv = x.node()->value;
  std::vector<double> out(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r] += xv[r * cols + c];
  }
  return make_result("row_sum", {rows}, std::move(out), {x.node()}, [rows, cols](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) p.grad[r * cols + c] += self.grad[r];
    }
  });
}

Tensor add_bias(const Tensor& x, const Tensor& b) {
  require_rank(x, 2, "add_bias");
  require_defined(b, "add_bias");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  if (b.numel() != cols) {
    throw ShapeError("add_bias: bias " + shape_str(b.shape()) + " for " + shape_str(x.shape()));
  }
  const auto& xv = x.node()->value;
  const auto& bv = b.node()->value;
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = xv[r * cols + c] + bv[c];
  }
  return make_result("add_bias", x.shape(), std::move(out), {x.node(), b.node()},
                     [rows, cols](Node& self) {
                       Node& px = *self.parents[0];
                       Node& pb = *self.parents[1];
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t c = 0; c < cols; ++c) {
                           double g = self.grad[r * cols + c];
                           if (px.requires_grad) px.grad[r * cols + c] += g;
                           if (pb.requires_grad) pb.grad[c] += g;
                         }
                       }
                     });
}

Tensor scale_rows(const Tensor& x, const Tensor& w) {
  require_rank(x, 2, "scale_rows");
  require_defined(w, "scale_rows");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  if (w.numel() != rows) {
    throw ShapeError("scale_rows: weights " + shape_str(w.shape()) + " for " +
                     shape_str(x.shape()));
  }
  const auto& xv = x.node()->value;
  const auto& wv = w.node()->value;
  std::vector<double> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = xv[r * cols + c] * wv[r];
  }
  return make_result("scale_rows", x.shape(), std::move(out), {x.node(), w.node()},
                     [rows, cols](Node& self) {
                       Node& px = *self.parents[0];
                       Node& pw = *self.parents[1];
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t c = 0; c < cols; ++c) {
                           double g = self.grad[r * cols + c];
                           if (px.requires_grad) px.grad[r * cols + c] += g * pw.value[r];
                           if (pw.requires_grad) pw.grad[r] += g * px.value[r * cols + c];
                         }
                       }
                     });
}

Tensor repeat_rows(const Tensor& x, std::size_t times) {
  require_rank(x, 2, "repeat_rows");
  const std::size_t rows = x.dim(0), d = x.dim(1);
  const auto& xv = x.node()->value;
  std::vector<double> out(rows * times * d);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < times; ++t) {
      std::copy_n(xv.data() + r * d, d, out.data() + (r * times + t) * d);
    }
  }
  return make_result("repeat_rows", {rows * times, d}, std::move(out), {x.node()},
                     [rows, times, d](Node& self) {
                       Node& p = *self.parents[0];
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t t = 0; t < times; ++t) {
                           const double* src = self.grad.data() + (r * times + t) * d;
                           for (std::size_t j = 0; j < d; ++j) p.grad[r * d + j] += src[j];
                         }
                       }
                     });
}

Tensor masked_mean(const Tensor& x, std::span<const std::size_t> lengths) {
  require_rank(x, 3, "masked_mean");
  const std::size_t rows = x.dim(0), n = x.dim(1), d = x.dim(2);
  if (lengths.size() != rows) {
    throw ShapeError("masked_mean: " + std::to_string(lengths.size()) + " lengths for " +
                     shape_str(x.shape()));
  }
  std::vector<std::size_t> lens(lengths.begin(), lengths.end());
  for (auto& l : lens) l = std::min(l, n);
  const auto& xv = x.node()->value;
  std::vector<double> out(rows * d, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    if (lens[r] == 0) continue;
    double inv = 1.0 / static_cast<double>(lens[r]);
    for (std::size_t t = 0; t < lens[r]; ++t) {
      const double* src = xv.data() + (r * n + t) * d;
      for (std::size_t j = 0; j < d; ++j) out[r * d + j] += src[j];
    }
    for (std::size_t j = 0; j < d; ++j) out[r * d + j] *= inv;
  }
  return make_result("masked_mean", {rows, d}, std::move(out), {x.node()},
                     [lens = std::move(lens), n, d](Node& self) {
                       Node& p = *self.parents[0];
                       for (std::size_t r = 0; r < lens.size(); ++r) {
                         if (lens[r] == 0) continue;
                         double inv = 1.0 / static_cast<double>(lens[r]);
                         for (std::size_t t = 0; t < lens[r]; ++t) {
                           double* dst = p.grad.data() + (r * n + t) * d;
                           for (std::size_t j = 0; j < d; ++j) dst[j] += self.grad[r * d + j] * inv;
                         }
                       }
                     });
}

Tensor attention_pool(const Tensor& weights, const Tensor& values) {
  require_rank(weights, 2, "attention_pool");
  require_rank(values, 3, "attention_pool");
  const std::size_t rows = weights.dim(0), n = weights.dim(1), d = values.dim(2);
  if (values.dim(0) != rows || values.dim(1) != n) {
    throw ShapeError("attention_pool: weights " + shape_str(weights.shape()) + " vs values " +
                     shape_str(values.shape()));
  }
  const auto& wv = weights.node()->value;
  const auto& vv = values.node()->value;
  std::vector<double> out(rows * d, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < n; ++t) {
      const double a = wv[r * n + t];
      if (a == 0.0) continue;
      const double* src = vv.data() + (r * n + t) * d;
      for (std::size_t j = 0; j < d; ++j) out[r * d + j] += a * src[j];
    }
  }
  return make_result("attention_pool", {rows, d}, std::move(out),
                     {weights.node(), values.node()}, [rows, n, d](Node& self) {
                       Node& pw = *self.parents[0];
                       Node& pv = *self.parents[1];
                       for (std::size_t r = 0; r < rows; ++r) {
                         const double* g = self.grad.data() + r * d;
                         for (std::size_t t = 0; t < n; ++t) {
                           const std::size_t base = (r * n + t) * d;
                           if (pw.requires_grad) {
                             double acc = 0.0;
                             for (std::size_t j = 0; j < d; ++j) acc += g[j] * pv.value[base + j];
                             pw.grad[r * n + t] += acc;
                           }
                           if (pv.requires_grad) {
                             const double a = pw.value[r * n + t];
                             if (a == 0.0) continue;
                             for (std::size_t j = 0; j < d; ++j) pv.grad[base + j] += a * g[j];
                           }
                         }
                       }
                     });
}

}  // namespace cetnet
