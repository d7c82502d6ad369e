#pragma once

// Small random instances of every differentiable primitive, for finite-difference checks.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "test_support.hpp"

namespace cetnet::testing {

struct PrimitiveCase {
  const char* name;
  // Builds leaves from rng and returns (loss function, leaves).
  std::function<std::pair<std::function<Tensor()>, std::vector<std::pair<std::string, Tensor>>>(Rng&)> make;
};

using Leaves = std::vector<std::pair<std::string, Tensor>>;
using Made = std::pair<std::function<Tensor()>, Leaves>;

template <class F>
inline PrimitiveCase unary(const char* name, F op, double lo = -2, double hi = 2) {
  return {name, [op, lo, hi](Rng& rng) -> Made {
            const Tensor x = rand_param(rng, {3, 4}, lo, hi);
            const Shape out = op(x).shape();
            const Tensor w = Tensor::from(out, uniform_values(rng, shape_numel(out), -1, 1));
            return {[=] { return sum(mul(op(x), w)); }, {{"x", x}}};
          }};
}

template <class F>
inline PrimitiveCase binary(const char* name, F op) {
  return {name, [op](Rng& rng) -> Made {
            const Tensor a = rand_param(rng, {3, 4});
            const Tensor b = rand_param(rng, {3, 4});
            const Tensor w = Tensor::from({3, 4}, uniform_values(rng, 12, -1, 1));
            return {[=] { return sum(mul(op(a, b), w)); }, {{"a", a}, {"b", b}}};
          }};
}

inline std::vector<PrimitiveCase> primitive_cases() {
  return {
      binary("add", [](const Tensor& a, const Tensor& b) { return add(a, b); }),
      binary("sub", [](const Tensor& a, const Tensor& b) { return sub(a, b); }),
      binary("mul", [](const Tensor& a, const Tensor& b) { return mul(a, b); }),
      unary("neg", [](const Tensor& x) { return neg(x); }),
      unary("sigmoid", [](const Tensor& x) { return sigmoid(x); }),
      unary("log", [](const Tensor& x) { return log(x); }, 0.2, 2.0),
      unary("exp", [](const Tensor& x) { return exp(x); }),
      unary("scale", [](const Tensor& x) { return scale(x, -1.7); }),
      unary("add_scalar", [](const Tensor& x) { return add_scalar(x, 0.3); }),
      unary("softmax", [](const Tensor& x) { return softmax(x); }),
      unary("sum", [](const Tensor& x) { return sum(x); }),
      unary("mean", [](const Tensor& x) { return mean(x); }),
      unary("row_sum", [](const Tensor& x) { return row_sum(x); }),
      unary("reshape", [](const Tensor& x) { return reshape(x, {4, 3}); }),
      unary("slice_cols", [](const Tensor& x) { return slice_cols(x, 1, 2); }),
      unary("repeat_rows", [](const Tensor& x) { return repeat_rows(x, 3); }),
      {"relu",
       [](Rng& rng) -> Made {
         const Tensor x = rand_param_away_from_zero(rng, {3, 4});
         return {[x, w = Tensor::from({3, 4}, uniform_values(rng, 12, -1, 1))] {
                   return sum(mul(relu(x), w));
                 },
                 {{"x", x}}};
       }},
      {"clamp",
       [](Rng& rng) -> Made {
         // Values kept off the clamp boundaries at +-1.
         auto v = uniform_values(rng, 12, -0.9, 0.9);
         for (std::size_t i = 0; i < 4; ++i) v[i] = 1.2 + 0.5 * std::abs(v[i]);
         const Tensor x = Tensor::parameter({3, 4}, v);
         return {[x] { return sum(mul(clamp(x, -1.0, 1.0), x)); }, {{"x", x}}};
       }},
      {"matmul",
       [](Rng& rng) -> Made {
         const Tensor a = rand_param(rng, {3, 4});
         const Tensor b = rand_param(rng, {4, 2});
         return {[a, b] { return sum(matmul(a, b)); }, {{"a", a}, {"b", b}}};
       }},
      {"add_bias",
       [](Rng& rng) -> Made {
         const Tensor x = rand_param(rng, {3, 4});
         const Tensor b = rand_param(rng, {4});
         return {[x, b, w = Tensor::from({3, 4}, uniform_values(rng, 12, -1, 1))] {
                   return sum(mul(add_bias(x, b), w));
                 },
                 {{"x", x}, {"b", b}}};
       }},
      {"scale_rows",
       [](Rng& rng) -> Made {
         const Tensor x = rand_param(rng, {3, 4});
         const Tensor s = rand_param(rng, {3});
         const Tensor w = Tensor::from({3, 4}, uniform_values(rng, 12, -1, 1));
         return {[=] { return sum(mul(scale_rows(x, s), w)); }, {{"x", x}, {"s", s}}};
       }},
      {"concat",
       [](Rng& rng) -> Made {
         const Tensor a = rand_param(rng, {3, 2});
         const Tensor b = rand_param(rng, {3, 3});
         const Tensor w = Tensor::from({3, 5}, uniform_values(rng, 15, -1, 1));
         return {[=] { return sum(mul(concat({a, b}, 1), w)); }, {{"a", a}, {"b", b}}};
       }},
      {"concat_axis0",
       [](Rng& rng) -> Made {
         const Tensor a = rand_param(rng, {2, 3});
         const Tensor b = rand_param(rng, {1, 3});
         const Tensor w = Tensor::from({3, 3}, uniform_values(rng, 9, -1, 1));
         return {[=] { return sum(mul(concat({a, b}, 0), w)); }, {{"a", a}, {"b", b}}};
       }},
      {"gather_rows",
       [](Rng& rng) -> Made {
         const Tensor table = rand_param(rng, {6, 3});
         std::uniform_int_distribution<std::size_t> pick(0, 5);
         std::vector<std::size_t> ids(8);
         for (auto& i : ids) i = pick(rng);
         const Tensor w = Tensor::from({8, 3}, uniform_values(rng, 24, -1, 1));
         return {[=] { return sum(mul(gather_rows(table, ids), w)); }, {{"table", table}}};
       }},
      {"masked_softmax",
       [](Rng& rng) -> Made {
         const Tensor x = rand_param(rng, {3, 5});
         const std::vector<std::size_t> len{5, 2, 0};
         const Tensor w = Tensor::from({3, 5}, uniform_values(rng, 15, -1, 1));
         return {[=] { return sum(mul(masked_softmax(x, len), w)); }, {{"x", x}}};
       }},
      {"masked_mean",
       [](Rng& rng) -> Made {
         const Tensor x = rand_param(rng, {3, 4, 2});
         const std::vector<std::size_t> len{4, 1, 0};
         const Tensor w = Tensor::from({3, 2}, uniform_values(rng, 6, -1, 1));
         return {[=] { return sum(mul(masked_mean(x, len), w)); }, {{"x", x}}};
       }},
      {"attention_pool",
       [](Rng& rng) -> Made {
         const Tensor a = rand_param(rng, {2, 3});
         const Tensor v = rand_param(rng, {2, 3, 4});
         const Tensor w = Tensor::from({2, 4}, uniform_values(rng, 8, -1, 1));
         return {[=] { return sum(mul(attention_pool(a, v), w)); }, {{"a", a}, {"v", v}}};
       }},
      {"mlp_composite",
       [](Rng& rng) -> Made {
         const Tensor x = Tensor::from({4, 3}, uniform_values(rng, 12, -2, 2));
         const Tensor w1 = rand_param(rng, {3, 5}, -1, 1);
         const Tensor b1 = rand_param(rng, {5}, -1, 1);
         const Tensor w2 = rand_param(rng, {5, 1}, -1, 1);
         return {[=] { return mean(sigmoid(matmul(sigmoid(add_bias(matmul(x, w1), b1)), w2))); },
                 {{"w1", w1}, {"b1", b1}, {"w2", w2}}};
       }},
  };
}

}  // namespace cetnet::testing
