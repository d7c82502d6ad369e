#include "cetnet/fusion.hpp"

namespace cetnet {

std::string to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::kWeightedConcat: return "weighted_concat";
    case FusionMode::kWeightedSum: return "weighted_sum";
    case FusionMode::kPlainConcat: return "plain_concat";
    case FusionMode::kSingle: return "single";
  }
  return "?";
}

FusionMode fusion_mode_from_string(const std::string& s) {
  if (s == "weighted_concat") return FusionMode::kWeightedConcat;
  if (s == "weighted_sum") return FusionMode::kWeightedSum;
  if (s == "plain_concat") return FusionMode::kPlainConcat;
  if (s == "single") return FusionMode::kSingle;
  throw ConfigError("unknown fusion mode '" + s + "'");
}

void FusionConfig::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("fusion alpha must be >= 0");
  if (mode == FusionMode::kSingle) {
    if (n_components != 1) throw ConfigError("single fusion mode takes exactly one component");
  } else if (n_components < 1) {
    throw ConfigError("fusion needs at least one component");
  }
}

namespace {

Tensor clamp_prob(const Tensor& p) { return clamp(p, kProbEps, 1.0 - kProbEps); }

Tensor one_minus(const Tensor& p) { return add_scalar(neg(p), 1.0); }

Tensor as_column(const Tensor& v) { return reshape(v, {v.numel(), 1}); }

// Per-sample a ln(a/b) + (1-a) ln((1-a)/(1-b)), [B].
Tensor bernoulli_kl(const Tensor& a, const Tensor& b) {
  const Tensor a1 = one_minus(a), b1 = one_minus(b);
  return add(mul(a, sub(log(a), log(b))), mul(a1, sub(log(a1), log(b1))));
}

}  // namespace

Tensor binary_entropy(const Tensor& p) {
  const Tensor q = clamp_prob(p);
  const Tensor q1 = one_minus(q);
  return neg(add(mul(q, log(q)), mul(q1, log(q1))));
}

Tensor confidence(const Tensor& p, bool gradient_stop) {
  Tensor c = neg(binary_entropy(p));
  return gradient_stop ? stop_gradient(c) : c;
}

Tensor fusion_weights(const std::vector<Tensor>& confidences) {
  if (confidences.empty()) throw ArgumentError("fusion_weights of zero components");
  std::vector<Tensor> cols;
  for (const auto& c : confidences) cols.push_back(as_column(c));
  return softmax(concat(cols, 1));
}

Tensor fuse(const std::vector<Tensor>& projected, const Tensor& weights, FusionMode mode) {
  if (projected.empty()) throw ArgumentError("fuse of zero components");
  const std::size_t n = projected.size();
  const Shape& first = projected.front().shape();
  for (const auto& e : projected) {
    if (e.shape() != first) {
      throw ShapeError("fuse: projected widths differ: " + shape_str(first) + " vs " +
                       shape_str(e.shape()));
    }
  }
  if (mode == FusionMode::kPlainConcat || mode == FusionMode::kSingle) {
    return n == 1 ? projected.front() : concat(projected, 1);
  }
  if (weights.rank() != 2 || weights.dim(0) != first[0] || weights.dim(1) != n) {
    throw ShapeError("fuse: weights " + shape_str(weights.shape()) + " for " + std::to_string(n) +
                     " components of " + shape_str(first));
  }
  std::vector<Tensor> scaled;
  for (std::size_t m = 0; m < n; ++m) {
    scaled.push_back(scale_rows(projected[m], reshape(slice_cols(weights, m, 1), {first[0]})));
  }
  if (mode == FusionMode::kWeightedConcat) return n == 1 ? scaled.front() : concat(scaled, 1);
  Tensor acc = scaled.front();
  for (std::size_t m = 1; m < n; ++m) acc = add(acc, scaled[m]);
  return acc;
}

Tensor readout(const Linear& layer, const Tensor& fused) {
  const Tensor logit = layer(fused);
  return clamp_prob(sigmoid(reshape(logit, {logit.dim(0)})));
}

Tensor bce(const Tensor& p, std::span<const double> labels) {
  if (p.numel() != labels.size()) {
    throw ShapeError("bce: " + std::to_string(labels.size()) + " labels for predictions " +
                     shape_str(p.shape()));
  }
  const Tensor q = clamp_prob(reshape(p, {p.numel()}));
  const Tensor y = Tensor::from({labels.size()}, {labels.begin(), labels.end()});
  const Tensor ll = add(mul(y, log(q)), mul(one_minus(y), log(one_minus(q))));
  return neg(mean(ll));
}

Tensor symmetric_kl(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("symmetric_kl: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const Tensor pa = clamp_prob(a), pb = clamp_prob(b);
  return mean(add(scale(bernoulli_kl(pa, pb), 0.5), scale(bernoulli_kl(pb, pa), 0.5)));
}

Tensor pairwise_symmetric_kl(const std::vector<Tensor>& predictions) {
  const std::size_t n = predictions.size();
  if (n < 2) return Tensor::scalar(0.0);
  Tensor acc;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      Tensor kl = symmetric_kl(predictions[i], predictions[j]);
      acc = acc.defined() ? add(acc, kl) : kl;
      ++pairs;
    }
  }
  return pairs == 1 ? acc : scale(acc, 1.0 / static_cast<double>(pairs));
}

FusionResult fuse_components(const FusionConfig& cfg, const std::vector<Tensor>& predictions,
                             const std::vector<Tensor>& projected, const Linear& readout_layer) {
  const std::size_t n = predictions.size();
  if (n == 0 || projected.size() != n) {
    throw ArgumentError("fuse_components: " + std::to_string(n) + " predictions, " +
                        std::to_string(projected.size()) + " embeddings");
  }
  const std::size_t b = predictions.front().numel();
  FusionResult r;
  std::vector<Tensor> conf;
  for (const auto& p : predictions) conf.push_back(confidence(p, cfg.use_gradient_stop));
  {
    std::vector<Tensor> cols;
    for (const auto& c : conf) cols.push_back(stop_gradient(as_column(c)));
    r.confidences = concat(cols, 1);
  }
  const bool weighted = cfg.mode == FusionMode::kWeightedConcat || cfg.mode == FusionMode::kWeightedSum;
  if (weighted && cfg.use_confidence) {
    r.weights = fusion_weights(conf);
  } else {
    r.weights = Tensor::full({b, n}, 1.0 / static_cast<double>(n));
  }
  r.fused = fuse(projected, r.weights, cfg.mode);
  r.prediction = readout(readout_layer, r.fused);
  return r;
}

Objective total_objective(const Tensor& fusion_loss, const std::vector<Tensor>& component_losses,
                          const Tensor& kl_loss, double alpha) {
  if (!(alpha >= 0.0)) throw ArgumentError("alpha must be >= 0");
  Objective o;
  Tensor total = fusion_loss.defined() ? fusion_loss : Tensor::scalar(0.0);
  o.breakdown.fusion = fusion_loss.defined() ? fusion_loss.item() : 0.0;
  for (const auto& l : component_losses) {
    total = add(total, l);
    o.breakdown.component.push_back(l.item());
  }
  o.breakdown.kl = kl_loss.defined() ? kl_loss.item() : 0.0;
  if (kl_loss.defined()) total = add(total, scale(kl_loss, alpha));
  o.breakdown.total = total.item();
  o.total = std::move(total);
  return o;
}

LossBreakdown total_objective(double fusion_loss, const std::vector<double>& component_losses,
                              double kl_loss, double alpha) {
  if (!(alpha >= 0.0)) throw ArgumentError("alpha must be >= 0");
  LossBreakdown b;
  b.fusion = fusion_loss;
  b.component = component_losses;
  b.kl = kl_loss;
  double total = fusion_loss;
  for (double l : component_losses) total += l;
  b.total = total + alpha * kl_loss;
  return b;
}

}  // namespace cetnet
