#include "cetnet/components.hpp"

namespace cetnet {

std::string to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::kMlpTower: return "mlp_tower";
    case ComponentKind::kCrossNet: return "cross_net";
    case ComponentKind::kSeqAttention: return "seq_attention";
    case ComponentKind::kHierEnsemble: return "hier_ensemble";
  }
  return "?";
}

ComponentKind component_kind_from_string(const std::string& s) {
  if (s == "mlp_tower") return ComponentKind::kMlpTower;
  if (s == "cross_net") return ComponentKind::kCrossNet;
  if (s == "seq_attention") return ComponentKind::kSeqAttention;
  if (s == "hier_ensemble") return ComponentKind::kHierEnsemble;
  throw ConfigError("unknown component kind '" + s + "'");
}

void ComponentConfig::validate() const {
  if (depth < 1) throw ConfigError("component " + name + ": depth must be >= 1");
  if (d_out < 1) throw ConfigError("component " + name + ": d_out must be >= 1");
  if (embed_dim < 1) throw ConfigError("component " + name + ": embed_dim must be >= 1");
  if (hidden < 1) throw ConfigError("component " + name + ": hidden must be >= 1");
  if (attention_hidden < 1) throw ConfigError("component " + name + ": attention_hidden must be >= 1");
}

std::size_t flattened_width(const FeatureSchema& schema, std::size_t embed_dim) {
  return (schema.sparse.size() + schema.sequences.size() + 1) * embed_dim;
}

Tensor flatten_inputs(const ComponentInputs& in) {
  const std::size_t b = in.batch(), n = in.sparse.dim(1), d = in.embed_dim();
  std::vector<Tensor> parts{reshape(in.sparse, {b, n * d})};
  for (std::size_t j = 0; j < in.sequences.size(); ++j) {
    parts.push_back(masked_mean(in.sequences[j], in.lengths[j]));
  }
  parts.push_back(in.dense);
  return concat(parts, 1);
}

// ---------------------------------------------------------------------------
// Bodies
// ---------------------------------------------------------------------------

void MlpTower::register_to(ParamStore& store, const std::string& prefix) const {
  tower.register_to(store, prefix + ".tower");
}

Tensor CrossNet::encode(const ComponentInputs& in) const {
  const Tensor x0 = flatten_inputs(in);
  Tensor x = x0;
  for (const auto& layer : layers) x = add(mul(x0, layer(x)), x);
  return out(x);
}

void CrossNet::register_to(ParamStore& store, const std::string& prefix) const {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].register_to(store, prefix + ".cross." + std::to_string(l));
  }
  out.register_to(store, prefix + ".out");
}

Tensor SeqAttention::attention_weights(const ComponentInputs& in, std::size_t field) const {
  const std::size_t b = in.batch(), n = in.sparse.dim(1), d = in.embed_dim();
  const Tensor& h = in.sequences.at(field);
  const std::size_t len = h.dim(1);
  const Tensor q = slice_cols(reshape(in.sparse, {b, n * d}), in.target_index * d, d);
  const Tensor hs = reshape(h, {b * len, d});
  const Tensor qs = repeat_rows(q, len);
  const Tensor scores = scorer(concat({hs, qs, mul(hs, qs)}, 1));
  return masked_softmax(reshape(scores, {b, len}), in.lengths.at(field));
}

Tensor SeqAttention::encode(const ComponentInputs& in) const {
  const std::size_t b = in.batch(), n = in.sparse.dim(1), d = in.embed_dim();
  std::vector<Tensor> parts{reshape(in.sparse, {b, n * d})};
  for (std::size_t j = 0; j < in.sequences.size(); ++j) {
    parts.push_back(attention_pool(attention_weights(in, j), in.sequences[j]));
  }
  parts.push_back(in.dense);
  return tower(concat(parts, 1));
}

void SeqAttention::register_to(ParamStore& store, const std::string& prefix) const {
  scorer.register_to(store, prefix + ".scorer");
  tower.register_to(store, prefix + ".tower");
}

Tensor HierEnsemble::encode(const ComponentInputs& in) const {
  Tensor z = flatten_inputs(in);
  for (const auto& blk : blocks) {
    const Tensor crossed = add(mul(z, blk.cross(z)), z);
    const Tensor hidden = relu(blk.mlp(z));
    z = add(blk.proj(concat({crossed, hidden}, 1)), z);
  }
  return out(z);
}

void HierEnsemble::register_to(ParamStore& store, const std::string& prefix) const {
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    const std::string p = prefix + ".block." + std::to_string(l);
    blocks[l].cross.register_to(store, p + ".cross");
    blocks[l].mlp.register_to(store, p + ".mlp");
    blocks[l].proj.register_to(store, p + ".proj");
  }
  out.register_to(store, prefix + ".out");
}

// ---------------------------------------------------------------------------
// ComponentModel
// ---------------------------------------------------------------------------

ComponentModel ComponentModel::create(const ComponentConfig& cfg, const FeatureSchema& schema,
                                      Rng& rng, std::size_t head_in) {
  cfg.validate();
  ComponentModel m;
  m.cfg_ = cfg;
  const std::size_t d = cfg.embed_dim;
  const std::size_t width = flattened_width(schema, d);
  std::vector<std::size_t> tower_widths(cfg.depth - 1, cfg.hidden);
  tower_widths.push_back(cfg.d_out);

  switch (cfg.kind) {
    case ComponentKind::kMlpTower:
      m.body_ = MlpTower{Mlp::init(rng, width, tower_widths, /*relu_last=*/true)};
      break;
    case ComponentKind::kCrossNet: {
      CrossNet net;
      for (std::size_t l = 0; l < cfg.depth; ++l) net.layers.push_back(Linear::init(rng, width, width));
      net.out = Linear::init(rng, width, cfg.d_out);
      m.body_ = std::move(net);
      break;
    }
    case ComponentKind::kSeqAttention: {
      if (schema.sequences.empty()) {
        throw ConfigError("seq_attention component " + cfg.name + " needs a sequence field");
      }
      schema.target_index();  // throws ConfigError when no target field exists
      SeqAttention att;
      att.scorer = Mlp::init(rng, 3 * d, {cfg.attention_hidden, 1}, /*relu_last=*/false);
      att.tower = Mlp::init(rng, width, tower_widths, /*relu_last=*/true);
      m.body_ = std::move(att);
      break;
    }
    case ComponentKind::kHierEnsemble: {
      HierEnsemble net;
      for (std::size_t l = 0; l < cfg.depth; ++l) {
        net.blocks.push_back({Linear::init(rng, width, width), Linear::init(rng, width, cfg.hidden),
                              Linear::init(rng, width + cfg.hidden, width)});
      }
      net.out = Linear::init(rng, width, cfg.d_out);
      m.body_ = std::move(net);
      break;
    }
  }
  m.head_ = Linear::init(rng, head_in ? head_in : cfg.d_out, 1);
  return m;
}

Tensor ComponentModel::embed(const ComponentInputs& in) const {
  return std::visit([&](const auto& body) { return body.encode(in); }, body_);
}

Tensor ComponentModel::predict(const Tensor& head_input) const {
  const Tensor logit = head_(head_input);
  return clamp(sigmoid(reshape(logit, {logit.dim(0)})), kProbEps, 1.0 - kProbEps);
}

ComponentOutput ComponentModel::forward(const ComponentInputs& in) const {
  Tensor e = embed(in);
  Tensor p = predict(e);
  return {std::move(e), std::move(p)};
}

void ComponentModel::register_to(ParamStore& store, const std::string& prefix) const {
  std::visit([&](const auto& body) { body.register_to(store, prefix); }, body_);
  head_.register_to(store, prefix + ".head");
}

}  // namespace cetnet
