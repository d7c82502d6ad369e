#include "cetnet/model.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace cetnet {

std::string to_string(HeadInput h) { return h == HeadInput::kRaw ? "raw" : "projected"; }

HeadInput head_input_from_string(const std::string& s) {
  if (s == "raw") return HeadInput::kRaw;
  if (s == "projected") return HeadInput::kProjected;
  throw ConfigError("unknown head_input '" + s + "' (expected raw|projected)");
}

void ModelConfig::validate() const {
  schema.validate();
  if (components.empty()) throw ConfigError("model needs at least one component");
  std::set<std::string> names;
  for (const auto& c : components) {
    c.validate();
    if (c.name.empty()) throw ConfigError("component name must not be empty");
    if (!names.insert(c.name).second) throw ConfigError("duplicate component name '" + c.name + "'");
  }
  if (fusion.n_components != components.size()) {
    throw ConfigError("fusion.n_components = " + std::to_string(fusion.n_components) + " but " +
                      std::to_string(components.size()) + " components are configured");
  }
  fusion.validate();
  if (fusion.mode != FusionMode::kSingle && components.size() < 2 &&
      fusion.mode != FusionMode::kPlainConcat) {
    throw ConfigError("ensemble fusion needs at least two components");
  }
  if (d_proj < 1) throw ConfigError("d_proj must be >= 1");
}

void to_json(nlohmann::json& j, const ComponentConfig& c) {
  j = {{"name", c.name},
       {"kind", to_string(c.kind)},
       {"depth", c.depth},
       {"hidden", c.hidden},
       {"d_out", c.d_out},
       {"embed_dim", c.embed_dim},
       {"attention_hidden", c.attention_hidden}};
}

void from_json(const nlohmann::json& j, ComponentConfig& c) {
  c.name = j.at("name").get<std::string>();
  c.kind = component_kind_from_string(j.at("kind").get<std::string>());
  c.depth = j.at("depth").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.d_out = j.at("d_out").get<std::size_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.attention_hidden = j.at("attention_hidden").get<std::size_t>();
}

void to_json(nlohmann::json& j, const FusionConfig& c) {
  j = {{"mode", to_string(c.mode)},
       {"use_confidence", c.use_confidence},
       {"use_gradient_stop", c.use_gradient_stop},
       {"alpha", c.alpha},
       {"n_components", c.n_components},
       {"component_losses", c.component_losses}};
}

void from_json(const nlohmann::json& j, FusionConfig& c) {
  c.mode = fusion_mode_from_string(j.at("mode").get<std::string>());
  c.use_confidence = j.at("use_confidence").get<bool>();
  c.use_gradient_stop = j.at("use_gradient_stop").get<bool>();
  c.alpha = j.at("alpha").get<double>();
  c.n_components = j.at("n_components").get<std::size_t>();
  c.component_losses = j.at("component_losses").get<bool>();
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"schema", c.schema},
       {"components", c.components},
       {"bank_mode", to_string(c.bank_mode)},
       {"share_dense_mlp", c.share_dense_mlp},
       {"fusion", c.fusion},
       {"d_proj", c.d_proj},
       {"head_input", to_string(c.head_input)}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.schema = j.at("schema").get<FeatureSchema>();
  c.components = j.at("components").get<std::vector<ComponentConfig>>();
  c.bank_mode = bank_mode_from_string(j.at("bank_mode").get<std::string>());
  c.share_dense_mlp = j.at("share_dense_mlp").get<bool>();
  c.fusion = j.at("fusion").get<FusionConfig>();
  c.d_proj = j.at("d_proj").get<std::size_t>();
  c.head_input = head_input_from_string(j.at("head_input").get<std::string>());
}

Model Model::create(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  Model m;
  m.cfg_ = cfg;
  std::vector<BankComponentSpec> specs;
  for (const auto& c : cfg.components) specs.push_back({c.name, c.embed_dim});
  m.bank_ = EmbeddingBank(cfg.schema, specs, cfg.bank_mode, cfg.share_dense_mlp, rng);

  const bool single = cfg.fusion.mode == FusionMode::kSingle;
  const bool projected_head = cfg.head_input == HeadInput::kProjected && !single;
  for (const auto& c : cfg.components) {
    m.components_.push_back(
        ComponentModel::create(c, cfg.schema, rng, projected_head ? cfg.d_proj : 0));
  }
  if (!single) {
    for (const auto& c : cfg.components) m.projections_.push_back(Linear::init(rng, c.d_out, cfg.d_proj));
    const std::size_t n = cfg.components.size();
    const std::size_t fused_width = cfg.fusion.mode == FusionMode::kWeightedSum ? cfg.d_proj : n * cfg.d_proj;
    m.readout_ = Linear::init(rng, fused_width, 1);
  }

  m.bank_.register_to(m.params_, "bank");
  for (std::size_t i = 0; i < m.components_.size(); ++i) {
    m.components_[i].register_to(m.params_, "component." + cfg.components[i].name);
  }
  for (std::size_t i = 0; i < m.projections_.size(); ++i) {
    m.projections_[i].register_to(m.params_, "projection." + cfg.components[i].name);
  }
  if (!single) m.readout_.register_to(m.params_, "readout");
  return m;
}

ComponentInputs Model::inputs(std::size_t c, const ExampleBatch& batch) const {
  ComponentInputs in;
  in.sparse = bank_.lookup_sparse(c, batch);
  const std::size_t k = cfg_.schema.sequences.size();
  for (std::size_t j = 0; j < k; ++j) {
    in.sequences.push_back(bank_.lookup_sequence_field(c, batch, j));
    std::vector<std::size_t> len(batch.size);
    for (std::size_t b = 0; b < batch.size; ++b) len[b] = batch.seq_length(b, j);
    in.lengths.push_back(std::move(len));
  }
  in.dense = bank_.encode_dense(c, batch);
  in.target_index = cfg_.schema.target_index();
  return in;
}

ForwardPass Model::forward(const ExampleBatch& batch) const {
  ForwardPass pass;
  const bool projected_head = cfg_.head_input == HeadInput::kProjected && !single();
  for (std::size_t c = 0; c < components_.size(); ++c) {
    Tensor e = components_[c].embed(inputs(c, batch));
    if (!single()) pass.projected.push_back(projections_[c](e));
    pass.predictions.push_back(components_[c].predict(projected_head ? pass.projected.back() : e));
    pass.embeddings.push_back(std::move(e));
  }
  if (single()) {
    pass.prediction = pass.predictions.front();
    return pass;
  }
  pass.fusion = fuse_components(cfg_.fusion, pass.predictions, pass.projected, readout_);
  pass.prediction = pass.fusion.prediction;
  return pass;
}

Objective Model::objective(const ForwardPass& pass, std::span<const double> labels) const {
  std::vector<Tensor> component_losses;
  if (single()) {
    component_losses.push_back(bce(pass.predictions.front(), labels));
    return total_objective(Tensor{}, component_losses, Tensor{}, 0.0);
  }
  if (cfg_.fusion.component_losses) {
    for (const auto& p : pass.predictions) component_losses.push_back(bce(p, labels));
  }
  const Tensor fusion_loss = bce(pass.prediction, labels);
  const Tensor kl = pairwise_symmetric_kl(pass.predictions);
  Objective o = total_objective(fusion_loss, component_losses, kl, cfg_.fusion.alpha);
  // Component losses are reported even when they are left out of the objective.
  if (!cfg_.fusion.component_losses) {
    NoGradGuard guard;
    for (const auto& p : pass.predictions) o.breakdown.component.push_back(bce(p, labels).item());
  }
  return o;
}

Predictions Model::predict(const ExampleBatch& batch) const {
  Predictions out;
  out.components.resize(components_.size());
  NoGradGuard guard;
  const ForwardPass pass = forward(batch);
  const auto fused = pass.prediction.data();
  out.fused.assign(fused.begin(), fused.end());
  for (std::size_t c = 0; c < components_.size(); ++c) {
    const auto p = pass.predictions[c].data();
    out.components[c].assign(p.begin(), p.end());
  }
  return out;
}

Predictions Model::predict(const Dataset& data, std::size_t chunk) const {
  Predictions out;
  out.components.resize(components_.size());
  chunk = std::max<std::size_t>(chunk, 1);
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += chunk) {
    const std::size_t end = std::min(data.size(), start + chunk);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Predictions part = predict(data.select(idx));
    out.fused.insert(out.fused.end(), part.fused.begin(), part.fused.end());
    for (std::size_t c = 0; c < components_.size(); ++c) {
      out.components[c].insert(out.components[c].end(), part.components[c].begin(),
                               part.components[c].end());
    }
  }
  return out;
}

}  // namespace cetnet
