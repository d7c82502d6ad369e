#include "cetnet/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace cetnet {

namespace {

using nlohmann::json;

std::string to_string(GaucWeighting w) { return w == GaucWeighting::kUniform ? "uniform" : "impressions"; }

GaucWeighting gauc_weighting_from_string(const std::string& s) {
  if (s == "uniform") return GaucWeighting::kUniform;
  if (s == "impressions") return GaucWeighting::kImpressions;
  throw ConfigError("unknown gauc_weighting '" + s + "' (expected uniform|impressions)");
}

void allow_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a mapping");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  const json& v = obj.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) throw ConfigError(where + "." + key + ": expected a non-negative integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  }
  return v.get<T>();
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  return j.contains(key) && !j.at(key).is_null() ? j.at(key) : empty;
}

FeatureSchema schema_from(const json& j) {
  allow_keys(j, {"sparse", "dense", "sequences", "user_id_field", "target_field"}, "schema");
  FeatureSchema s;
  if (j.contains("sparse")) {
    for (const auto& f : j.at("sparse")) {
      allow_keys(f, {"name", "cardinality"}, "schema.sparse");
      s.sparse.push_back({get_or<std::string>(f, "name", "", "schema.sparse"),
                          get_or<std::size_t>(f, "cardinality", 0, "schema.sparse")});
    }
  }
  if (j.contains("dense")) {
    for (const auto& f : j.at("dense")) {
      if (!f.is_string()) throw ConfigError("schema.dense: expected a list of field names");
      s.dense.push_back({f.get<std::string>()});
    }
  }
  if (j.contains("sequences")) {
    for (const auto& f : j.at("sequences")) {
      allow_keys(f, {"name", "vocab", "max_len", "shares"}, "schema.sequences");
      s.sequences.push_back({get_or<std::string>(f, "name", "", "schema.sequences"),
                             get_or<std::size_t>(f, "vocab", 0, "schema.sequences"),
                             get_or<std::size_t>(f, "max_len", 0, "schema.sequences"),
                             get_or<std::string>(f, "shares", "", "schema.sequences")});
    }
  }
  s.user_id_field = get_or<std::string>(j, "user_id_field", s.user_id_field, "schema");
  s.target_field = get_or<std::string>(j, "target_field", s.target_field, "schema");
  return s;
}

json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Undefined:
    case YAML::NodeType::Null:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& item : n) a.push_back(yaml_to_json(item));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return o;
    }
    case YAML::NodeType::Scalar:
      break;
  }
  const std::string& s = n.Scalar();
  if (n.Tag() == "!") return s;  // quoted
  if (s == "true" || s == "True") return true;
  if (s == "false" || s == "False") return false;
  if (s == "~" || s == "null") return nullptr;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && s[0] != '-' && s[0] != '+') {
    std::uint64_t u = 0;
    auto [p, ec] = std::from_chars(first, last, u);
    if (ec == std::errc() && p == last) return u;
  } else if (!s.empty() && s[0] == '-') {
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(first, last, i);
    if (ec == std::errc() && p == last) return i;
  }
  double d = 0.0;
  auto [p, ec] = std::from_chars(first, last, d);
  if (ec == std::errc() && p == last) return d;
  return s;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  optimizer.validate();
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (data.source != "synthetic" && data.source != "csv") {
    throw ConfigError("data.source must be synthetic or csv, got '" + data.source + "'");
  }
  if (data.source == "csv" && data.csv.empty()) throw ConfigError("data.csv is required for csv source");
  if (eval.cadence < 1) throw ConfigError("eval.cadence must be >= 1");
}

json config_to_json(const TrainConfig& c) {
  const SyntheticSpec& g = c.data.synthetic;
  json data = {{"source", c.data.source},
               {"csv", c.data.csv},
               {"samples", g.samples},
               {"latent_dim", g.latent_dim},
               {"noise", g.noise},
               {"base_rate", g.base_rate},
               {"users", g.users},
               {"user_field", g.user_field},
               {"seed", g.seed},
               {"mix", {{"linear", g.mix.linear}, {"cross", g.mix.cross}, {"sequence", g.mix.sequence}}},
               {"split",
                {{"train", c.data.split.train},
                 {"val", c.data.split.val},
                 {"test", c.data.split.test},
                 {"seed", c.data.split_seed}}}};
  json components = json::array();
  for (const auto& comp : c.model.components) components.push_back(comp);
  const FusionConfig& f = c.model.fusion;
  json fusion = {{"mode", to_string(f.mode)},
                 {"use_confidence", f.use_confidence},
                 {"use_gradient_stop", f.use_gradient_stop},
                 {"alpha", f.alpha},
                 {"component_losses", f.component_losses},
                 {"d_proj", c.model.d_proj},
                 {"head_input", to_string(c.model.head_input)}};
  return {{"label", c.label},
          {"seed", c.seed},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"shuffle", c.shuffle},
          {"output_dir", c.output_dir},
          {"data", data},
          {"schema", c.model.schema},
          {"embedding", {{"mode", to_string(c.model.bank_mode)}, {"share_dense_mlp", c.model.share_dense_mlp}}},
          {"components", components},
          {"fusion", fusion},
          {"optimizer",
           {{"kind", c.optimizer.kind},
            {"lr", c.optimizer.lr},
            {"weight_decay", c.optimizer.weight_decay},
            {"beta1", c.optimizer.beta1},
            {"beta2", c.optimizer.beta2},
            {"eps", c.optimizer.eps}}},
          {"eval",
           {{"cadence", c.eval.cadence},
            {"gauc_weighting", to_string(c.eval.gauc_weighting)},
            {"train_metrics", c.eval.train_metrics},
            {"write_checkpoint", c.eval.write_checkpoint}}}};
}

TrainConfig config_from_json(const json& j) {
  allow_keys(j,
             {"label", "seed", "epochs", "batch_size", "shuffle", "output_dir", "data", "schema",
              "embedding", "components", "fusion", "optimizer", "eval"},
             "config");
  TrainConfig c;
  c.label = get_or<std::string>(j, "label", c.label, "config");
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, "config");
  c.epochs = get_or<std::size_t>(j, "epochs", c.epochs, "config");
  c.batch_size = get_or<std::size_t>(j, "batch_size", c.batch_size, "config");
  c.shuffle = get_or<bool>(j, "shuffle", c.shuffle, "config");
  c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir, "config");

  if (!j.contains("schema")) throw ConfigError("config: missing 'schema' section");
  c.model.schema = schema_from(j.at("schema"));

  const json& d = section(j, "data");
  allow_keys(d,
             {"source", "csv", "samples", "latent_dim", "noise", "base_rate", "users", "user_field",
              "seed", "mix", "split"},
             "data");
  SyntheticSpec& g = c.data.synthetic;
  c.data.source = get_or<std::string>(d, "source", c.data.source, "data");
  c.data.csv = get_or<std::string>(d, "csv", c.data.csv, "data");
  g.samples = get_or<std::size_t>(d, "samples", g.samples, "data");
  g.latent_dim = get_or<std::size_t>(d, "latent_dim", g.latent_dim, "data");
  g.noise = get_or<double>(d, "noise", g.noise, "data");
  g.base_rate = get_or<double>(d, "base_rate", g.base_rate, "data");
  g.users = get_or<std::size_t>(d, "users", g.users, "data");
  g.user_field = get_or<std::string>(d, "user_field", g.user_field, "data");
  g.seed = get_or<std::uint64_t>(d, "seed", g.seed, "data");
  const json& mix = section(d, "mix");
  allow_keys(mix, {"linear", "cross", "sequence"}, "data.mix");
  g.mix.linear = get_or<double>(mix, "linear", g.mix.linear, "data.mix");
  g.mix.cross = get_or<double>(mix, "cross", g.mix.cross, "data.mix");
  g.mix.sequence = get_or<double>(mix, "sequence", g.mix.sequence, "data.mix");
  const json& sp = section(d, "split");
  allow_keys(sp, {"train", "val", "test", "seed"}, "data.split");
  c.data.split.train = get_or<double>(sp, "train", c.data.split.train, "data.split");
  c.data.split.val = get_or<double>(sp, "val", c.data.split.val, "data.split");
  c.data.split.test = get_or<double>(sp, "test", c.data.split.test, "data.split");
  c.data.split_seed = get_or<std::uint64_t>(sp, "seed", c.data.split_seed, "data.split");
  g.schema = c.model.schema;

  const json& e = section(j, "embedding");
  allow_keys(e, {"mode", "share_dense_mlp"}, "embedding");
  c.model.bank_mode = bank_mode_from_string(get_or<std::string>(e, "mode", "multi", "embedding"));
  c.model.share_dense_mlp = get_or<bool>(e, "share_dense_mlp", c.model.share_dense_mlp, "embedding");

  if (!j.contains("components") || !j.at("components").is_array()) {
    throw ConfigError("config: 'components' must be a list");
  }
  for (const auto& cj : j.at("components")) {
    allow_keys(cj, {"name", "kind", "depth", "hidden", "d_out", "embed_dim", "attention_hidden"},
               "components");
    ComponentConfig cc;
    cc.name = get_or<std::string>(cj, "name", "", "components");
    cc.kind = component_kind_from_string(get_or<std::string>(cj, "kind", "mlp_tower", "components"));
    cc.depth = get_or<std::size_t>(cj, "depth", cc.depth, "components");
    cc.hidden = get_or<std::size_t>(cj, "hidden", cc.hidden, "components");
    cc.d_out = get_or<std::size_t>(cj, "d_out", cc.d_out, "components");
    cc.embed_dim = get_or<std::size_t>(cj, "embed_dim", cc.embed_dim, "components");
    cc.attention_hidden = get_or<std::size_t>(cj, "attention_hidden", cc.attention_hidden, "components");
    c.model.components.push_back(cc);
  }

  const json& f = section(j, "fusion");
  allow_keys(f,
             {"mode", "use_confidence", "use_gradient_stop", "alpha", "component_losses", "d_proj",
              "head_input"},
             "fusion");
  FusionConfig& fc = c.model.fusion;
  fc.mode = fusion_mode_from_string(get_or<std::string>(f, "mode", "weighted_concat", "fusion"));
  fc.use_confidence = get_or<bool>(f, "use_confidence", fc.use_confidence, "fusion");
  fc.use_gradient_stop = get_or<bool>(f, "use_gradient_stop", fc.use_gradient_stop, "fusion");
  fc.alpha = get_or<double>(f, "alpha", fc.alpha, "fusion");
  fc.component_losses = get_or<bool>(f, "component_losses", fc.component_losses, "fusion");
  fc.n_components = c.model.components.size();
  c.model.d_proj = get_or<std::size_t>(f, "d_proj", c.model.d_proj, "fusion");
  c.model.head_input = head_input_from_string(get_or<std::string>(f, "head_input", "raw", "fusion"));

  const json& o = section(j, "optimizer");
  allow_keys(o, {"kind", "lr", "weight_decay", "beta1", "beta2", "eps"}, "optimizer");
  c.optimizer.kind = get_or<std::string>(o, "kind", c.optimizer.kind, "optimizer");
  c.optimizer.lr = get_or<double>(o, "lr", c.optimizer.lr, "optimizer");
  c.optimizer.weight_decay = get_or<double>(o, "weight_decay", c.optimizer.weight_decay, "optimizer");
  c.optimizer.beta1 = get_or<double>(o, "beta1", c.optimizer.beta1, "optimizer");
  c.optimizer.beta2 = get_or<double>(o, "beta2", c.optimizer.beta2, "optimizer");
  c.optimizer.eps = get_or<double>(o, "eps", c.optimizer.eps, "optimizer");

  const json& ev = section(j, "eval");
  allow_keys(ev, {"cadence", "gauc_weighting", "train_metrics", "write_checkpoint"}, "eval");
  c.eval.cadence = get_or<std::size_t>(ev, "cadence", c.eval.cadence, "eval");
  c.eval.gauc_weighting =
      gauc_weighting_from_string(get_or<std::string>(ev, "gauc_weighting", "uniform", "eval"));
  c.eval.train_metrics = get_or<bool>(ev, "train_metrics", c.eval.train_metrics, "eval");
  c.eval.write_checkpoint = get_or<bool>(ev, "write_checkpoint", c.eval.write_checkpoint, "eval");

  c.validate();
  return c;
}

TrainConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  return config_from_json(yaml_to_json(root));
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_hash(const TrainConfig& cfg) {
  json j = config_to_json(cfg);
  j.erase("output_dir");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

std::string resolve_output_dir(const TrainConfig& cfg) {
  const std::filesystem::path dir(cfg.output_dir);
  const char* root = std::getenv(kOutputRootEnv);
  if (root && *root && dir.is_relative()) return (std::filesystem::path(root) / dir).string();
  return dir.string();
}

}  // namespace cetnet
