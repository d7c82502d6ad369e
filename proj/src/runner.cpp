#include "cetnet/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "cetnet/optimizer.hpp"

namespace cetnet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

nlohmann::json loss_json(const LossBreakdown& b) {
  return {{"component", b.component}, {"fusion", b.fusion}, {"kl", b.kl}, {"total", b.total}};
}

std::vector<std::vector<double>> copy_values(const ParamStore& params) {
  std::vector<std::vector<double>> out;
  for (const auto& [name, t] : params.items()) {
    const auto v = t.data();
    out.emplace_back(v.begin(), v.end());
  }
  return out;
}

void load_values(const ParamStore& params, const std::vector<std::vector<double>>& values) {
  std::size_t i = 0;
  for (const auto& [name, t] : params.items()) {
    Tensor leaf = t;
    std::copy(values[i].begin(), values[i].end(), leaf.mutable_data().begin());
    ++i;
  }
}

// Running mean of per-batch loss breakdowns.
struct LossMeter {
  LossBreakdown sum;
  std::size_t n = 0;

  void add(const LossBreakdown& b) {
    if (sum.component.size() < b.component.size()) sum.component.resize(b.component.size(), 0.0);
    for (std::size_t i = 0; i < b.component.size(); ++i) sum.component[i] += b.component[i];
    sum.fusion += b.fusion;
    sum.kl += b.kl;
    sum.total += b.total;
    ++n;
  }
  LossBreakdown mean() const {
    LossBreakdown m = sum;
    if (n == 0) return m;
    const double k = static_cast<double>(n);
    for (auto& c : m.component) c /= k;
    m.fusion /= k;
    m.kl /= k;
    m.total /= k;
    return m;
  }
};

// One optimizer step on a batch. Any non-finite value is reported against `step`.
LossBreakdown train_step(Model& model, Adam& opt, const ExampleBatch& batch, std::size_t step) {
  model.params().zero_grad();
  Objective obj;
  try {
    const ForwardPass pass = model.forward(batch);
    obj = model.objective(pass, batch.labels);
    if (!std::isfinite(obj.breakdown.total)) throw NumericError("non-finite loss");
    obj.total.backward();
    for (const auto& [name, t] : model.params().items()) {
      for (double g : t.grad()) {
        if (!std::isfinite(g)) throw NumericError("non-finite gradient in " + name);
      }
    }
  } catch (const NumericError& e) {
    throw DivergenceError(step, "training diverged at batch " + std::to_string(step) + ": " + e.what());
  }
  opt.step();
  return obj.breakdown;
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
  return seed * 1000003ull + 7919ull * epoch + 1;
}

RunRecord new_record(const TrainConfig& cfg, const Model& model) {
  RunRecord r;
  r.config_hash = config_hash(cfg);
  r.label = cfg.label;
  r.config = config_to_json(cfg);
  r.parameters = model.params().scalar_count();
  return r;
}

void finish_record(const TrainConfig& cfg, const Model& model, RunRecord& r, const DatasetSplits& data) {
  r.test = evaluate(model, data.test, cfg.eval.gauc_weighting);
  if (cfg.eval.train_metrics) r.train = evaluate(model, data.train, cfg.eval.gauc_weighting);
  if (cfg.eval.write_checkpoint) {
    const std::filesystem::path dir = resolve_output_dir(cfg);
    std::filesystem::create_directories(dir);
    const std::string stem = (cfg.label.empty() ? std::string("run") : cfg.label) + "-" + r.config_hash;
    r.checkpoint = (dir / (stem + ".ckpt")).string();
    write_checkpoint(r.checkpoint, snapshot(r.config, model.params()));
  }
}

}  // namespace

void to_json(nlohmann::json& j, const EvalReport& r) {
  j = {{"fused", r.fused}};
  nlohmann::json comps = nlohmann::json::object();
  for (std::size_t i = 0; i < r.names.size(); ++i) comps[r.names[i]] = r.components[i];
  j["components"] = comps;
}

void to_json(nlohmann::json& j, const RunRecord& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch}, {"train_loss", loss_json(e.train_loss)}, {"val", e.val},
                      {"seconds", e.seconds}});
  }
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : r.ne_curve) curve.push_back({{"step", p.step}, {"ne", p.ne}});
  j = {{"config_hash", r.config_hash},
       {"label", r.label},
       {"config", r.config},
       {"parameters", r.parameters},
       {"steps", r.steps},
       {"best_epoch", r.best_epoch},
       {"epochs", epochs},
       {"val", r.val},
       {"test", r.test},
       {"ne_curve", curve},
       {"wall_seconds", r.wall_seconds},
       {"checkpoint", r.checkpoint}};
  if (r.train) j["train"] = *r.train;
}

DatasetSplits prepare_data(const TrainConfig& cfg) {
  Dataset all;
  if (cfg.data.source == "csv") {
    all = load_csv(cfg.data.csv, cfg.model.schema);
  } else {
    SyntheticSpec spec = cfg.data.synthetic;
    spec.schema = cfg.model.schema;
    all = gen_synthetic(spec);
  }
  return split(all, cfg.data.split, cfg.data.split_seed);
}

const DatasetSplits& DataCache::get(const TrainConfig& cfg) {
  const nlohmann::json j = config_to_json(cfg);
  const std::string key = j.at("data").dump() + j.at("schema").dump();
  auto it = cache_.find(key);
  if (it == cache_.end()) it = cache_.emplace(key, prepare_data(cfg)).first;
  return it->second;
}

EvalReport evaluate(const Model& model, const Dataset& data, GaucWeighting weighting) {
  const Predictions p = model.predict(data);
  const auto& rows = data.rows;
  EvalReport r;
  r.fused = evaluate_predictions(p.fused, rows.labels, rows.user_ids, weighting);
  for (std::size_t c = 0; c < p.components.size(); ++c) {
    r.names.push_back(model.config().components[c].name);
    r.components.push_back(evaluate_predictions(p.components[c], rows.labels, rows.user_ids, weighting));
  }
  return r;
}

LoadedModel load_model(const std::string& checkpoint_path) {
  const Checkpoint ckpt = read_checkpoint(checkpoint_path);
  TrainConfig cfg = config_from_json(ckpt.config);
  Rng rng(cfg.seed);
  Model model = Model::create(cfg.model, rng);
  restore(ckpt, model.params());
  return {std::move(cfg), std::move(model)};
}

EvalReport evaluate(const std::string& checkpoint_path, const Dataset& data) {
  const LoadedModel loaded = load_model(checkpoint_path);
  if (!(data.schema == loaded.config.model.schema)) {
    throw ConfigError("dataset schema does not match the checkpoint's schema");
  }
  return evaluate(loaded.model, data, loaded.config.eval.gauc_weighting);
}

RunRecord train(const TrainConfig& cfg, const DatasetSplits& data) {
  cfg.validate();
  const auto t0 = Clock::now();
  Rng rng(cfg.seed);
  Model model = Model::create(cfg.model, rng);
  Adam opt(model.params(), cfg.optimizer);
  RunRecord rec = new_record(cfg, model);

  double best_auc = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto te = Clock::now();
    std::optional<std::uint64_t> order_seed;
    if (cfg.shuffle) order_seed = epoch_seed(cfg.seed, epoch);
    BatchIterator it(data.train, cfg.batch_size, order_seed);
    LossMeter meter;
    while (it.has_next()) {
      const ExampleBatch batch = it.next();
      meter.add(train_step(model, opt, batch, rec.steps));
      ++rec.steps;
    }
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = meter.mean();
    log.val = evaluate(model, data.val, cfg.eval.gauc_weighting);
    log.seconds = seconds_since(te);
    if (log.val.fused.auc > best_auc) {
      best_auc = log.val.fused.auc;
      best = copy_values(model.params());
      rec.best_epoch = epoch;
      rec.val = log.val;
    }
    rec.epochs.push_back(std::move(log));
  }
  load_values(model.params(), best);
  finish_record(cfg, model, rec, data);
  rec.wall_seconds = seconds_since(t0);
  return rec;
}

RunRecord train(const TrainConfig& cfg) { return train(cfg, prepare_data(cfg)); }

RunRecord one_epoch(const TrainConfig& base, const DatasetSplits& data) {
  TrainConfig cfg = base;
  cfg.epochs = 1;
  cfg.shuffle = false;
  cfg.validate();
  const auto t0 = Clock::now();
  Rng rng(cfg.seed);
  Model model = Model::create(cfg.model, rng);
  Adam opt(model.params(), cfg.optimizer);
  RunRecord rec = new_record(cfg, model);

  const auto& val = data.val.rows;
  auto sample_ne = [&] {
    const Predictions p = model.predict(data.val);
    rec.ne_curve.push_back({rec.steps, normalized_entropy(p.fused, val.labels)});
  };
  BatchIterator it(data.train, cfg.batch_size, std::nullopt);
  LossMeter meter;
  while (it.has_next()) {
    const ExampleBatch batch = it.next();
    meter.add(train_step(model, opt, batch, rec.steps));
    ++rec.steps;
    if (rec.steps % cfg.eval.cadence == 0) sample_ne();
  }
  if (rec.steps % cfg.eval.cadence != 0) sample_ne();
  EpochLog log;
  log.epoch = 1;
  log.train_loss = meter.mean();
  log.val = evaluate(model, data.val, cfg.eval.gauc_weighting);
  log.seconds = seconds_since(t0);
  rec.val = log.val;
  rec.best_epoch = 1;
  rec.epochs.push_back(std::move(log));
  finish_record(cfg, model, rec, data);
  rec.wall_seconds = seconds_since(t0);
  return rec;
}

// ---------------------------------------------------------------------------
// Ablations
// ---------------------------------------------------------------------------

std::string to_string(AblationVariant v) {
  switch (v) {
    case AblationVariant::kFull: return "full";
    case AblationVariant::kNoConfidenceFusion: return "no_confidence_fusion";
    case AblationVariant::kNoKl: return "no_kl";
    case AblationVariant::kNoMultiEmbedding: return "no_multi_embedding";
    case AblationVariant::kNoGradientStop: return "no_gradient_stop";
    case AblationVariant::kSingleEmbeddingConcat: return "single_embedding_concat";
    case AblationVariant::kMultiEmbeddingConcat: return "multi_embedding_concat";
  }
  return "?";
}

AblationVariant ablation_from_string(const std::string& s) {
  if (s == "full") return AblationVariant::kFull;
  for (auto v : all_ablations()) {
    if (to_string(v) == s) return v;
  }
  throw ArgumentError("unknown ablation variant '" + s + "'");
}

std::vector<AblationVariant> all_ablations() {
  return {AblationVariant::kNoConfidenceFusion, AblationVariant::kNoKl,
          AblationVariant::kNoMultiEmbedding,   AblationVariant::kNoGradientStop,
          AblationVariant::kSingleEmbeddingConcat, AblationVariant::kMultiEmbeddingConcat};
}

TrainConfig apply_ablation(const TrainConfig& base, AblationVariant variant) {
  const FusionConfig& f = base.model.fusion;
  const bool weighted = f.mode == FusionMode::kWeightedConcat || f.mode == FusionMode::kWeightedSum;
  if (!weighted || !f.use_confidence || base.model.components.size() < 2) {
    throw ConfigError("ablations start from a confidence-fused ensemble of at least two components");
  }
  TrainConfig c = base;
  c.label = to_string(variant);
  FusionConfig& fc = c.model.fusion;
  switch (variant) {
    case AblationVariant::kFull:
      break;
    case AblationVariant::kNoConfidenceFusion:
      fc.mode = FusionMode::kPlainConcat;
      break;
    case AblationVariant::kNoKl:
      fc.alpha = 0.0;
      break;
    case AblationVariant::kNoMultiEmbedding:
      c.model.bank_mode = BankMode::kShared;
      break;
    case AblationVariant::kNoGradientStop:
      fc.use_gradient_stop = false;
      break;
    case AblationVariant::kSingleEmbeddingConcat:
      c.model.bank_mode = BankMode::kShared;
      fc.mode = FusionMode::kPlainConcat;
      fc.alpha = 0.0;
      fc.use_confidence = false;
      break;
    case AblationVariant::kMultiEmbeddingConcat:
      c.model.bank_mode = BankMode::kMulti;
      fc.mode = FusionMode::kPlainConcat;
      fc.alpha = 0.0;
      fc.use_confidence = false;
      break;
  }
  return c;
}

RunRecord run_ablation(const TrainConfig& base, AblationVariant variant, const DatasetSplits& data) {
  return train(apply_ablation(base, variant), data);
}

// ---------------------------------------------------------------------------
// Scale sweep
// ---------------------------------------------------------------------------

std::string to_string(SweepMode m) {
  switch (m) {
    case SweepMode::kSe: return "se";
    case SweepMode::kMe: return "me";
    case SweepMode::kOursSum: return "ours_sum";
    case SweepMode::kOursConcat: return "ours_concat";
  }
  return "?";
}

SweepMode sweep_mode_from_string(const std::string& s) {
  if (s == "se") return SweepMode::kSe;
  if (s == "me") return SweepMode::kMe;
  if (s == "ours_sum") return SweepMode::kOursSum;
  if (s == "ours_concat") return SweepMode::kOursConcat;
  throw ArgumentError("unknown sweep mode '" + s + "' (expected se|me|ours_sum|ours_concat)");
}

TrainConfig sweep_config(const TrainConfig& base, SweepMode mode, std::size_t multiplier) {
  if (multiplier < 1) throw ArgumentError("sweep multiplier must be >= 1");
  if (base.model.components.empty()) throw ConfigError("sweep base config has no components");
  TrainConfig c = base;
  c.label = to_string(mode) + "_x" + std::to_string(multiplier);
  const ComponentConfig arch = base.model.components.front();
  const std::size_t base_dim = arch.embed_dim;
  FusionConfig& f = c.model.fusion;
  auto& comps = c.model.components;
  comps.clear();
  c.model.bank_mode = BankMode::kMulti;

  if (mode == SweepMode::kSe || multiplier == 1) {
    ComponentConfig one = arch;
    one.embed_dim = base_dim * multiplier;
    comps.push_back(one);
    f.mode = FusionMode::kSingle;
    f.alpha = 0.0;
    f.use_confidence = false;
  } else if (mode == SweepMode::kMe) {
    for (std::size_t i = 0; i < multiplier; ++i) {
      ComponentConfig copy = arch;
      copy.name = arch.name + "_" + std::to_string(i + 1);
      comps.push_back(copy);
    }
    f.mode = FusionMode::kPlainConcat;
    f.alpha = 0.0;
    f.use_confidence = false;
    f.component_losses = false;
  } else {
    const auto& kinds = base.model.components;
    for (std::size_t i = 0; i < multiplier; ++i) {
      ComponentConfig m = kinds[i % kinds.size()];
      m.name = m.name + "_" + std::to_string(i + 1);
      m.embed_dim = base_dim;
      comps.push_back(m);
    }
    f.mode = mode == SweepMode::kOursSum ? FusionMode::kWeightedSum : FusionMode::kWeightedConcat;
    f.use_confidence = true;
  }
  f.n_components = comps.size();
  return c;
}

std::vector<SweepCell> scale_sweep(const TrainConfig& base, const std::vector<std::size_t>& multipliers,
                                   const std::vector<SweepMode>& modes,
                                   const std::vector<std::uint64_t>& seeds, DataCache& cache) {
  std::vector<SweepCell> cells;
  for (auto mode : modes) {
    for (auto mult : multipliers) {
      for (auto seed : seeds) {
        TrainConfig c = sweep_config(base, mode, mult);
        c.seed = seed;
        cells.push_back({mode, mult, seed, train(c, cache.get(c))});
      }
    }
  }
  return cells;
}

void append_record(const std::string& path, const RunRecord& record) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw ConfigError("cannot append to " + path);
  out << nlohmann::json(record).dump() << '\n';
}

void write_sweep_csv(const std::string& path, const std::vector<SweepCell>& cells) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out << "mode,multiplier,seed,parameters,test_auc,test_gauc,test_logloss,config_hash\n";
  out.precision(17);
  for (const auto& c : cells) {
    out << to_string(c.mode) << ',' << c.multiplier << ',' << c.seed << ',' << c.record.parameters
        << ',' << c.record.test.fused.auc << ',' << c.record.test.fused.gauc << ','
        << c.record.test.fused.logloss << ',' << c.record.config_hash << '\n';
  }
}

}  // namespace cetnet
