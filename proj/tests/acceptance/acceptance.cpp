// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [config.yaml] [--only 1,2,...] [--seeds 42,43,...]
//
// Criteria 7-9 train on the planted synthetic set from the config (default
// configs/cetnet.yaml) and take a while; the rest finish in seconds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "cetnet/runner.hpp"
#include "gradient_cases.hpp"
#include "test_support.hpp"

#ifndef CETNET_DEFAULT_CONFIG
#define CETNET_DEFAULT_CONFIG "configs/cetnet.yaml"
#endif

using namespace cetnet;
using namespace cetnet::testing;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Tracks the worst value of a quantity that must stay under a bound.
struct Worst {
  double value = 0.0;
  std::string where;
  void see(double v, const std::string& w) {
    if (where.empty() || v > value) value = v, where = w;
  }
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string fixed(double v, int precision = 5) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// Small fixtures for the property criteria
// ---------------------------------------------------------------------------

ModelConfig tiny_model(FusionMode mode, bool gradient_stop) {
  ModelConfig c;
  c.schema = small_schema();
  c.components = {{"cross", ComponentKind::kCrossNet, 1, 5, 3, 3, 4},
                  {"attention", ComponentKind::kSeqAttention, 2, 5, 3, 3, 4}};
  c.fusion.mode = mode;
  c.fusion.use_gradient_stop = gradient_stop;
  c.fusion.n_components = 2;
  c.d_proj = 3;
  return c;
}

ComponentInputs random_inputs(Rng& rng, std::vector<std::pair<std::string, Tensor>>& leaves) {
  constexpr std::size_t b = 4, d = 3, n_pos = 5;
  const FeatureSchema s = small_schema();
  ComponentInputs in;
  in.sparse = rand_param(rng, {b, s.sparse.size(), d}, -1.0, 1.0);
  leaves.emplace_back("sparse", in.sparse);
  std::uniform_int_distribution<std::size_t> len(0, n_pos);
  for (std::size_t j = 0; j < s.sequences.size(); ++j) {
    in.sequences.push_back(rand_param(rng, {b, n_pos, d}, -1.0, 1.0));
    leaves.emplace_back("seq" + std::to_string(j), in.sequences.back());
    std::vector<std::size_t> l(b);
    for (auto& v : l) v = len(rng);
    in.lengths.push_back(l);
  }
  in.dense = rand_param(rng, {b, d}, -1.0, 1.0);
  leaves.emplace_back("dense", in.dense);
  in.target_index = s.target_index();
  return in;
}

std::vector<double> random_labels(Rng& rng, std::size_t n) {
  std::bernoulli_distribution coin(0.4);
  std::vector<double> y(n);
  for (auto& v : y) v = coin(rng) ? 1.0 : 0.0;
  return y;
}

Tensor probs(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor::from({n}, std::move(v));
}

// ---------------------------------------------------------------------------
// Criteria 1-6
// ---------------------------------------------------------------------------

Verdict gradients() {
  constexpr double kTol = 1e-4;
  constexpr int kTrials = 20;
  Worst worst;
  std::size_t groups = 0, probes = 0, kinks = 0;
  auto record = [&](const GradCheckResult& r, const std::string& where) {
    worst.see(r.max_rel_error, where + " " + r.worst);
    probes += r.checked;
    kinks += r.kinks;
  };
  for (const auto& c : primitive_cases()) {
    Rng rng(1000);
    for (int t = 0; t < kTrials; ++t) {
      auto [f, leaves] = c.make(rng);
      const auto r = grad_check(f, leaves);
      record(r, c.name);
    }
    ++groups;
  }
  for (auto kind : {ComponentKind::kMlpTower, ComponentKind::kCrossNet, ComponentKind::kSeqAttention,
                    ComponentKind::kHierEnsemble}) {
    for (int t = 0; t < kTrials; ++t) {
      Rng rng(2000 + static_cast<std::uint64_t>(t));
      std::vector<std::pair<std::string, Tensor>> inputs;
      const ComponentInputs in = random_inputs(rng, inputs);
      ComponentConfig cfg{to_string(kind), kind, 2, 6, 4, 3, 5};
      const ComponentModel m = ComponentModel::create(cfg, small_schema(), rng);
      ParamStore store;
      m.register_to(store, "m");
      randomize(store, rng);
      auto leaves = store.items();
      leaves.insert(leaves.end(), inputs.begin(), inputs.end());
      const auto y = random_labels(rng, in.batch());
      const auto r = grad_check([&] { return bce(m.forward(in).prediction, y); }, leaves);
      record(r, to_string(kind));
    }
    ++groups;
  }
  // Full objective. The detached confidence path is excluded from backward()
  // by design, so the finite-difference comparison runs with the stop off.
  for (auto mode : {FusionMode::kWeightedConcat, FusionMode::kWeightedSum}) {
    for (int t = 0; t < kTrials; ++t) {
      Rng rng(3000 + static_cast<std::uint64_t>(t));
      const Model model = Model::create(tiny_model(mode, false), rng);
      randomize(model.params(), rng);
      const Dataset data = gen_synthetic(small_spec(6, 70 + static_cast<std::uint64_t>(t)));
      const ExampleBatch batch = head_batch(data, 6);
      const auto r = grad_check([&] { return model.objective(model.forward(batch), batch.labels).total; },
                                model.params().items());
      record(r, "objective/" + to_string(mode));
    }
    ++groups;
  }
  return {worst.value <= kTol, std::to_string(groups) + " groups x " + std::to_string(kTrials) +
                                   " instances, " + std::to_string(probes) + " probes, max rel error " +
                                   fmt(worst.value) + " at " + worst.where + "; " + std::to_string(kinks) +
                                   " probes straddled a ReLU/clamp kink"};
}

Verdict gradient_stop() {
  const Dataset data = gen_synthetic(small_spec(5, 9));
  const ExampleBatch batch = head_batch(data, 5);
  double off_largest = 0.0, on_largest = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    for (bool stop : {true, false}) {
      Rng rng(seed);
      Model model = Model::create(tiny_model(FusionMode::kWeightedConcat, stop), rng);
      const Tensor w = model.forward(batch).fusion.weights;
      for (std::size_t k = 0; k < w.numel(); ++k) {
        std::vector<double> pick(w.numel(), 0.0);
        pick[k] = 1.0;
        model.params().zero_grad();
        sum(mul(w, Tensor::from(w.shape(), pick))).backward();
        for (const auto& [name, t] : model.params().items()) {
          for (double g : t.grad()) {
            double& slot = stop ? on_largest : off_largest;
            slot = std::max(slot, std::abs(g));
            ++checked;
          }
        }
      }
    }
  }
  return {on_largest == 0.0 && off_largest > 1e-8,
          "stop on: max |dw/dtheta| = " + fmt(on_largest) + "; stop off: " + fmt(off_largest) + " (" +
              std::to_string(checked) + " partials)"};
}

Verdict fusion_weights_invariants() {
  Rng rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> count(2, 5);
  double sum_err = 0.0, uniform_err = 0.0;
  std::size_t order_violations = 0, nonpositive = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = count(rng);
    std::vector<double> p(n);
    std::vector<Tensor> conf;
    for (auto& v : p) {
      v = u(rng);
      conf.push_back(confidence(probs({v}), true));
    }
    const Tensor w = fusion_weights(conf);
    double s = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (!(w[m] > 0.0)) ++nonpositive;
      s += w[m];
    }
    sum_err = std::max(sum_err, std::abs(s - 1.0));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        const double da = std::abs(p[a] - 0.5), db = std::abs(p[b] - 0.5);
        if (da > db + 1e-9 && !(w[a] > w[b])) ++order_violations;
      }
    }
    const Tensor uniform = fusion_weights(std::vector<Tensor>(n, conf[0]));
    for (double v : uniform.data()) {
      uniform_err = std::max(uniform_err, std::abs(v - 1.0 / static_cast<double>(n)));
    }
  }
  return {nonpositive == 0 && sum_err <= 1e-12 && uniform_err <= 1e-12 && order_violations == 0,
          "1000 cases: nonpositive " + std::to_string(nonpositive) + ", max |sum-1| " + fmt(sum_err) +
              ", max |w-1/N| " + fmt(uniform_err) + ", ordering violations " +
              std::to_string(order_violations)};
}

Verdict kl_invariants() {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  auto kl_ref = [](long double a, long double b) {
    return a * std::log(a / b) + (1 - a) * std::log((1 - a) / (1 - b));
  };
  double oracle_err = 0.0, swap_err = 0.0, self_max = 0.0, min_distinct = 1e300, min_value = 1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const double a = u(rng), b = u(rng);
    const double ab = symmetric_kl(probs({a}), probs({b})).item();
    const double ba = symmetric_kl(probs({b}), probs({a})).item();
    const long double want = 0.5L * kl_ref(a, b) + 0.5L * kl_ref(b, a);
    oracle_err = std::max(oracle_err, std::abs(ab - static_cast<double>(want)));
    swap_err = std::max(swap_err, std::abs(ab - ba));
    min_value = std::min(min_value, ab);
    if (a != b) min_distinct = std::min(min_distinct, ab);
    self_max = std::max(self_max, std::abs(symmetric_kl(probs({a}), probs({a})).item()));
  }
  const bool pass = min_value >= 0.0 && self_max <= 1e-12 && min_distinct > 1e-12 && swap_err <= 1e-12 &&
                    oracle_err <= 1e-10;
  return {pass, "100 pairs: min " + fmt(min_value) + ", max self " + fmt(self_max) + ", min distinct " +
                    fmt(min_distinct) + ", max swap diff " + fmt(swap_err) + ", max oracle diff " +
                    fmt(oracle_err)};
}

Verdict additivity() {
  Rng rng(6);
  const Dataset data = gen_synthetic(small_spec(64, 11));
  const ExampleBatch batch = head_batch(data, 64);
  const std::vector<double> alphas{0.0, 0.1, 0.5, 1.0};
  std::uniform_int_distribution<std::size_t> pick(0, alphas.size() - 1);
  double err = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    ModelConfig cfg = tiny_model(trial % 2 ? FusionMode::kWeightedSum : FusionMode::kWeightedConcat, true);
    cfg.fusion.alpha = alphas[pick(rng)];
    const Model model = Model::create(cfg, rng);
    randomize(model.params(), rng);
    const Objective o = model.objective(model.forward(batch), batch.labels);
    double want = o.breakdown.fusion + cfg.fusion.alpha * o.breakdown.kl;
    for (double l : o.breakdown.component) want += l;
    err = std::max({err, std::abs(o.total.item() - want), std::abs(o.breakdown.total - want)});
  }
  return {err <= 1e-12, "40 instances, max |L_final - sum| " + fmt(err)};
}

double brute_auc(const std::vector<double>& s, const std::vector<double>& y) {
  double wins = 0.0, pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) (y[i] == 1.0 ? pos : neg) += 1.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1.0) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0.0) continue;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / (pos * neg);
}

Verdict metric_oracles() {
  Rng rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> size(2, 1000);
  std::size_t auc_mismatch = 0, gauc_mismatch = 0;
  double ne_err = 0.0, ll_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = size(rng);
    const int levels = trial % 2 ? 0 : 20;
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = u(rng) < 0.3 ? 1.0 : 0.0;
      const double v = 0.6 * u(rng) + 0.4 * y[i] * u(rng);
      s[i] = levels ? std::floor(v * levels) / levels : v;
    }
    y[0] = 1.0;
    y[1] = 0.0;
    if (auc(s, y) != brute_auc(s, y)) ++auc_mismatch;
    const std::vector<std::int64_t> one_user(n, 3);
    if (g_auc(s, y, one_user).value != auc(s, y)) ++gauc_mismatch;
    double p = 0.0;
    for (double v : y) p += v;
    p /= static_cast<double>(n);
    ne_err = std::max(ne_err, std::abs(normalized_entropy(std::vector<double>(n, p), y) - 1.0));
    ll_err = std::max(ll_err, std::abs(logloss(std::vector<double>(n, 0.5), y) - std::log(2.0)));
  }
  return {auc_mismatch == 0 && gauc_mismatch == 0 && ne_err <= 1e-9 && ll_err <= 1e-12,
          "200 instances: AUC mismatches " + std::to_string(auc_mismatch) + ", single-user gAUC mismatches " +
              std::to_string(gauc_mismatch) + ", max |NE-1| " + fmt(ne_err) + ", max |logloss-ln2| " +
              fmt(ll_err)};
}

// ---------------------------------------------------------------------------
// Criteria 7-10: training runs
// ---------------------------------------------------------------------------

class Experiments {
 public:
  Experiments(TrainConfig base, std::vector<std::uint64_t> seeds, fs::path out)
      : base_(std::move(base)), seeds_(std::move(seeds)), out_(std::move(out)) {
    base_.eval.train_metrics = false;
    base_.eval.write_checkpoint = false;
    base_.output_dir = out_.string();
  }

  const TrainConfig& base() const { return base_; }
  const std::vector<std::uint64_t>& seeds() const { return seeds_; }

  // Mean fused test AUC over the seeds, cached by label.
  double mean_auc(const TrainConfig& cfg) {
    auto it = cache_.find(cfg.label);
    if (it != cache_.end()) return it->second;
    std::vector<double> aucs;
    for (auto s : seeds_) {
      TrainConfig c = cfg;
      c.seed = s;
      const RunRecord r = train(c, data_.get(c));
      append_record((out_ / "records.jsonl").string(), r);
      aucs.push_back(r.test.fused.auc);
      std::cout << "    " << std::left << std::setw(26) << cfg.label << std::right << " seed " << s
                << "  test auc " << fixed(r.test.fused.auc) << "  (" << fixed(r.wall_seconds, 1) << " s)"
                << std::endl;
    }
    return cache_[cfg.label] = mean_of(aucs);
  }

  TrainConfig standalone(std::size_t component) const {
    TrainConfig c = base_;
    c.model.components = {base_.model.components.at(component)};
    c.model.fusion.mode = FusionMode::kSingle;
    c.model.fusion.n_components = 1;
    c.model.fusion.use_confidence = false;
    c.model.fusion.alpha = 0.0;
    c.label = "standalone_" + c.model.components[0].name;
    return c;
  }

  DataCache& data() { return data_; }
  const fs::path& out() const { return out_; }

 private:
  TrainConfig base_;
  std::vector<std::uint64_t> seeds_;
  fs::path out_;
  DataCache data_;
  std::map<std::string, double> cache_;
};

Verdict versus_components(Experiments& ex) {
  TrainConfig full = ex.base();
  full.label = "full";
  const double f = ex.mean_auc(full);
  double best = -1.0;
  std::string best_name;
  std::ostringstream table;
  for (std::size_t i = 0; i < ex.base().model.components.size(); ++i) {
    const TrainConfig c = ex.standalone(i);
    const double a = ex.mean_auc(c);
    table << " " << c.label << " " << fixed(a);
    if (a > best) best = a, best_name = c.label;
  }
  return {f >= best, "full " + fixed(f) + " vs" + table.str() + "; margin " + fixed(f - best) +
                         " over " + best_name};
}

Verdict ablations(Experiments& ex) {
  constexpr double kBand = 0.0005;
  TrainConfig full = apply_ablation(ex.base(), AblationVariant::kFull);
  const double f = ex.mean_auc(full);
  std::cout << "\n    variant                    mean test AUC   delta vs full\n";
  std::cout << "    " << std::left << std::setw(26) << "full" << std::right << std::setw(14) << fixed(f, 6)
            << std::setw(16) << "" << '\n';
  std::vector<std::string> over;
  for (auto v : all_ablations()) {
    const double a = ex.mean_auc(apply_ablation(ex.base(), v));
    std::cout << "    " << std::left << std::setw(26) << to_string(v) << std::right << std::setw(14)
              << fixed(a, 6) << std::setw(16) << std::showpos << fixed(a - f, 6) << std::noshowpos
              << std::endl;
    if (a > f + kBand) over.push_back(to_string(v) + " (+" + fixed(a - f) + ")");
  }
  std::cout << '\n';
  std::string detail = "6 variants vs full " + fixed(f) + ", band " + fmt(kBand);
  if (!over.empty()) {
    detail += "; above band:";
    for (const auto& s : over) detail += " " + s;
  }
  return {over.empty(), detail};
}

Verdict scale_sweep_x2(Experiments& ex) {
  constexpr std::size_t kBaseDim = 10;
  TrainConfig base = ex.base();
  for (auto& c : base.model.components) c.embed_dim = kBaseDim;
  const double se = ex.mean_auc(sweep_config(base, SweepMode::kSe, 2));
  const double sum = ex.mean_auc(sweep_config(base, SweepMode::kOursSum, 2));
  const double cat = ex.mean_auc(sweep_config(base, SweepMode::kOursConcat, 2));
  return {sum >= se && cat >= se, "x2 at base dim " + std::to_string(kBaseDim) + ": se " + fixed(se) +
                                      ", ours_sum " + fixed(sum) + ", ours_concat " + fixed(cat)};
}

std::vector<double> report_metrics(const EvalReport& e) {
  std::vector<double> v{e.fused.auc, e.fused.gauc, e.fused.logloss, e.fused.ne};
  for (const auto& m : e.components) {
    for (double x : {m.auc, m.gauc, m.logloss, m.ne}) v.push_back(x);
  }
  return v;
}

std::vector<double> logged_metrics(const RunRecord& r) {
  std::vector<double> v;
  auto add = [&v](const EvalReport& e) {
    const auto m = report_metrics(e);
    v.insert(v.end(), m.begin(), m.end());
  };
  for (const auto& e : r.epochs) {
    v.push_back(e.train_loss.total);
    v.push_back(e.train_loss.fusion);
    v.push_back(e.train_loss.kl);
    for (double l : e.train_loss.component) v.push_back(l);
    add(e.val);
  }
  add(r.val);
  add(r.test);
  if (r.train) add(*r.train);
  return v;
}

Verdict determinism(Experiments& ex) {
  TrainConfig c = ex.base();
  c.label = "determinism";
  c.seed = ex.seeds().front();
  c.eval.train_metrics = true;
  c.eval.write_checkpoint = true;
  const DatasetSplits& data = ex.data().get(c);
  const RunRecord a = train(c, data);
  const RunRecord b = train(c, data);
  const auto va = logged_metrics(a), vb = logged_metrics(b);
  double diff = va.size() == vb.size() ? 0.0 : 1e300;
  for (std::size_t i = 0; i < std::min(va.size(), vb.size()); ++i) diff = std::max(diff, std::abs(va[i] - vb[i]));

  // Checkpoint: scores from disk match the logged metrics, and a second
  // save/load cycle reproduces every prediction bitwise.
  const bool metrics_equal = report_metrics(evaluate(a.checkpoint, data.test)) == report_metrics(a.test) &&
                             report_metrics(evaluate(a.checkpoint, data.train)) == report_metrics(*a.train);

  const LoadedModel loaded = load_model(a.checkpoint);
  const std::string copy = (ex.out() / "roundtrip.ckpt").string();
  write_checkpoint(copy, snapshot(config_to_json(loaded.config), loaded.model.params()));
  Rng other(12345);
  const Model fresh = Model::create(loaded.config.model, other);
  restore(read_checkpoint(copy), fresh.params());
  const Predictions p1 = loaded.model.predict(data.test), p2 = fresh.predict(data.test);
  const bool bitwise = p1.fused == p2.fused && p1.components == p2.components;

  return {diff <= 1e-12 && metrics_equal && bitwise,
          std::to_string(va.size()) + " logged values, max repeat diff " + fmt(diff) +
              "; checkpoint metrics identical: " + (metrics_equal ? "yes" : "no") +
              "; round-trip predictions bitwise: " + (bitwise ? "yes" : "no")};
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(std::stoull(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::string config_path = CETNET_DEFAULT_CONFIG;
  std::set<int> only;
  std::vector<std::uint64_t> seeds{42, 43, 44, 45, 46};
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      for (auto v : parse_seeds(argv[++i])) only.insert(static_cast<int>(v));
    } else if (a == "--seeds" && i + 1 < argc) {
      seeds = parse_seeds(argv[++i]);
    } else {
      config_path = a;
    }
  }

  const fs::path out = fs::temp_directory_path() / ("cetnet_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(out);
  std::unique_ptr<Experiments> ex;
  auto experiments = [&]() -> Experiments& {
    if (!ex) ex = std::make_unique<Experiments>(load_config(config_path), seeds, out);
    return *ex;
  };

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"gradient correctness", gradients},
      {"gradient stop", gradient_stop},
      {"fusion weights", fusion_weights_invariants},
      {"symmetric KL", kl_invariants},
      {"objective additivity", additivity},
      {"metric oracles", metric_oracles},
      {"fused vs standalone components", [&] { return versus_components(experiments()); }},
      {"ablations", [&] { return ablations(experiments()); }},
      {"scale sweep x2", [&] { return scale_sweep_x2(experiments()); }},
      {"determinism and checkpoint", [&] { return determinism(experiments()); }},
  };

  std::vector<std::string> lines;
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream line;
    line << "criterion " << std::setw(2) << id << " " << (v.pass ? "PASS" : "FAIL") << "  "
         << criteria[i].first << ": " << v.detail << " [" << fixed(secs, 1) << " s]";
    std::cout << line.str() << std::endl;
    lines.push_back(line.str());
    if (!v.pass) ++failures;
  }

  std::cout << "\nsummary\n";
  for (const auto& l : lines) std::cout << l << '\n';
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  fs::remove_all(out);
  return failures ? 1 : 0;
}
