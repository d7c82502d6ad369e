// Command-line front end: data generation, training, evaluation and sweeps.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cetnet/runner.hpp"

namespace {

using namespace cetnet;

template <class T>
std::vector<T> parse_list(const std::string& text, T (*convert)(const std::string&)) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(convert(item));
  }
  if (out.empty()) throw ArgumentError("empty list '" + text + "'");
  return out;
}

std::uint64_t to_u64(const std::string& s) {
  std::size_t pos = 0;
  const unsigned long long v = std::stoull(s, &pos);
  if (pos != s.size()) throw ArgumentError("not an integer: '" + s + "'");
  return v;
}

std::size_t to_size(const std::string& s) { return static_cast<std::size_t>(to_u64(s)); }

std::string records_path(const TrainConfig& cfg) {
  return (std::filesystem::path(resolve_output_dir(cfg)) / "records.jsonl").string();
}

void print_summary(const RunRecord& r) {
  std::cout << std::fixed << std::setprecision(6) << (r.label.empty() ? "run" : r.label) << " seed "
            << r.config.at("seed").get<std::uint64_t>() << " hash " << r.config_hash << "  test auc "
            << r.test.fused.auc << " gauc " << r.test.fused.gauc << " logloss " << r.test.fused.logloss;
  for (std::size_t i = 0; i < r.test.names.size(); ++i) {
    std::cout << "  [" << r.test.names[i] << " auc " << r.test.components[i].auc << "]";
  }
  std::cout << "  (" << std::setprecision(1) << r.wall_seconds << " s)" << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cetnet: confidence-fused CTR ensembles"};
  app.require_subcommand(1);

  std::string config_path, out, checkpoint, csv_path;
  std::string variants = "all", seeds = "42,43,44,45,46", multipliers = "1,2,3,4,10",
              modes = "se,me,ours_sum,ours_concat";
  std::uint64_t seed_override = 0;

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset as CSV");
  gen->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "Output CSV path")->required();

  auto* tr = app.add_subcommand("train", "Train one model and write its checkpoint");
  tr->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", out, "Output directory (overrides output_dir)");
  tr->add_option("--seed", seed_override, "Model seed (overrides seed)");

  auto* ev = app.add_subcommand("evaluate", "Score a CSV with a checkpoint");
  ev->add_option("checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  ev->add_option("csv", csv_path, "Dataset CSV")->required()->check(CLI::ExistingFile);

  auto* ab = app.add_subcommand("ablate", "Run ablation variants over seeds");
  ab->add_option("config", config_path, "Full-model config file")->required()->check(CLI::ExistingFile);
  ab->add_option("--variants", variants, "all, or a comma list (full is added automatically)");
  ab->add_option("--seeds", seeds, "Comma list of seeds");
  ab->add_option("--out", out, "Output directory");

  auto* sw = app.add_subcommand("scale-sweep", "Embedding-size sweep");
  sw->add_option("config", config_path, "Base config file")->required()->check(CLI::ExistingFile);
  sw->add_option("--multipliers", multipliers, "Comma list of multipliers");
  sw->add_option("--modes", modes, "Comma list of se, me, ours_sum, ours_concat");
  sw->add_option("--seeds", seeds, "Comma list of seeds");
  sw->add_option("--out", out, "Output directory");

  auto* oe = app.add_subcommand("one-epoch", "Single pass in stored order with an NE curve");
  oe->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  oe->add_option("--out", out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ev) {
      const LoadedModel loaded = load_model(checkpoint);
      const Dataset data = load_csv(csv_path, loaded.config.model.schema);
      const EvalReport report = evaluate(loaded.model, data, loaded.config.eval.gauc_weighting);
      std::cout << nlohmann::json(report).dump(2) << '\n';
      return 0;
    }

    TrainConfig cfg = load_config(config_path);
    if (!out.empty() && !*gen) cfg.output_dir = out;

    if (*gen) {
      if (cfg.data.source != "synthetic") throw ConfigError("gen-data needs data.source: synthetic");
      SyntheticSpec spec = cfg.data.synthetic;
      spec.schema = cfg.model.schema;
      const Dataset data = gen_synthetic(spec);
      write_csv(out, data);
      std::cout << "wrote " << data.size() << " rows to " << out << '\n';
    } else if (*tr) {
      if (tr->count("--seed")) cfg.seed = seed_override;
      const RunRecord r = train(cfg);
      append_record(records_path(cfg), r);
      print_summary(r);
      std::cout << "checkpoint " << r.checkpoint << '\n';
    } else if (*oe) {
      const RunRecord r = one_epoch(cfg, prepare_data(cfg));
      append_record(records_path(cfg), r);
      print_summary(r);
      for (const auto& p : r.ne_curve) std::cout << "  step " << p.step << " ne " << p.ne << '\n';
    } else if (*ab) {
      std::vector<AblationVariant> list{AblationVariant::kFull};
      if (variants == "all") {
        for (auto v : all_ablations()) list.push_back(v);
      } else {
        for (auto v : parse_list<AblationVariant>(variants, ablation_from_string)) {
          if (v != AblationVariant::kFull) list.push_back(v);
        }
      }
      const auto seed_list = parse_list<std::uint64_t>(seeds, to_u64);
      DataCache cache;
      std::map<std::string, std::pair<double, std::size_t>> mean_auc;
      for (auto v : list) {
        for (auto s : seed_list) {
          TrainConfig c = cfg;
          c.seed = s;
          const RunRecord r = run_ablation(c, v, cache.get(c));
          append_record(records_path(cfg), r);
          print_summary(r);
          auto& [sum, n] = mean_auc[to_string(v)];
          sum += r.test.fused.auc;
          ++n;
        }
      }
      const double full = mean_auc["full"].first / static_cast<double>(mean_auc["full"].second);
      std::cout << "\nvariant                    mean test AUC   delta vs full\n";
      for (auto v : list) {
        const auto& [sum, n] = mean_auc[to_string(v)];
        const double m = sum / static_cast<double>(n);
        std::cout << std::left << std::setw(26) << to_string(v) << std::right << std::fixed
                  << std::setprecision(6) << std::setw(14) << m << std::showpos << std::setw(16)
                  << m - full << std::noshowpos << '\n';
      }
    } else if (*sw) {
      const auto mults = parse_list<std::size_t>(multipliers, to_size);
      const auto mode_list = parse_list<SweepMode>(modes, sweep_mode_from_string);
      const auto seed_list = parse_list<std::uint64_t>(seeds, to_u64);
      DataCache cache;
      const auto cells = scale_sweep(cfg, mults, mode_list, seed_list, cache);
      for (const auto& c : cells) {
        append_record(records_path(cfg), c.record);
        print_summary(c.record);
      }
      const std::string csv = (std::filesystem::path(resolve_output_dir(cfg)) / "sweep.csv").string();
      write_sweep_csv(csv, cells);
      std::cout << "wrote " << csv << '\n';
    }
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
