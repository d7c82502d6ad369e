#include "cetnet/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "cetnet/errors.hpp"
#include "cetnet/rng.hpp"

namespace cetnet {

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

void FeatureSchema::validate() const {
  std::set<std::string> names;
  auto unique = [&](const std::string& n) {
    if (n.empty()) throw ConfigError("feature field with empty name");
    if (!names.insert(n).second) throw ConfigError("duplicate feature field name " + n);
  };
  for (const auto& f : sparse) {
    unique(f.name);
    if (f.cardinality < 2) throw ConfigError("sparse field " + f.name + " needs cardinality >= 2");
  }
  for (const auto& f : dense) unique(f.name);
  for (const auto& f : sequences) {
    unique(f.name);
    if (f.vocab < 2) throw ConfigError("sequence field " + f.name + " needs vocab >= 2");
    if (f.max_len < 1) throw ConfigError("sequence field " + f.name + " needs max_len >= 1");
    if (!f.shares.empty()) {
      auto it = std::find_if(sparse.begin(), sparse.end(),
                             [&](const auto& sf) { return sf.name == f.shares; });
      if (it == sparse.end() || it->cardinality != f.vocab) {
        throw ConfigError("sequence field " + f.name + " shares rows with " + f.shares +
                          ", which must be a sparse field of equal cardinality");
      }
    }
  }
  if (!target_field.empty()) target_index();
}

std::size_t FeatureSchema::target_index() const {
  if (sparse.empty()) throw ConfigError("schema has no sparse field to use as attention target");
  if (target_field.empty()) return 0;
  for (std::size_t i = 0; i < sparse.size(); ++i) {
    if (sparse[i].name == target_field) return i;
  }
  throw ConfigError("target field " + target_field + " is not a sparse field");
}

void to_json(nlohmann::json& j, const FeatureSchema& s) {
  j = nlohmann::json::object();
  j["sparse"] = nlohmann::json::array();
  for (const auto& f : s.sparse) j["sparse"].push_back({{"name", f.name}, {"cardinality", f.cardinality}});
  j["dense"] = nlohmann::json::array();
  for (const auto& f : s.dense) j["dense"].push_back(f.name);
  j["sequences"] = nlohmann::json::array();
  for (const auto& f : s.sequences) {
    j["sequences"].push_back(
        {{"name", f.name}, {"vocab", f.vocab}, {"max_len", f.max_len}, {"shares", f.shares}});
  }
  j["user_id_field"] = s.user_id_field;
  j["target_field"] = s.target_field;
}

void from_json(const nlohmann::json& j, FeatureSchema& s) {
  s = FeatureSchema{};
  for (const auto& f : j.at("sparse")) {
    s.sparse.push_back({f.at("name").get<std::string>(), f.at("cardinality").get<std::size_t>()});
  }
  for (const auto& f : j.at("dense")) s.dense.push_back({f.get<std::string>()});
  for (const auto& f : j.at("sequences")) {
    s.sequences.push_back({f.at("name").get<std::string>(), f.at("vocab").get<std::size_t>(),
                           f.at("max_len").get<std::size_t>(), f.value("shares", std::string())});
  }
  s.user_id_field = j.value("user_id_field", std::string("user_id"));
  s.target_field = j.value("target_field", std::string());
}

void SyntheticSpec::validate() const {
  schema.validate();
  if (samples == 0) throw ArgumentError("synthetic spec with zero samples");
  if (!(base_rate > 0.0 && base_rate < 1.0)) throw ArgumentError("base_rate must be in (0,1)");
  if (mix.linear < 0 || mix.cross < 0 || mix.sequence < 0) {
    throw ArgumentError("interaction mix weights must be >= 0");
  }
  if (noise < 0) throw ArgumentError("noise scale must be >= 0");
  if (latent_dim < 1) throw ArgumentError("latent_dim must be >= 1");
  if (users < 1) throw ArgumentError("users must be >= 1");
  if (!user_field.empty()) {
    bool found = std::any_of(schema.sparse.begin(), schema.sparse.end(),
                             [&](const auto& f) { return f.name == user_field; });
    if (!found) throw ConfigError("user_field " + user_field + " is not a sparse field");
  }
}

void to_json(nlohmann::json& j, const SyntheticSpec& s) {
  j = {{"schema", s.schema},
       {"latent_dim", s.latent_dim},
       {"mix", {{"linear", s.mix.linear}, {"cross", s.mix.cross}, {"sequence", s.mix.sequence}}},
       {"noise", s.noise},
       {"base_rate", s.base_rate},
       {"samples", s.samples},
       {"seed", s.seed},
       {"users", s.users},
       {"user_field", s.user_field}};
}

void from_json(const nlohmann::json& j, SyntheticSpec& s) {
  s = SyntheticSpec{};
  s.schema = j.at("schema").get<FeatureSchema>();
  s.latent_dim = j.value("latent_dim", s.latent_dim);
  if (j.contains("mix")) {
    s.mix.linear = j["mix"].value("linear", s.mix.linear);
    s.mix.cross = j["mix"].value("cross", s.mix.cross);
    s.mix.sequence = j["mix"].value("sequence", s.mix.sequence);
  }
  s.noise = j.value("noise", s.noise);
  s.base_rate = j.value("base_rate", s.base_rate);
  s.samples = j.value("samples", s.samples);
  s.seed = j.value("seed", s.seed);
  s.users = j.value("users", s.users);
  s.user_field = j.value("user_field", s.user_field);
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

namespace {

ExampleBatch empty_like(const FeatureSchema& schema) {
  ExampleBatch b;
  b.n_sparse = schema.sparse.size();
  b.n_dense = schema.dense.size();
  b.n_seq = schema.sequences.size();
  for (const auto& f : schema.sequences) b.max_len = std::max(b.max_len, f.max_len);
  return b;
}

}  // namespace

ExampleBatch Dataset::select(std::span<const std::size_t> indices) const {
  const ExampleBatch& src = rows;
  ExampleBatch b = empty_like(schema);
  b.max_len = src.max_len;
  b.size = indices.size();
  const std::size_t seq_row = src.n_seq * src.max_len;
  b.labels.reserve(b.size);
  b.user_ids.reserve(b.size);
  b.sparse.reserve(b.size * src.n_sparse);
  b.dense.reserve(b.size * src.n_dense);
  b.sequences.reserve(b.size * seq_row);
  b.seq_lengths.reserve(b.size * src.n_seq);
  for (auto r : indices) {
    if (r >= src.size) throw ArgumentError("row index " + std::to_string(r) + " out of range");
    b.labels.push_back(src.labels[r]);
    b.user_ids.push_back(src.user_ids[r]);
    auto copy = [r](const auto& from, auto& to, std::size_t width) {
      to.insert(to.end(), from.begin() + r * width, from.begin() + (r + 1) * width);
    };
    copy(src.sparse, b.sparse, src.n_sparse);
    copy(src.dense, b.dense, src.n_dense);
    copy(src.sequences, b.sequences, seq_row);
    copy(src.seq_lengths, b.seq_lengths, src.n_seq);
  }
  return b;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset d;
  d.schema = schema;
  d.generator = generator;
  d.rows = select(indices);
  return d;
}

double Dataset::positive_rate() const {
  if (rows.size == 0) return 0.0;
  double s = 0.0;
  for (double y : rows.labels) s += y;
  return s / static_cast<double>(rows.size);
}

std::pair<std::vector<std::size_t>, std::size_t> pad_or_truncate(
    std::span<const std::size_t> seq, std::size_t max_len) {
  if (max_len < 1) throw ArgumentError("pad_or_truncate needs max_len >= 1");
  std::vector<std::size_t> out(max_len, kPaddingId);
  const std::size_t len = std::min(seq.size(), max_len);
  std::copy(seq.end() - static_cast<std::ptrdiff_t>(len), seq.end(), out.begin());
  return {std::move(out), len};
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

namespace {

struct LatentTable {
  std::size_t dim = 0;
  std::vector<double> values;  // [V x dim]
  const double* row(std::size_t id) const { return values.data() + id * dim; }
};

LatentTable make_latents(Rng& rng, std::size_t vocab, std::size_t dim) {
  std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  LatentTable t{dim, std::vector<double>(vocab * dim)};
  for (auto& v : t.values) v = dist(rng);
  return t;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void standardize(std::vector<double>& v) {
  if (v.empty()) return;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m);
  var /= static_cast<double>(v.size());
  const double sd = std::sqrt(var);
  for (auto& x : v) x = sd > 1e-12 ? (x - m) / sd : 0.0;
}

}  // namespace

Dataset gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const FeatureSchema& schema = spec.schema;
  Rng rng(spec.seed);
  const std::size_t L = spec.latent_dim;
  const std::size_t n_sparse = schema.sparse.size();
  const std::size_t n_dense = schema.dense.size();
  const std::size_t n_seq = schema.sequences.size();

  // Planted parameters.
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> field_bias(n_sparse);
  std::vector<LatentTable> field_latent(n_sparse);
  for (std::size_t f = 0; f < n_sparse; ++f) {
    field_bias[f].resize(schema.sparse[f].cardinality);
    for (auto& b : field_bias[f]) b = unit(rng);
    field_latent[f] = make_latents(rng, schema.sparse[f].cardinality, L);
  }
  std::vector<double> dense_coef(n_dense);
  for (auto& c : dense_coef) c = unit(rng);
  const std::size_t target = n_sparse ? schema.target_index() : 0;
  // History items share the target's latent space when the vocabularies agree.
  std::vector<LatentTable> seq_latent(n_seq);
  for (std::size_t j = 0; j < n_seq; ++j) {
    if (n_sparse && schema.sequences[j].vocab == schema.sparse[target].cardinality) {
      seq_latent[j] = field_latent[target];
    } else {
      seq_latent[j] = make_latents(rng, schema.sequences[j].vocab, L);
    }
  }
  std::size_t user_field = n_sparse;
  for (std::size_t f = 0; f < n_sparse; ++f) {
    if (schema.sparse[f].name == spec.user_field) user_field = f;
  }

  Dataset data;
  data.schema = schema;
  data.generator = spec;
  ExampleBatch& rows = data.rows;
  rows = empty_like(schema);
  const std::size_t n = spec.samples;
  rows.size = n;
  rows.labels.resize(n);
  rows.user_ids.resize(n);
  rows.sparse.resize(n * n_sparse);
  rows.dense.resize(n * n_dense);
  rows.sequences.assign(n * n_seq * rows.max_len, kPaddingId);
  rows.seq_lengths.resize(n * n_seq);

  std::vector<double> lin(n, 0.0), cross(n, 0.0), seq(n, 0.0);
  std::uniform_int_distribution<std::size_t> user_dist(0, spec.users - 1);
  std::vector<std::size_t> history;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t u = user_dist(rng);
    rows.user_ids[r] = static_cast<std::int64_t>(u);
    for (std::size_t f = 0; f < n_sparse; ++f) {
      const std::size_t card = schema.sparse[f].cardinality;
      std::size_t id;
      if (f == user_field) {
        id = 1 + u % (card - 1);
      } else {
        id = std::uniform_int_distribution<std::size_t>(1, card - 1)(rng);
      }
      rows.sparse[r * n_sparse + f] = id;
      lin[r] += field_bias[f][id] / std::sqrt(static_cast<double>(n_sparse));
    }
    for (std::size_t d = 0; d < n_dense; ++d) {
      const double x = unit(rng);
      rows.dense[r * n_dense + d] = x;
      lin[r] += dense_coef[d] * x;
    }
    for (std::size_t f = 0; f < n_sparse; ++f) {
      for (std::size_t g = f + 1; g < n_sparse; ++g) {
        cross[r] += dot(field_latent[f].row(rows.sparse[r * n_sparse + f]),
                        field_latent[g].row(rows.sparse[r * n_sparse + g]), L);
      }
    }
    for (std::size_t j = 0; j < n_seq; ++j) {
      const auto& sf = schema.sequences[j];
      const std::size_t raw_len =
          std::uniform_int_distribution<std::size_t>(0, sf.max_len + sf.max_len / 2)(rng);
      history.resize(raw_len);
      for (auto& h : history) h = std::uniform_int_distribution<std::size_t>(1, sf.vocab - 1)(rng);
      auto [ids, len] = pad_or_truncate(history, sf.max_len);
      std::copy(ids.begin(), ids.end(),
                rows.sequences.begin() + static_cast<std::ptrdiff_t>((r * n_seq + j) * rows.max_len));
      rows.seq_lengths[r * n_seq + j] = len;
      // Target-aware affinity: the best-matching recent interaction.
      if (len > 0 && n_sparse) {
        const double* q = field_latent[target].row(rows.sparse[r * n_sparse + target]);
        double best = -1e300;
        for (std::size_t t = 0; t < len; ++t) best = std::max(best, dot(seq_latent[j].row(ids[t]), q, L));
        seq[r] += best;
      }
    }
  }
  standardize(lin);
  standardize(cross);
  standardize(seq);

  const double bias = std::log(spec.base_rate / (1.0 - spec.base_rate));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double z = bias + spec.mix.linear * lin[r] + spec.mix.cross * cross[r] +
                     spec.mix.sequence * seq[r] + spec.noise * unit(rng);
    const double p = 1.0 / (1.0 + std::exp(-z));
    rows.labels[r] = coin(rng) < p ? 1.0 : 0.0;
  }
  return data;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::string csv_header(const FeatureSchema& schema) {
  std::string h = "label," + schema.user_id_field;
  for (const auto& f : schema.dense) h += ",d_" + f.name;
  for (const auto& f : schema.sparse) h += ",s_" + f.name;
  for (const auto& f : schema.sequences) h += ",q_" + f.name;
  return h;
}

void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open " + path + " for writing");
  const FeatureSchema& s = data.schema;
  const ExampleBatch& b = data.rows;
  out << csv_header(s) << '\n';
  char buf[64];
  for (std::size_t r = 0; r < b.size; ++r) {
    out << static_cast<int>(b.labels[r]) << ',' << b.user_ids[r];
    for (std::size_t d = 0; d < b.n_dense; ++d) {
      std::snprintf(buf, sizeof buf, "%.17g", b.dense[r * b.n_dense + d]);
      out << ',' << buf;
    }
    for (std::size_t f = 0; f < b.n_sparse; ++f) out << ',' << b.sparse_id(r, f);
    for (std::size_t j = 0; j < b.n_seq; ++j) {
      out << ',';
      auto ids = b.sequence(r, j);
      for (std::size_t t = 0; t < b.seq_length(r, j); ++t) {
        if (t) out << '|';
        out << ids[t];
      }
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <class T>
T parse_int(std::string_view cell, std::size_t line_no, const std::string& column) {
  T v{};
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw ParseError("line " + std::to_string(line_no) + ": column " + column +
                     ": expected a non-negative integer, got '" + std::string(cell) + "'");
  }
  return v;
}

double parse_double(std::string_view cell, std::size_t line_no, const std::string& column) {
  std::string tmp(cell);
  char* end = nullptr;
  double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": column " + column +
                     ": expected a decimal, got '" + tmp + "'");
  }
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const FeatureSchema& schema) {
  schema.validate();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::unordered_map<std::string, std::size_t> col;
  {
    auto names = split_fields(line, ',');
    for (std::size_t i = 0; i < names.size(); ++i) col[std::string(names[i])] = i;
  }
  auto column = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end()) throw SchemaError(path + ": missing column " + name);
    return it->second;
  };
  const std::size_t c_label = column("label");
  const std::size_t c_user = column(schema.user_id_field);
  std::vector<std::size_t> c_dense, c_sparse, c_seq;
  for (const auto& f : schema.dense) c_dense.push_back(column("d_" + f.name));
  for (const auto& f : schema.sparse) c_sparse.push_back(column("s_" + f.name));
  for (const auto& f : schema.sequences) c_seq.push_back(column("q_" + f.name));

  Dataset data;
  data.schema = schema;
  ExampleBatch& b = data.rows;
  b = empty_like(schema);
  std::size_t line_no = 1;
  std::vector<std::size_t> seq;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_fields(line, ',');
    if (cells.size() < col.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(col.size()) + " columns, got " +
                       std::to_string(cells.size()));
    }
    const auto label = parse_int<int>(cells[c_label], line_no, "label");
    if (label != 0 && label != 1) {
      throw ParseError("line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
    b.labels.push_back(label);
    b.user_ids.push_back(parse_int<std::int64_t>(cells[c_user], line_no, schema.user_id_field));
    for (std::size_t d = 0; d < c_dense.size(); ++d) {
      b.dense.push_back(parse_double(cells[c_dense[d]], line_no, "d_" + schema.dense[d].name));
    }
    for (std::size_t f = 0; f < c_sparse.size(); ++f) {
      auto id = parse_int<std::size_t>(cells[c_sparse[f]], line_no, "s_" + schema.sparse[f].name);
      if (id >= schema.sparse[f].cardinality) {
        id = kPaddingId;
        ++data.oov_count;
      }
      b.sparse.push_back(id);
    }
    for (std::size_t j = 0; j < c_seq.size(); ++j) {
      const auto& sf = schema.sequences[j];
      seq.clear();
      if (!cells[c_seq[j]].empty()) {
        for (auto tok : split_fields(cells[c_seq[j]], '|')) {
          auto id = parse_int<std::size_t>(tok, line_no, "q_" + sf.name);
          if (id >= sf.vocab) {
            id = kPaddingId;
            ++data.oov_count;
          }
          seq.push_back(id);
        }
      }
      auto [ids, len] = pad_or_truncate(seq, sf.max_len);
      ids.resize(b.max_len, kPaddingId);
      b.sequences.insert(b.sequences.end(), ids.begin(), ids.end());
      b.seq_lengths.push_back(len);
    }
    ++b.size;
  }
  return data;
}

// ---------------------------------------------------------------------------
// Splits and batching
// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

}  // namespace

DatasetSplits split(const Dataset& data, SplitFractions fr, std::uint64_t seed) {
  if (fr.train < 0 || fr.val < 0 || fr.test < 0 ||
      std::abs(fr.train + fr.val + fr.test - 1.0) > 1e-9) {
    throw ArgumentError("split fractions must be non-negative and sum to 1");
  }
  const std::size_t n = data.size();
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fr.val));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fr.test));
  const std::size_t n_train = n - n_val - n_test;
  auto idx = permutation(n, seed);
  std::span<const std::size_t> all(idx);
  DatasetSplits s;
  s.train = data.subset(all.subspan(0, n_train));
  s.val = data.subset(all.subspan(n_train, n_val));
  s.test = data.subset(all.subspan(n_train + n_val, n_test));
  return s;
}

std::vector<std::vector<std::size_t>> batch_order(std::size_t rows, std::size_t batch_size,
                                                  std::optional<std::uint64_t> shuffle_seed) {
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  std::vector<std::size_t> idx;
  if (shuffle_seed) {
    idx = permutation(rows, *shuffle_seed);
  } else {
    idx.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) idx[i] = i;
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < rows; start += batch_size) {
    const std::size_t end = std::min(rows, start + batch_size);
    batches.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(start),
                         idx.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

BatchIterator::BatchIterator(const Dataset& data, std::size_t batch_size,
                             std::optional<std::uint64_t> shuffle_seed)
    : data_(&data), order_(batch_order(data.size(), batch_size, shuffle_seed)) {}

ExampleBatch BatchIterator::next() {
  if (!has_next()) throw ArgumentError("BatchIterator exhausted");
  return data_->select(order_[next_++]);
}

}  // namespace cetnet
