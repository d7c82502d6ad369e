#include "cetnet/embedding_bank.hpp"

#include <algorithm>
#include <unordered_set>

namespace cetnet {

std::string to_string(BankMode mode) { return mode == BankMode::kMulti ? "multi" : "shared"; }

BankMode bank_mode_from_string(const std::string& s) {
  if (s == "multi") return BankMode::kMulti;
  if (s == "shared") return BankMode::kShared;
  throw ConfigError("unknown embedding mode '" + s + "' (expected multi|shared)");
}

namespace {

constexpr double kEmbeddingInitStd = 0.01;

}  // namespace

EmbeddingBank::EmbeddingBank(const FeatureSchema& schema, std::vector<BankComponentSpec> specs,
                             BankMode mode, bool share_dense_mlp, Rng& rng)
    : schema_(schema), mode_(mode), share_dense_mlp_(share_dense_mlp) {
  schema_.validate();
  if (specs.empty()) throw ConfigError("embedding bank needs at least one component");
  std::unordered_set<std::string> names;
  for (const auto& s : specs) {
    if (s.dim < 1) throw ConfigError("component " + s.name + " has embedding dim 0");
    if (!names.insert(s.name).second) throw ConfigError("duplicate component name " + s.name);
    if (mode == BankMode::kShared && s.dim != specs.front().dim) {
      throw ConfigError("shared embedding mode requires equal dims across components");
    }
  }

  rows_ = 1;  // padding row
  for (const auto& f : schema_.sparse) {
    sparse_offset_.push_back(rows_);
    rows_ += f.cardinality;
  }
  for (const auto& f : schema_.sequences) {
    if (f.shares.empty()) {
      seq_offset_.push_back(rows_);
      rows_ += f.vocab;
    } else {
      auto it = std::find_if(schema_.sparse.begin(), schema_.sparse.end(),
                             [&](const auto& sf) { return sf.name == f.shares; });
      seq_offset_.push_back(sparse_offset_[static_cast<std::size_t>(it - schema_.sparse.begin())]);
    }
  }

  const std::size_t m = schema_.dense.size();
  for (std::size_t c = 0; c < specs.size(); ++c) {
    Component comp{specs[c].name, specs[c].dim, {}, {}};
    const std::size_t d = comp.dim;
    if (mode == BankMode::kShared && c > 0) {
      comp.table = components_.front().table;
    } else {
      comp.table = normal_param(rng, {rows_, d}, kEmbeddingInitStd);
    }
    if (mode == BankMode::kShared && share_dense_mlp && c > 0) {
      comp.dense_mlp = components_.front().dense_mlp;
    } else {
      comp.dense_mlp = Mlp::init(rng, m, {2 * d, d}, /*relu_last=*/false);
    }
    components_.push_back(std::move(comp));
  }
}

std::size_t EmbeddingBank::index_of(const std::string& component) const {
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (components_[i].name == component) return i;
  }
  throw ConfigError("unknown component '" + component + "'");
}

std::size_t EmbeddingBank::sequence_row(std::size_t seq_field, std::size_t id) const {
  return id == kPaddingId ? 0 : seq_offset_.at(seq_field) + id;
}

Tensor EmbeddingBank::lookup_sparse(std::size_t c, const ExampleBatch& batch) const {
  const auto& comp = components_.at(c);
  const std::size_t n = schema_.sparse.size();
  if (batch.n_sparse != n) {
    throw ShapeError("batch has " + std::to_string(batch.n_sparse) + " sparse fields, schema " +
                     std::to_string(n));
  }
  std::vector<std::size_t> rows(batch.size * n);
  for (std::size_t b = 0; b < batch.size; ++b) {
    for (std::size_t f = 0; f < n; ++f) {
      const std::size_t id = batch.sparse_id(b, f);
      if (id >= schema_.sparse[f].cardinality) {
        throw LookupError("sparse id " + std::to_string(id) + " out of range for field " +
                          schema_.sparse[f].name + " (cardinality " +
                          std::to_string(schema_.sparse[f].cardinality) + ")");
      }
      rows[b * n + f] = sparse_offset_[f] + id;
    }
  }
  return reshape(gather_rows(comp.table, rows), {batch.size, n, comp.dim});
}

Tensor EmbeddingBank::lookup_sequence_field(std::size_t c, const ExampleBatch& batch,
                                            std::size_t field) const {
  const auto& comp = components_.at(c);
  if (field >= schema_.sequences.size()) {
    throw ArgumentError("sequence field index " + std::to_string(field) + " out of range");
  }
  const std::size_t len = batch.max_len;
  const std::size_t vocab = schema_.sequences[field].vocab;
  std::vector<std::size_t> rows(batch.size * len);
  for (std::size_t b = 0; b < batch.size; ++b) {
    auto ids = batch.sequence(b, field);
    for (std::size_t t = 0; t < len; ++t) {
      if (ids[t] >= vocab) {
        throw LookupError("sequence id " + std::to_string(ids[t]) + " out of range for field " +
                          schema_.sequences[field].name + " (vocab " + std::to_string(vocab) +
                          ")");
      }
      rows[b * len + t] = sequence_row(field, ids[t]);
    }
  }
  return reshape(gather_rows(comp.table, rows), {batch.size, len, comp.dim});
}

Tensor EmbeddingBank::lookup_sequence(std::size_t c, const ExampleBatch& batch) const {
  const std::size_t k = schema_.sequences.size();
  const std::size_t d = components_.at(c).dim;
  if (k == 0) return Tensor::zeros({batch.size, 0, batch.max_len, d});
  std::vector<Tensor> parts;
  for (std::size_t j = 0; j < k; ++j) {
    parts.push_back(reshape(lookup_sequence_field(c, batch, j), {batch.size, 1, batch.max_len, d}));
  }
  return concat(parts, 1);
}

Tensor EmbeddingBank::encode_dense(std::size_t c, const ExampleBatch& batch) const {
  const auto& comp = components_.at(c);
  const std::size_t m = schema_.dense.size();
  if (batch.n_dense != m) {
    throw ShapeError("dense width " + std::to_string(batch.n_dense) + " does not match schema (" +
                     std::to_string(m) + ")");
  }
  return comp.dense_mlp(Tensor::from({batch.size, m}, batch.dense));
}

EmbeddingBank EmbeddingBank::scale_dims(std::size_t multiplier, Rng& rng) const {
  if (multiplier < 1) throw ArgumentError("embedding multiplier must be >= 1");
  std::vector<BankComponentSpec> specs;
  for (const auto& c : components_) specs.push_back({c.name, c.dim * multiplier});
  return EmbeddingBank(schema_, std::move(specs), mode_, share_dense_mlp_, rng);
}

void EmbeddingBank::register_to(ParamStore& store, const std::string& prefix) const {
  for (const auto& c : components_) {
    store.add(prefix + "." + c.name + ".table", c.table);
    c.dense_mlp.register_to(store, prefix + "." + c.name + ".dense");
  }
}

std::size_t EmbeddingBank::parameter_count() const {
  ParamStore s;
  register_to(s, "bank");
  return s.scalar_count();
}

}  // namespace cetnet
