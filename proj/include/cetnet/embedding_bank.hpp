#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cetnet/features.hpp"
#include "cetnet/nn.hpp"
#include "cetnet/tensor.hpp"

namespace cetnet {

enum class BankMode { kMulti, kShared };

std::string to_string(BankMode mode);
BankMode bank_mode_from_string(const std::string& s);

struct BankComponentSpec {
  std::string name;
  std::size_t dim = 16;
};

/// One embedding table and one dense-feature MLP per component model.
///
/// Each table is a single [rows x d] matrix: row 0 is the padding row used by
/// every sequence position holding id 0, followed by one block of
/// `cardinality` rows per sparse field and per non-shared sequence field.
/// In shared mode every component aliases the first component's table (and,
/// with `share_dense_mlp`, its dense MLP).
class EmbeddingBank {
 public:
  EmbeddingBank() = default;
  EmbeddingBank(const FeatureSchema& schema, std::vector<BankComponentSpec> components,
                BankMode mode, bool share_dense_mlp, Rng& rng);

  std::size_t component_count() const { return components_.size(); }
  std::size_t index_of(const std::string& component) const;
  const std::string& name(std::size_t c) const { return components_.at(c).name; }
  std::size_t dim(std::size_t c) const { return components_.at(c).dim; }
  BankMode mode() const { return mode_; }
  bool share_dense_mlp() const { return share_dense_mlp_; }
  const FeatureSchema& schema() const { return schema_; }

  std::size_t row_count() const { return rows_; }
  std::size_t sparse_offset(std::size_t field) const { return sparse_offset_.at(field); }
  // Table row for a sequence id (id 0 maps to the padding row).
  std::size_t sequence_row(std::size_t seq_field, std::size_t id) const;

  const Tensor& table(std::size_t c) const { return components_.at(c).table; }
  const Mlp& dense_mlp(std::size_t c) const { return components_.at(c).dense_mlp; }

  // [B x n x d]
  Tensor lookup_sparse(std::size_t c, const ExampleBatch& batch) const;
  Tensor lookup_sparse(const std::string& component, const ExampleBatch& batch) const {
    return lookup_sparse(index_of(component), batch);
  }
  // [B x N x d] for one sequence field.
  Tensor lookup_sequence_field(std::size_t c, const ExampleBatch& batch, std::size_t field) const;
  // [B x k x N x d]
  Tensor lookup_sequence(std::size_t c, const ExampleBatch& batch) const;
  Tensor lookup_sequence(const std::string& component, const ExampleBatch& batch) const {
    return lookup_sequence(index_of(component), batch);
  }
  // [B x d]: Linear(m -> 2d) + ReLU, then Linear(2d -> d).
  Tensor encode_dense(std::size_t c, const ExampleBatch& batch) const;
  Tensor encode_dense(const std::string& component, const ExampleBatch& batch) const {
    return encode_dense(index_of(component), batch);
  }

  /// Fresh bank with every dimension multiplied, re-initialized from `rng`.
  EmbeddingBank scale_dims(std::size_t multiplier, Rng& rng) const;

  void register_to(ParamStore& store, const std::string& prefix) const;
  std::size_t parameter_count() const;

 private:
  struct Component {
    std::string name;
    std::size_t dim = 0;
    Tensor table;
    Mlp dense_mlp;
  };

  FeatureSchema schema_;
  BankMode mode_ = BankMode::kMulti;
  bool share_dense_mlp_ = true;
  std::size_t rows_ = 0;
  std::vector<std::size_t> sparse_offset_;
  std::vector<std::size_t> seq_offset_;
  std::vector<Component> components_;
};

}  // namespace cetnet
