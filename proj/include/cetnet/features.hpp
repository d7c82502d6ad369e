#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace cetnet {

// Id 0 of every sparse and sequence vocabulary is reserved for padding/unknown.
inline constexpr std::size_t kPaddingId = 0;

struct SparseField {
  std::string name;
  std::size_t cardinality = 2;
  bool operator==(const SparseField&) const = default;
};

struct DenseField {
  std::string name;
  bool operator==(const DenseField&) const = default;
};

struct SequenceField {
  std::string name;
  std::size_t vocab = 2;
  std::size_t max_len = 1;
  // Sparse field whose embedding rows this sequence reuses (history items
  // living in the target item's vocabulary). Empty means own rows.
  std::string shares;
  bool operator==(const SequenceField&) const = default;
};

struct FeatureSchema {
  std::vector<SparseField> sparse;
  std::vector<DenseField> dense;
  std::vector<SequenceField> sequences;
  std::string user_id_field = "user_id";
  // Sparse field used as the attention query; empty means the first sparse field.
  std::string target_field;

  void validate() const;
  std::size_t target_index() const;
  bool operator==(const FeatureSchema&) const = default;
};

void to_json(nlohmann::json& j, const FeatureSchema& s);
void from_json(const nlohmann::json& j, FeatureSchema& s);

/// A batch (or a whole dataset) in columnar row-major layout.
struct ExampleBatch {
  std::size_t size = 0;
  std::size_t n_sparse = 0, n_dense = 0, n_seq = 0, max_len = 0;
  std::vector<double> labels;            // [B], each 0 or 1
  std::vector<std::int64_t> user_ids;    // [B]
  std::vector<std::size_t> sparse;       // [B x n_sparse]
  std::vector<double> dense;             // [B x n_dense]
  std::vector<std::size_t> sequences;    // [B x n_seq x max_len]
  std::vector<std::size_t> seq_lengths;  // [B x n_seq]

  std::size_t sparse_id(std::size_t row, std::size_t field) const {
    return sparse[row * n_sparse + field];
  }
  std::size_t seq_length(std::size_t row, std::size_t seq) const {
    return seq_lengths[row * n_seq + seq];
  }
  std::span<const std::size_t> sequence(std::size_t row, std::size_t seq) const {
    return {sequences.data() + (row * n_seq + seq) * max_len, max_len};
  }
  bool operator==(const ExampleBatch&) const = default;
};

struct InteractionMix {
  double linear = 1.0;
  double cross = 1.0;
  double sequence = 1.0;
  bool operator==(const InteractionMix&) const = default;
};

struct SyntheticSpec {
  FeatureSchema schema;
  std::size_t latent_dim = 8;
  InteractionMix mix;
  double noise = 0.5;
  double base_rate = 0.3;
  std::size_t samples = 10000;
  std::uint64_t seed = 42;
  std::size_t users = 1000;
  // Optional sparse field whose id is tied to the user id.
  std::string user_field;

  void validate() const;
  bool operator==(const SyntheticSpec&) const = default;
};

void to_json(nlohmann::json& j, const SyntheticSpec& s);
void from_json(const nlohmann::json& j, SyntheticSpec& s);

struct Dataset {
  FeatureSchema schema;
  ExampleBatch rows;
  std::optional<SyntheticSpec> generator;
  std::size_t oov_count = 0;

  std::size_t size() const { return rows.size; }
  ExampleBatch select(std::span<const std::size_t> indices) const;
  Dataset subset(std::span<const std::size_t> indices) const;
  double positive_rate() const;
};

/// Keeps the most recent `max_len` ids (the tail) or right-pads with 0.
std::pair<std::vector<std::size_t>, std::size_t> pad_or_truncate(
    std::span<const std::size_t> seq, std::size_t max_len);

Dataset gen_synthetic(const SyntheticSpec& spec);

Dataset load_csv(const std::string& path, const FeatureSchema& schema);
void write_csv(const std::string& path, const Dataset& data);
std::string csv_header(const FeatureSchema& schema);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  bool operator==(const SplitFractions&) const = default;
};

struct DatasetSplits {
  Dataset train, val, test;
};

// val/test sizes are floor(n * fraction); the remainder goes to train.
DatasetSplits split(const Dataset& data, SplitFractions fractions, std::uint64_t seed);

/// Row order for one epoch, chunked into batches. Without a seed the stored
/// order is kept.
std::vector<std::vector<std::size_t>> batch_order(std::size_t rows, std::size_t batch_size,
                                                  std::optional<std::uint64_t> shuffle_seed);

class BatchIterator {
 public:
  BatchIterator(const Dataset& data, std::size_t batch_size,
                std::optional<std::uint64_t> shuffle_seed);
  bool has_next() const { return next_ < order_.size(); }
  ExampleBatch next();
  std::span<const std::size_t> last_indices() const { return order_[next_ - 1]; }
  std::size_t batch_count() const { return order_.size(); }

 private:
  const Dataset* data_;
  std::vector<std::vector<std::size_t>> order_;
  std::size_t next_ = 0;
};

}  // namespace cetnet
