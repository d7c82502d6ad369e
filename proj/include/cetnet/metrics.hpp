#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include <json.hpp>

#include "cetnet/tensor.hpp"

namespace cetnet {

enum class GaucWeighting { kUniform, kImpressions };

struct MetricsReport {
  double auc = 0.0;
  double gauc = 0.0;
  double logloss = 0.0;
  double ne = 0.0;
  std::size_t examples = 0;
  std::size_t users_scored = 0;
  std::size_t users_skipped = 0;
};

void to_json(nlohmann::json& j, const MetricsReport& r);
void from_json(const nlohmann::json& j, MetricsReport& r);

// Mann-Whitney AUC with midranks for ties. Throws UndefinedMetricError on a single class.
double auc(std::span<const double> scores, std::span<const double> labels);

struct GaucResult {
  double value = 0.0;
  std::size_t users_scored = 0;
  std::size_t users_skipped = 0;
};

// Mean per-user AUC over users that have both classes.
GaucResult g_auc(std::span<const double> scores, std::span<const double> labels,
                 std::span<const std::int64_t> user_ids,
                 GaucWeighting weighting = GaucWeighting::kUniform);

// Mean BCE in nats; scores clamped into [kProbEps, 1 - kProbEps].
double logloss(std::span<const double> scores, std::span<const double> labels);

// logloss / entropy of the empirical positive rate.
double normalized_entropy(std::span<const double> scores, std::span<const double> labels);

// Relative change (ne_b - ne_a) / ne_a.
double ne_delta(double ne_a, double ne_b);

/// exp(Shannon entropy of the normalized singular values) of a [V x d] table.
/// Returns 1 for an all-zero table.
double effective_rank(const Tensor& table);

// Singular values (descending) of a row-major [rows x cols] matrix, one-sided Jacobi.
std::vector<double> singular_values(std::span<const double> values, std::size_t rows,
                                    std::size_t cols);

MetricsReport evaluate_predictions(std::span<const double> scores, std::span<const double> labels,
                                   std::span<const std::int64_t> user_ids,
                                   GaucWeighting weighting = GaucWeighting::kUniform);

}  // namespace cetnet
