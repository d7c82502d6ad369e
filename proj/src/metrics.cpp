#include "cetnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

namespace cetnet {

void to_json(nlohmann::json& j, const MetricsReport& r) {
  j = {{"auc", r.auc},
       {"gauc", r.gauc},
       {"logloss", r.logloss},
       {"ne", r.ne},
       {"examples", r.examples},
       {"users_scored", r.users_scored},
       {"users_skipped", r.users_skipped}};
}

void from_json(const nlohmann::json& j, MetricsReport& r) {
  r.auc = j.at("auc").get<double>();
  r.gauc = j.at("gauc").get<double>();
  r.logloss = j.at("logloss").get<double>();
  r.ne = j.at("ne").get<double>();
  r.examples = j.at("examples").get<std::size_t>();
  r.users_scored = j.at("users_scored").get<std::size_t>();
  r.users_skipped = j.at("users_skipped").get<std::size_t>();
}

namespace {

void check_sizes(std::span<const double> scores, std::span<const double> labels, const char* what) {
  if (scores.size() != labels.size()) {
    throw ArgumentError(std::string(what) + ": " + std::to_string(scores.size()) + " scores vs " +
                        std::to_string(labels.size()) + " labels");
  }
}

// Returns NaN when only one class is present.
double auc_or_nan(std::span<const double> scores, std::span<const double> labels,
                  std::vector<std::size_t>& order) {
  const std::size_t n = scores.size();
  order.resize(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos = 0.0, rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    // 1-based midrank of the tie block [i, j].
    const double midrank = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] > 0.5) {
        pos += 1.0;
        rank_sum += midrank;
      }
    }
    i = j + 1;
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0.0 || neg == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double u = rank_sum - pos * (pos + 1.0) / 2.0;
  return u / (pos * neg);
}

}  // namespace

double auc(std::span<const double> scores, std::span<const double> labels) {
  check_sizes(scores, labels, "auc");
  std::vector<std::size_t> order;
  const double a = auc_or_nan(scores, labels, order);
  if (std::isnan(a)) throw UndefinedMetricError("AUC needs at least one positive and one negative");
  return a;
}

GaucResult g_auc(std::span<const double> scores, std::span<const double> labels,
                 std::span<const std::int64_t> user_ids, GaucWeighting weighting) {
  check_sizes(scores, labels, "g_auc");
  if (user_ids.size() != scores.size()) throw ArgumentError("g_auc: user id count mismatch");
  std::map<std::int64_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < user_ids.size(); ++i) groups[user_ids[i]].push_back(i);

  // A single user reduces to the plain AUC computation on the same ordering.
  if (groups.size() == 1) {
    std::vector<std::size_t> order;
    const double a = auc_or_nan(scores, labels, order);
    if (std::isnan(a)) throw UndefinedMetricError("gAUC: no user has both classes");
    return {a, 1, 0};
  }

  GaucResult r;
  double acc = 0.0, weight = 0.0;
  std::vector<double> s, l;
  std::vector<std::size_t> order;
  for (const auto& [user, rows] : groups) {
    s.clear();
    l.clear();
    for (auto i : rows) {
      s.push_back(scores[i]);
      l.push_back(labels[i]);
    }
    const double a = auc_or_nan(s, l, order);
    if (std::isnan(a)) {
      ++r.users_skipped;
      continue;
    }
    const double w = weighting == GaucWeighting::kUniform ? 1.0 : static_cast<double>(rows.size());
    acc += w * a;
    weight += w;
    ++r.users_scored;
  }
  if (r.users_scored == 0) throw UndefinedMetricError("gAUC: no user has both classes");
  r.value = acc / weight;
  return r;
}

double logloss(std::span<const double> scores, std::span<const double> labels) {
  check_sizes(scores, labels, "logloss");
  if (scores.empty()) throw UndefinedMetricError("logloss of an empty set");
  // Same expression and reduction order as the in-graph bce.
  double s = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p = std::clamp(scores[i], kProbEps, 1.0 - kProbEps);
    const double y = labels[i];
    s += y * std::log(p) + (1.0 - y) * std::log(-p + 1.0);
  }
  return -(s * (1.0 / static_cast<double>(scores.size())));
}

double normalized_entropy(std::span<const double> scores, std::span<const double> labels) {
  check_sizes(scores, labels, "normalized_entropy");
  if (labels.empty()) throw UndefinedMetricError("NE of an empty set");
  double pos = 0.0;
  for (double y : labels) pos += y;
  const double p = pos / static_cast<double>(labels.size());
  if (p <= 0.0 || p >= 1.0) throw UndefinedMetricError("NE needs both classes in the labels");
  const double base = -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
  return logloss(scores, labels) / base;
}

double ne_delta(double ne_a, double ne_b) { return (ne_b - ne_a) / ne_a; }

std::vector<double> singular_values(std::span<const double> values, std::size_t rows,
                                    std::size_t cols) {
  if (values.size() != rows * cols) throw ShapeError("singular_values: size mismatch");
  // One-sided (Hestenes) Jacobi: rotate column pairs until mutually orthogonal;
  // the column norms are then the singular values.
  std::vector<std::vector<double>> col(cols, std::vector<double>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) col[c][r] = values[r * cols + c];
  }
  constexpr double kTol = 1e-15;
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
          alpha += col[p][r] * col[p][r];
          beta += col[q][r] * col[q][r];
          gamma += col[p][r] * col[q][r];
        }
        if (alpha == 0.0 || beta == 0.0 || std::abs(gamma) <= kTol * std::sqrt(alpha * beta)) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < rows; ++r) {
          const double up = col[p][r], uq = col[q][r];
          col[p][r] = c * up - s * uq;
          col[q][r] = s * up + c * uq;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sv(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    double n = 0.0;
    for (double v : col[c]) n += v * v;
    sv[c] = std::sqrt(n);
  }
  std::sort(sv.rbegin(), sv.rend());
  return sv;
}

double effective_rank(const Tensor& table) {
  if (table.rank() != 2) throw ShapeError("effective_rank expects a [V x d] table");
  const auto sv = singular_values(table.data(), table.dim(0), table.dim(1));
  const double total = std::accumulate(sv.begin(), sv.end(), 0.0);
  if (total == 0.0) return 1.0;
  double h = 0.0;
  for (double s : sv) {
    const double p = s / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::exp(h);
}

MetricsReport evaluate_predictions(std::span<const double> scores, std::span<const double> labels,
                                   std::span<const std::int64_t> user_ids,
                                   GaucWeighting weighting) {
  MetricsReport r;
  r.examples = scores.size();
  r.auc = auc(scores, labels);
  const auto g = g_auc(scores, labels, user_ids, weighting);
  r.gauc = g.value;
  r.users_scored = g.users_scored;
  r.users_skipped = g.users_skipped;
  r.logloss = logloss(scores, labels);
  r.ne = normalized_entropy(scores, labels);
  return r;
}

}  // namespace cetnet
