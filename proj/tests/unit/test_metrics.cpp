#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <cmath>
#include <random>

#include "cetnet/metrics.hpp"
#include "test_support.hpp"

using namespace cetnet;

namespace {

double brute_auc(const std::vector<double>& s, const std::vector<double>& y) {
  double wins = 0.0, pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] == 1.0) {
      pos += 1.0;
    } else {
      neg += 1.0;
    }
    if (y[i] != 1.0) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0.0) continue;
      if (s[i] > s[j]) wins += 1.0;
      if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / (pos * neg);
}

struct Sample {
  std::vector<double> scores, labels;
};

// Random instance with both classes; `levels` > 0 quantises scores to force ties.
Sample random_sample(Rng& rng, std::size_t n, int levels) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Sample s;
  s.scores.resize(n);
  s.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.labels[i] = u(rng) < 0.3 ? 1.0 : 0.0;
    const double v = u(rng) * 0.5 + 0.5 * s.labels[i] * u(rng);
    s.scores[i] = levels > 0 ? std::floor(v * levels) / levels : v;
  }
  s.labels[0] = 1.0;
  s.labels[1] = 0.0;
  return s;
}

}  // namespace

TEST(Metrics, AucHandExamples) {
  EXPECT_EQ(auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<double>{0, 0, 1, 1}), 0.75);
  EXPECT_EQ(auc(std::vector<double>{0.5, 0.5, 0.5}, std::vector<double>{1, 0, 0}), 0.5);
  EXPECT_EQ(auc(std::vector<double>{0.9, 0.1}, std::vector<double>{1, 0}), 1.0);
  EXPECT_EQ(auc(std::vector<double>{0.9, 0.1}, std::vector<double>{0, 1}), 0.0);
  EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<double>{1, 1}), UndefinedMetricError);
  EXPECT_THROW(auc(std::vector<double>{0.1}, std::vector<double>{1, 0}), ArgumentError);
}

TEST(Metrics, AucEqualsBruteForce) {
  Rng rng(1);
  std::uniform_int_distribution<std::size_t> size(2, 1000);
  for (int trial = 0; trial < 200; ++trial) {
    const int levels = trial % 3 == 0 ? 0 : (trial % 3 == 1 ? 10 : 100);
    const Sample s = random_sample(rng, size(rng), levels);
    EXPECT_EQ(auc(s.scores, s.labels), brute_auc(s.scores, s.labels)) << "trial " << trial;
  }
}

TEST(Metrics, AucIsInvariantToMonotoneTransforms) {
  Rng rng(2);
  const Sample s = random_sample(rng, 300, 20);
  std::vector<double> t(s.scores.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::exp(3.0 * s.scores[i]) - 7.0;
  EXPECT_EQ(auc(s.scores, s.labels), auc(t, s.labels));
}

TEST(Metrics, GaucHandExample) {
  const std::vector<double> s{0.9, 0.1, 0.2, 0.8, 0.5, 0.3, 0.6};
  const std::vector<double> y{1, 0, 1, 0, 0, 1, 1};
  const std::vector<std::int64_t> u{1, 1, 2, 2, 2, 3, 3};
  const GaucResult uni = g_auc(s, y, u);
  EXPECT_EQ(uni.value, 0.5);
  EXPECT_EQ(uni.users_scored, 2u);
  EXPECT_EQ(uni.users_skipped, 1u);
  EXPECT_NEAR(g_auc(s, y, u, GaucWeighting::kImpressions).value, 0.4, 1e-15);

  const std::vector<std::int64_t> one_class_each{1, 2, 3, 4, 5, 6, 7};
  EXPECT_THROW(g_auc(s, y, one_class_each), UndefinedMetricError);
}

TEST(Metrics, GaucOfSingleUserIsAuc) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Sample s = random_sample(rng, 50 + 10 * static_cast<std::size_t>(trial), trial % 2 ? 10 : 0);
    const std::vector<std::int64_t> users(s.scores.size(), 17);
    EXPECT_EQ(g_auc(s.scores, s.labels, users).value, auc(s.scores, s.labels));
  }
}

TEST(Metrics, LoglossAndNe) {
  Rng rng(4);
  const Sample s = random_sample(rng, 1000, 0);
  EXPECT_NEAR(logloss(std::vector<double>(1000, 0.5), s.labels), std::log(2.0), 1e-12);
  double p = 0.0;
  for (double y : s.labels) p += y;
  p /= static_cast<double>(s.labels.size());
  EXPECT_NEAR(normalized_entropy(std::vector<double>(1000, p), s.labels), 1.0, 1e-9);
  EXPECT_LT(normalized_entropy(s.labels, s.labels), 1e-5);
  EXPECT_TRUE(std::isfinite(logloss(std::vector<double>{0.0, 1.0}, std::vector<double>{1, 0})));
  EXPECT_THROW(normalized_entropy(std::vector<double>{0.2, 0.3}, std::vector<double>{1, 1}),
               UndefinedMetricError);
  EXPECT_THROW(logloss(std::vector<double>{}, std::vector<double>{}), UndefinedMetricError);
  EXPECT_NEAR(ne_delta(0.8, 0.792), -0.01, 1e-15);
}

TEST(Metrics, EvaluatePredictions) {
  const std::vector<double> s{0.9, 0.1, 0.2, 0.8, 0.5, 0.3, 0.6};
  const std::vector<double> y{1, 0, 1, 0, 0, 1, 1};
  const std::vector<std::int64_t> u{1, 1, 2, 2, 2, 3, 3};
  const MetricsReport r = evaluate_predictions(s, y, u);
  EXPECT_EQ(r.auc, auc(s, y));
  EXPECT_EQ(r.gauc, 0.5);
  EXPECT_EQ(r.logloss, logloss(s, y));
  EXPECT_EQ(r.ne, normalized_entropy(s, y));
  EXPECT_EQ(r.examples, 7u);
  EXPECT_EQ(r.users_scored, 2u);
  const MetricsReport back = nlohmann::json(r).get<MetricsReport>();
  EXPECT_EQ(back.auc, r.auc);
  EXPECT_EQ(back.users_skipped, r.users_skipped);
}

TEST(Metrics, SingularValuesMatchEigen) {
  Rng rng(5);
  std::uniform_int_distribution<std::size_t> dim(1, 40);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t rows = dim(rng) + 5, cols = std::min<std::size_t>(dim(rng), rows);
    auto v = cetnet::testing::uniform_values(rng, rows * cols, -1.0, 1.0);
    if (trial % 4 == 0) {
      // Rank-deficient: duplicate the first column.
      for (std::size_t r = 0; r < rows && cols > 1; ++r) v[r * cols + cols - 1] = v[r * cols];
    }
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) m(r, c) = v[r * cols + c];
    }
    const Eigen::VectorXd want = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
    const auto got = singular_values(v, rows, cols);
    ASSERT_EQ(got.size(), cols);
    for (std::size_t i = 0; i < cols; ++i) {
      EXPECT_NEAR(got[i], want(static_cast<Eigen::Index>(i)), 1e-10 * (1.0 + want(0))) << trial;
    }
  }
}

TEST(Metrics, EffectiveRankExamples) {
  std::vector<double> eye(16 * 6, 0.0);
  for (std::size_t i = 0; i < 6; ++i) eye[i * 6 + i] = 2.5;
  EXPECT_NEAR(effective_rank(Tensor::from({16, 6}, eye)), 6.0, 1e-12);

  std::vector<double> rank1(10 * 4);
  for (std::size_t r = 0; r < 10; ++r) {
    for (std::size_t c = 0; c < 4; ++c) rank1[r * 4 + c] = (r + 1.0) * (c - 1.5);
  }
  EXPECT_NEAR(effective_rank(Tensor::from({10, 4}, rank1)), 1.0, 1e-9);

  EXPECT_EQ(effective_rank(Tensor::zeros({5, 3})), 1.0);

  // diag(3, 4): p = (4/7, 3/7).
  const double p = 4.0 / 7.0, q = 3.0 / 7.0;
  EXPECT_NEAR(effective_rank(Tensor::from({2, 2}, {3, 0, 0, 4})),
              std::exp(-(p * std::log(p) + q * std::log(q))), 1e-12);
  EXPECT_THROW(effective_rank(Tensor::zeros({4})), ShapeError);
}

TEST(Metrics, EffectiveRankBounds) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t rows = 30, cols = 8;
    const double er = effective_rank(Tensor::from({rows, cols}, cetnet::testing::uniform_values(rng, rows * cols, -1, 1)));
    EXPECT_GE(er, 1.0);
    EXPECT_LE(er, 8.0 + 1e-12);
  }
}
