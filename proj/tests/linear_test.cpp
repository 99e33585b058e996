#include <cmath>

#include <gtest/gtest.h>

#include "clfsec/classifiers/linear.hpp"
#include "oracles.hpp"

using namespace clfsec;

TEST(LinearSvm, SymmetricTwoPointProblem) {
  Dataset d(2);
  d.add({{0.0, 0.0}, Label::Legitimate});
  d.add({{2.0, 0.0}, Label::Malicious});
  const LinearModel m = train_linear_svm(d, 1000.0, 1e-9);
  EXPECT_NEAR(m.weights[0], 1.0, 1e-6);
  EXPECT_NEAR(m.weights[1], 0.0, 1e-12);
  EXPECT_NEAR(m.bias, -1.0, 1e-6);
  EXPECT_LT(m.discriminant(d[0].features), 0.0);
  EXPECT_GT(m.discriminant(d[1].features), 0.0);
  const double boundary[2] = {1.0, 3.0};
  EXPECT_NEAR(m.discriminant(boundary), 0.0, 1e-6);
}

TEST(LinearSvm, XorIsToleratedWithTrainingError) {
  Dataset d(2);
  d.add({{0.0, 0.0}, Label::Legitimate});
  d.add({{1.0, 1.0}, Label::Legitimate});
  d.add({{1.0, 0.0}, Label::Malicious});
  d.add({{0.0, 1.0}, Label::Malicious});
  const LinearModel m = train_linear_svm(d, 1.0, 1e-6);
  std::size_t errors = 0;
  for (const auto& s : d) errors += m.classify(s.features) != s.label;
  EXPECT_GT(errors, 0u);
}

TEST(LinearSvm, MatchesQpOracleAndKkt) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset d = oracle::blobs(20, 5, 1.5, seed);
    const LinearSvmFit fit = solve_linear_svm(d, 1.0, 1e-9);
    const auto dual = oracle::linear_svm_dual(d, 1.0);
    const double ref = oracle::solve_qp(dual.q, dual.p, dual.y, dual.upper, 0.0);
    const double ours = -fit.dual_objective;
    EXPECT_LE(std::abs(ours - ref), 1e-4 * std::abs(ref)) << "seed " << seed;
    EXPECT_LE(oracle::kkt_residual(dual.q, dual.p, dual.y, dual.upper, fit.alpha), 1e-6) << "seed " << seed;
    EXPECT_LE(fit.dual_objective, fit.primal_objective + 1e-12);
    EXPECT_LE(fit.primal_objective - fit.dual_objective, 1e-9 * (1.0 + std::abs(fit.primal_objective)));
  }
}

TEST(LinearSvm, DualityGapWithinTolerance) {
  const Dataset d = oracle::blobs(200, 10, 2.0, 5);
  const LinearSvmFit fit = solve_linear_svm(d, 1.0, 1e-4);
  EXPECT_LE(fit.primal_objective - fit.dual_objective, 1e-4 * (1.0 + std::abs(fit.primal_objective)));
  EXPECT_LE(fit.dual_objective, fit.primal_objective);
}

TEST(LinearSvm, SingleClassIsDegenerate) {
  Dataset d(1);
  d.add({{1.0}, Label::Malicious});
  d.add({{2.0}, Label::Malicious});
  try {
    train_linear_svm(d, 1.0, 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate training set"), std::string::npos);
  }
}

TEST(LogisticRegression, SignFollowsData) {
  Dataset d(1);
  d.add({{-1.0}, Label::Legitimate});
  d.add({{1.0}, Label::Malicious});
  const LinearModel m = train_logistic_regression(d, {}, 1);
  EXPECT_GT(m.weights[0], 0.0);
}

TEST(LogisticRegression, ZeroEpochsGivesZeroModel) {
  const Dataset d = oracle::blobs(30, 3, 1.0, 2);
  LogisticConfig cfg;
  cfg.epochs = 0;
  const LinearModel m = train_logistic_regression(d, cfg, 1);
  for (double w : m.weights) EXPECT_EQ(w, 0.0);
  EXPECT_EQ(m.bias, 0.0);
  for (const auto& s : d) EXPECT_EQ(m.discriminant(s.features), 0.0);
}

TEST(LogisticRegression, GradientMatchesFiniteDifferences) {
  const Dataset d = oracle::blobs(40, 4, 1.2, 9);
  Rng rng(99);
  const double h = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    LinearModel m{std::vector<double>(4), rng.normal()};
    for (double& w : m.weights) w = rng.normal();
    const auto g = logistic_gradient(m, d);
    for (std::size_t k = 0; k <= 4; ++k) {
      LinearModel plus = m, minus = m;
      double& p = k < 4 ? plus.weights[k] : plus.bias;
      double& q = k < 4 ? minus.weights[k] : minus.bias;
      p += h;
      q -= h;
      const double fd = (logistic_loss(plus, d) - logistic_loss(minus, d)) / (2.0 * h);
      worst = std::max(worst, std::abs(g[k] - fd) / std::max(std::abs(fd), 1e-12));
    }
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(LogisticRegression, DeterministicGivenSeed) {
  const Dataset d = oracle::blobs(50, 3, 1.0, 4);
  EXPECT_EQ(train_logistic_regression(d, {}, 8), train_logistic_regression(d, {}, 8));
  EXPECT_NE(train_logistic_regression(d, {}, 8), train_logistic_regression(d, {}, 9));
}

TEST(LogisticRegression, DivergenceNamesEpoch) {
  Dataset d(2);
  d.add({{1e308, 1e308}, Label::Legitimate});
  d.add({{1e308, -1e308}, Label::Malicious});
  LogisticConfig cfg;
  cfg.initial_rate = 10.0;
  try {
    train_logistic_regression(d, cfg, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("divergence"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("epoch 0"), std::string::npos) << e.what();
  }
}

TEST(LinearModel, ScoreIsDotProduct) {
  const LinearModel m{{2.0, -1.0}, 0.0};
  const double x[2] = {1.0, 1.0};
  EXPECT_EQ(m.discriminant(x), 1.0);
}
