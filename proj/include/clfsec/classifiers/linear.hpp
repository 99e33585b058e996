#pragma once

// Linear discriminants g(x) = w'x + w0: soft-margin linear SVM (dual SMO with
// a duality-gap stopping rule) and logistic regression trained by online
// gradient descent. Malicious is the positive class throughout.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "clfsec/classifiers/smo_solver.hpp"
#include "clfsec/data_model.hpp"
#include "clfsec/error.hpp"
#include "clfsec/rng.hpp"

namespace clfsec {

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;

  std::size_t dimension() const noexcept { return weights.size(); }

  double discriminant(std::span<const double> x) const {
    if (x.size() != weights.size())
      throw Error("linear model: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                  std::to_string(weights.size()) + ")");
    double g = bias;
    for (std::size_t i = 0; i < x.size(); ++i) g += weights[i] * x[i];
    return g;
  }

  /// Legitimate iff g(x) < 0.
  Label classify(std::span<const double> x) const {
    return discriminant(x) < 0.0 ? Label::Legitimate : Label::Malicious;
  }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

inline double target_sign(Label y) noexcept { return y == Label::Malicious ? 1.0 : -1.0; }

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// ---------------------------------------------------------------------------
// Linear SVM

struct LinearSvmFit {
  LinearModel model;
  std::vector<double> alpha;  // dual variables, one per training sample
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double kkt_violation = 0.0;
  std::size_t iterations = 0;
};

/// Primal soft-margin objective 0.5 |w|^2 + C sum_i max(0, 1 - y_i g(x_i)).
inline double linear_svm_primal(const LinearModel& m, const Dataset& train, double c_param) {
  double loss = 0.0;
  for (const Sample& s : train) loss += std::max(0.0, 1.0 - target_sign(s.label) * m.discriminant(s.features));
  return 0.5 * dot(m.weights, m.weights) + c_param * loss;
}

/// Solves the C-SVM dual with a linear kernel. The KKT tolerance is
/// tightened until the duality gap is at most tolerance * (1 + |primal|).
inline LinearSvmFit solve_linear_svm(const Dataset& train, double c_param, double tolerance) {
  if (!(c_param > 0.0)) throw Error("linear SVM: C must be positive");
  if (!(tolerance > 0.0)) throw Error("linear SVM: tolerance must be positive");
  if (!train.has_both_classes()) throw Error("degenerate training set: linear SVM needs both classes");

  const std::size_t n = train.size();
  const std::size_t d = train.dimension();
  std::vector<double> p(n, -1.0), upper(n, c_param), diag(n);
  std::vector<signed char> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = train[i].label == Label::Malicious ? 1 : -1;
    diag[i] = dot(train[i].features, train[i].features);
  }
  KernelRows kernel(
      n,
      [&train, n](std::size_t i, std::span<double> row) {
        const auto& xi = train[i].features;
        for (std::size_t j = 0; j < n; ++j) row[j] = dot(xi, train[j].features);
      },
      diag);
  SmoProblem problem{p, y, upper, std::vector<double>(n, 0.0)};
  SmoSolver solver(problem, kernel);

  const std::size_t max_iter = std::max<std::size_t>(100000, 200 * n);
  double eps = std::min(1e-3, tolerance);
  LinearSvmFit fit;
  for (;;) {
    SmoResult r = solver.solve(eps, max_iter);
    fit.model.weights.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (r.alpha[i] == 0.0) continue;
      const double coef = r.alpha[i] * y[i];
      for (std::size_t k = 0; k < d; ++k) fit.model.weights[k] += coef * train[i].features[k];
    }
    fit.model.bias = -r.rho;
    fit.alpha = r.alpha;
    fit.dual_objective = -r.objective;  // max form: sum a - 0.5 |w|^2
    fit.primal_objective = linear_svm_primal(fit.model, train, c_param);
    fit.kkt_violation = r.kkt_violation;
    fit.iterations = r.iterations;
    const double gap = fit.primal_objective - fit.dual_objective;
    if (gap <= tolerance * (1.0 + std::abs(fit.primal_objective)) || eps < 1e-13) break;
    eps /= 10.0;
  }
  return fit;
}

inline LinearModel train_linear_svm(const Dataset& train, double c_param, double tolerance) {
  return solve_linear_svm(train, c_param, tolerance).model;
}

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticConfig {
  double initial_rate = 0.1;  // eta_0
  double decay_steps = 0.0;   // T in eta_t = eta_0 / (1 + t/T); 0 means |train|
  std::size_t epochs = 20;
};

namespace detail {
// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}
}  // namespace detail

/// Mean logistic loss (1/n) sum_i log(1 + exp(-y_i g(x_i))).
inline double logistic_loss(const LinearModel& m, const Dataset& data) {
  double total = 0.0;
  for (const Sample& s : data) total += detail::softplus(-target_sign(s.label) * m.discriminant(s.features));
  return total / static_cast<double>(data.size());
}

/// Gradient of logistic_loss; the last component is the bias derivative.
inline std::vector<double> logistic_gradient(const LinearModel& m, const Dataset& data) {
  std::vector<double> grad(m.dimension() + 1, 0.0);
  for (const Sample& s : data) {
    const double t = s.label == Label::Malicious ? 1.0 : 0.0;
    const double r = detail::sigmoid(m.discriminant(s.features)) - t;
    for (std::size_t k = 0; k < m.dimension(); ++k) grad[k] += r * s.features[k];
    grad.back() += r;
  }
  for (double& g : grad) g /= static_cast<double>(data.size());
  return grad;
}

/// Unregularized single-sample gradient descent from zero weights. Sample
/// order is reshuffled every epoch with a stream derived from seed.
inline LinearModel train_logistic_regression(const Dataset& train, const LogisticConfig& cfg, std::uint64_t seed) {
  if (!train.has_both_classes()) throw Error("degenerate training set: logistic regression needs both classes");
  if (!(cfg.initial_rate > 0.0)) throw Error("logistic regression: learning rate must be positive");
  LinearModel m{std::vector<double>(train.dimension(), 0.0), 0.0};
  const std::size_t n = train.size();
  const double horizon = cfg.decay_steps > 0.0 ? cfg.decay_steps : static_cast<double>(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(derive_seed(seed, Stream::Training, {epoch}));
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t idx : order) {
      const Sample& s = train[idx];
      const double eta = cfg.initial_rate / (1.0 + static_cast<double>(step) / horizon);
      const double t = s.label == Label::Malicious ? 1.0 : 0.0;
      const double r = detail::sigmoid(m.discriminant(s.features)) - t;
      for (std::size_t k = 0; k < m.weights.size(); ++k) m.weights[k] -= eta * r * s.features[k];
      m.bias -= eta * r;
      ++step;
    }
    const double loss = logistic_loss(m, train);
    if (!std::isfinite(loss) || !std::isfinite(m.bias))
      throw Error("divergence: non-finite logistic loss at epoch " + std::to_string(epoch));
  }
  return m;
}

}  // namespace clfsec
