#pragma once

// One-class nu-SVM with an RBF kernel. The dual
//
//   min_a 0.5 a'Ka   s.t.  sum_i a_i = 1,  0 <= a_i <= 1/(nu n)
//
// is solved by SMO in the scaled form (a_i in [0, 1], sum = nu n) and
// rescaled, so stored coefficients sum to one.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "clfsec/classifiers/smo_solver.hpp"
#include "clfsec/data_model.hpp"
#include "clfsec/error.hpp"

namespace clfsec {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

inline double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma) {
  return std::exp(-gamma * squared_distance(u, v));
}

struct OneClassModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> dual_coefficients;  // sum to 1
  double offset = 0.0;                    // rho
  double kernel_gamma = 1.0;
  double nu = 0.5;

  std::size_t dimension() const { return support_vectors.empty() ? 0 : support_vectors.front().size(); }

  /// f(x) = sum_i a_i k(sv_i, x) - rho; inliers have f(x) >= 0.
  double decision_function(std::span<const double> x) const {
    if (x.size() != dimension())
      throw Error("one-class model: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                  std::to_string(dimension()) + ")");
    double f = 0.0;
    for (std::size_t i = 0; i < support_vectors.size(); ++i)
      f += dual_coefficients[i] * rbf_kernel(support_vectors[i], x, kernel_gamma);
    return f - offset;
  }

  Label classify(std::span<const double> x) const {
    return decision_function(x) < 0.0 ? Label::Malicious : Label::Legitimate;
  }

  friend bool operator==(const OneClassModel&, const OneClassModel&) = default;
};

struct OneClassFit {
  OneClassModel model;
  std::vector<double> alpha;  // normalized coefficients for every training sample
  double dual_objective = 0.0;  // 0.5 a'Ka in the normalized scale
  double kkt_violation = 0.0;   // in the normalized scale
  std::size_t iterations = 0;
};

/// Trains on every sample of `train`; labels are ignored.
inline OneClassFit solve_one_class_svm(const Dataset& train, double nu, double gamma, double tolerance) {
  if (!(nu > 0.0 && nu <= 1.0)) throw Error("one-class SVM: nu must lie in (0, 1]");
  if (!(gamma > 0.0)) throw Error("one-class SVM: gamma must be positive");
  if (!(tolerance > 0.0)) throw Error("one-class SVM: tolerance must be positive");
  if (train.empty()) throw Error("one-class SVM: empty training set");
  const std::size_t n = train.size();
  const double total = nu * static_cast<double>(n);
  if (total < 1.0) throw Error("nu too small for dataset: nu * n = " + std::to_string(total) + " < 1");

  KernelRows kernel(
      n,
      [&train, gamma, n](std::size_t i, std::span<double> row) {
        const auto& xi = train[i].features;
        for (std::size_t j = 0; j < n; ++j) row[j] = rbf_kernel(xi, train[j].features, gamma);
      },
      std::vector<double>(n, 1.0));

  std::vector<double> alpha0(n, 0.0);
  const std::size_t whole = static_cast<std::size_t>(std::floor(total));
  for (std::size_t i = 0; i < whole && i < n; ++i) alpha0[i] = 1.0;
  if (whole < n) alpha0[whole] = total - static_cast<double>(whole);

  std::vector<double> p(n, 0.0), upper(n, 1.0);
  std::vector<signed char> y(n, 1);
  SmoProblem problem{p, y, upper, alpha0};
  SmoSolver solver(problem, kernel);
  // Violations scale with nu n between the scaled and normalized problems.
  const SmoResult r = solver.solve(tolerance * total, std::max<std::size_t>(100000, 200 * n));

  OneClassFit fit;
  fit.model.kernel_gamma = gamma;
  fit.model.nu = nu;
  fit.model.offset = r.rho / total;
  fit.alpha.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.alpha[i] = r.alpha[i] / total;
    if (r.alpha[i] > 0.0) {
      fit.model.support_vectors.push_back(train[i].features);
      fit.model.dual_coefficients.push_back(fit.alpha[i]);
    }
  }
  // Margin support vectors lie on the boundary; pick rho as the smallest of
  // their decision values so rounding does not turn them into outliers.
  double margin_min = INFINITY;
  const double offset = fit.model.offset;
  fit.model.offset = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (r.alpha[i] > 0.0 && r.alpha[i] < 1.0)
      margin_min = std::min(margin_min, fit.model.decision_function(train[i].features));
  fit.model.offset = std::isfinite(margin_min) ? margin_min : offset;
  fit.dual_objective = r.objective / (total * total);
  fit.kkt_violation = r.kkt_violation / total;
  fit.iterations = r.iterations;
  return fit;
}

inline OneClassModel train_one_class_svm(const Dataset& train, double nu, double gamma, double tolerance) {
  return solve_one_class_svm(train, nu, gamma, tolerance).model;
}

}  // namespace clfsec
