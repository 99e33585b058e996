#pragma once

// Likelihood-ratio score fusion for a two-matcher biometric system. Each
// class-conditional density is a product of two independent Gamma marginals
// fitted by maximum likelihood.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "clfsec/classifiers/special_functions.hpp"
#include "clfsec/data_model.hpp"
#include "clfsec/error.hpp"

namespace clfsec {

/// Scores at or below zero are moved here before fitting or evaluation;
/// Gamma support is strictly positive and min-max normalization yields zeros.
inline constexpr double kScoreFloor = 1e-9;

inline double floor_score(double x) noexcept { return x > 0.0 ? x : kScoreFloor; }

struct GammaParams {
  double shape = 1.0;
  double scale = 1.0;

  double mean() const noexcept { return shape * scale; }

  double log_pdf(double x) const {
    if (!(x > 0.0)) return -INFINITY;
    return (shape - 1.0) * std::log(x) - x / scale - std::lgamma(shape) - shape * std::log(scale);
  }

  friend bool operator==(const GammaParams&, const GammaParams&) = default;
};

/// Gradient of the summed log-likelihood with respect to (shape, scale).
inline std::array<double, 2> gamma_log_likelihood_gradient(const GammaParams& g, std::span<const double> xs) {
  double sum_log = 0.0, sum_x = 0.0;
  for (double x : xs) {
    sum_log += std::log(x);
    sum_x += x;
  }
  const double n = static_cast<double>(xs.size());
  return {sum_log - n * std::log(g.scale) - n * digamma(g.shape),
          sum_x / (g.scale * g.scale) - n * g.shape / g.scale};
}

/// Maximum-likelihood Gamma fit. Newton iterations on log(k) - psi(k) = s,
/// with s = log(mean) - mean(log x), started from Minka's approximation; the
/// scale is then mean / shape.
inline GammaParams fit_gamma_mle(std::span<const double> raw) {
  std::vector<double> xs;
  xs.reserve(raw.size());
  for (double x : raw) {
    if (!std::isfinite(x) || x < 0.0) throw Error("gamma fit: scores must be finite and nonnegative");
    xs.push_back(floor_score(x));
  }
  if (std::set<double>(xs.begin(), xs.end()).size() < 2)
    throw Error("degenerate score distribution: fewer than two distinct values");

  double mean = 0.0, mean_log = 0.0;
  for (double x : xs) {
    mean += x;
    mean_log += std::log(x);
  }
  mean /= static_cast<double>(xs.size());
  mean_log /= static_cast<double>(xs.size());
  const double s = std::log(mean) - mean_log;
  if (!(s > 0.0)) throw Error("degenerate score distribution: zero log-dispersion");

  double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  for (int it = 0; it < 100; ++it) {
    const double f = std::log(k) - digamma(k) - s;
    const double df = 1.0 / k - trigamma(k);
    double next = k - f / df;
    if (!(next > 0.0)) next = k / 2.0;
    const bool done = std::abs(next - k) <= 1e-15 * k;
    k = next;
    if (done) break;
  }
  return {k, mean / k};
}

inline constexpr std::size_t kFingerprint = 0;
inline constexpr std::size_t kFace = 1;

struct FusionModel {
  std::array<std::array<GammaParams, 2>, 2> params;  // [index_of(label)][score feature]
  double threshold = 1.0;                            // t on the likelihood ratio p(x|L)/p(x|M)

  double log_density(Label y, std::span<const double> x) const {
    const auto& p = params[index_of(y)];
    return p[0].log_pdf(floor_score(x[0])) + p[1].log_pdf(floor_score(x[1]));
  }

  friend bool operator==(const FusionModel&, const FusionModel&) = default;
};

/// Fits the four Gamma marginals (two features per class) from a 2-D score
/// dataset; the threshold is left at 1.
inline FusionModel fit_gamma_product(const Dataset& scores) {
  if (scores.dimension() != 2) throw Error("gamma fusion: score dataset must be 2-dimensional");
  FusionModel m;
  for (Label y : kLabels) {
    for (std::size_t f = 0; f < 2; ++f) {
      std::vector<double> xs;
      for (const Sample& s : scores)
        if (s.label == y) xs.push_back(s.features[f]);
      if (xs.size() < 2)
        throw Error(std::string("degenerate score distribution: class ") + to_string(y) + " has fewer than two samples");
      try {
        m.params[index_of(y)][f] = fit_gamma_mle(xs);
      } catch (const Error& e) {
        throw Error(std::string(e.what()) + " (class " + to_string(y) + ", feature " + std::to_string(f) + ")");
      }
    }
  }
  return m;
}

struct LlrOutcome {
  Label label = Label::Malicious;
  double log_ratio = 0.0;  // log p(x|L) - log p(x|M)
  bool underflow = false;  // both densities zero: decided M by convention
};

inline LlrOutcome llr_evaluate(const FusionModel& m, std::span<const double> x) {
  if (x.size() != 2) throw Error("gamma fusion: expected a 2-D score pair");
  if (!std::isfinite(x[0]) || !std::isfinite(x[1])) throw Error("gamma fusion: non-finite score");
  const double lp_l = m.log_density(Label::Legitimate, x);
  const double lp_m = m.log_density(Label::Malicious, x);
  LlrOutcome out;
  if (lp_l == -INFINITY && lp_m == -INFINITY) {
    out.underflow = true;
    out.log_ratio = -std::numeric_limits<double>::max();
    out.label = Label::Malicious;
    return out;
  }
  out.log_ratio = lp_l - lp_m;
  out.label = out.log_ratio >= std::log(m.threshold) ? Label::Legitimate : Label::Malicious;
  return out;
}

/// Legitimate iff p(x|L) / p(x|M) >= t.
inline Label llr_decide(const FusionModel& m, std::span<const double> x) { return llr_evaluate(m, x).label; }

/// -log of the likelihood ratio, so larger means more malicious.
inline double llr_score(const FusionModel& m, std::span<const double> x) {
  constexpr double kMax = std::numeric_limits<double>::max();
  return std::clamp(-llr_evaluate(m, x).log_ratio, -kMax, kMax);
}

}  // namespace clfsec
