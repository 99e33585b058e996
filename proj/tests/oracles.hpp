#pragma once

// Reference computations shared by the unit tests and the acceptance run.
// They are deliberately naive: dense matrices, brute force, many iterations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "clfsec/clfsec.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Euclidean projection onto {a : y'a = target, 0 <= a_i <= upper_i} by
/// bisection on the multiplier of the equality constraint.
inline std::vector<double> project(const std::vector<double>& v, const std::vector<double>& y,
                                   const std::vector<double>& upper, double target) {
  const std::size_t n = v.size();
  const auto at = [&](double lambda) {
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = std::clamp(v[i] - lambda * y[i], 0.0, upper[i]);
    return a;
  };
  const auto sum = [&](const std::vector<double>& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += y[i] * a[i];
    return s;
  };
  // y'a(lambda) is nonincreasing in lambda.
  double lo = -1.0, hi = 1.0;
  while (sum(at(lo)) < target) lo *= 2.0;
  while (sum(at(hi)) > target) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sum(at(mid)) > target) lo = mid;
    else hi = mid;
  }
  return at(0.5 * (lo + hi));
}

inline double quadratic(const Matrix& q, const std::vector<double>& p, const std::vector<double>& a) {
  double obj = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) row += q[i][j] * a[j];
    obj += 0.5 * a[i] * row + p[i] * a[i];
  }
  return obj;
}

/// min 0.5 a'Qa + p'a  s.t.  y'a = target, 0 <= a <= upper, by accelerated
/// projected gradient (FISTA with restarts) run far past convergence.
inline double solve_qp(const Matrix& q, const std::vector<double>& p, const std::vector<double>& y,
                       const std::vector<double>& upper, double target, std::size_t iterations = 200000) {
  const std::size_t n = p.size();
  double lipschitz = 0.0;  // row-sum bound on the largest eigenvalue
  for (const auto& row : q) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    lipschitz = std::max(lipschitz, s);
  }
  const double step = 1.0 / std::max(lipschitz, 1e-12);
  std::vector<double> a = project(std::vector<double>(n, 0.0), y, upper, target), z = a, prev = a;
  double t = 1.0, best = quadratic(q, p, a), checkpoint = best;
  for (std::size_t it = 0; it < iterations; ++it) {
    if (it % 1000 == 999) {  // stop once a thousand steps gain nothing measurable
      if (checkpoint - best <= 1e-15 * std::abs(best)) break;
      checkpoint = best;
    }
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      double g = p[i];
      for (std::size_t j = 0; j < n; ++j) g += q[i][j] * z[j];
      v[i] = z[i] - step * g;
    }
    a = project(v, y, upper, target);
    const double obj = quadratic(q, p, a);
    if (obj > best) {  // restart momentum
      t = 1.0;
      z = prev;
      a = prev;
      continue;
    }
    best = obj;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < n; ++i) z[i] = a[i] + (t - 1.0) / t_next * (a[i] - prev[i]);
    t = t_next;
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(a[i] - prev[i]));
    prev = a;
    if (change < 1e-15 && it > 1000) break;
  }
  return best;
}

/// Maximal violating-pair residual of the KKT conditions of the QP above at
/// `a`; zero at an exact solution.
inline double kkt_residual(const Matrix& q, const std::vector<double>& p, const std::vector<double>& y,
                           const std::vector<double>& upper, const std::vector<double>& a) {
  const std::size_t n = a.size();
  double up = -std::numeric_limits<double>::infinity(), low = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double g = p[i];
    for (std::size_t j = 0; j < n; ++j) g += q[i][j] * a[j];
    const double v = -y[i] * g;
    const bool below = a[i] < upper[i], above = a[i] > 0.0;
    if ((y[i] > 0 && below) || (y[i] < 0 && above)) up = std::max(up, v);
    if ((y[i] > 0 && above) || (y[i] < 0 && below)) low = std::min(low, v);
  }
  return std::max(0.0, up - low);
}

/// Dual data of the soft-margin linear SVM in minimization form.
struct SvmDual {
  Matrix q;
  std::vector<double> p, y, upper;
};

inline SvmDual linear_svm_dual(const clfsec::Dataset& data, double c) {
  const std::size_t n = data.size();
  SvmDual d;
  d.q.assign(n, std::vector<double>(n));
  d.p.assign(n, -1.0);
  d.upper.assign(n, c);
  for (const auto& s : data) d.y.push_back(s.label == clfsec::Label::Malicious ? 1.0 : -1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      d.q[i][j] = d.y[i] * d.y[j] * clfsec::dot(data[i].features, data[j].features);
  return d;
}

/// Normalized one-class dual: min 0.5 a'Ka, sum a = 1, 0 <= a <= 1/(nu n).
inline SvmDual one_class_dual(const clfsec::Dataset& data, double nu, double gamma) {
  const std::size_t n = data.size();
  SvmDual d;
  d.q.assign(n, std::vector<double>(n));
  d.p.assign(n, 0.0);
  d.y.assign(n, 1.0);
  d.upper.assign(n, 1.0 / (nu * static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d.q[i][j] = clfsec::rbf_kernel(data[i].features, data[j].features, gamma);
  return d;
}

/// Minimum of the linear discriminant over the Hamming ball of radius r
/// around binary x, by enumerating all 2^d vectors.
inline double hamming_ball_minimum(const std::vector<double>& x, const clfsec::LinearModel& m, std::size_t r) {
  const std::size_t d = x.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> v(d);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
    std::size_t dist = 0;
    for (std::size_t i = 0; i < d; ++i) {
      v[i] = (mask >> i) & 1 ? 1.0 : 0.0;
      dist += v[i] != x[i];
    }
    if (dist <= r) best = std::min(best, m.discriminant(v));
  }
  return best;
}

inline std::size_t hamming(const std::vector<double>& a, const std::vector<double>& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
  return n;
}

/// Random two-class Gaussian blobs in `dim` dimensions, means at -1 and +1.
inline clfsec::Dataset blobs(std::size_t n, std::size_t dim, double spread, std::uint64_t seed) {
  clfsec::Rng rng(seed);
  clfsec::Dataset out(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = i % 2 ? clfsec::Label::Malicious : clfsec::Label::Legitimate;
    std::vector<double> x(dim);
    for (auto& v : x) v = rng.normal(y == clfsec::Label::Malicious ? 1.0 : -1.0, spread);
    out.add({std::move(x), y});
  }
  return out;
}

/// Two-sided 4-sigma binomial check.
inline bool within_4_sigma(std::size_t count, std::size_t n, double p) {
  const double mean = static_cast<double>(n) * p;
  const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
  return std::abs(static_cast<double>(count) - mean) <= 4.0 * sd;
}

}  // namespace oracle
