#pragma once

// Sequential minimal optimization for the box- and equality-constrained
// quadratic programs behind the C-SVM and one-class nu-SVM duals:
//
//   min_a  0.5 a'Qa + p'a   s.t.  y'a = const,  0 <= a_i <= C_i,
//
// with y_i in {+1, -1} and Q_ij = y_i y_j K(x_i, x_j). Working pairs are
// chosen with second-order information (Fan, Chen and Lin, 2005).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <list>
#include <span>
#include <unordered_map>
#include <vector>

#include "clfsec/error.hpp"

namespace clfsec {

/// Symmetric kernel matrix accessed by rows, with a bounded LRU row cache.
class KernelRows {
 public:
  using RowFunction = std::function<void(std::size_t i, std::span<double> row)>;

  KernelRows(std::size_t n, RowFunction compute, std::vector<double> diagonal,
             std::size_t cache_bytes = std::size_t{256} << 20)
      : n_(n), compute_(std::move(compute)), diag_(std::move(diagonal)) {
    if (diag_.size() != n) throw Error("KernelRows: diagonal size mismatch");
    capacity_ = std::max<std::size_t>(2, cache_bytes / (sizeof(double) * std::max<std::size_t>(n, 1)));
  }

  std::size_t size() const noexcept { return n_; }
  double diagonal(std::size_t i) const { return diag_[i]; }

  /// Row i; valid until the next call that may evict it.
  std::span<const double> row_ref(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->values;
    }
    if (index_.size() >= capacity_) {
      index_.erase(lru_.back().row);
      lru_.pop_back();
    }
    lru_.push_front(Entry{i, std::vector<double>(n_)});
    compute_(i, lru_.front().values);
    index_[i] = lru_.begin();
    return lru_.front().values;
  }

 private:
  struct Entry {
    std::size_t row;
    std::vector<double> values;
  };

  std::size_t n_;
  RowFunction compute_;
  std::size_t capacity_;
  std::vector<double> diag_;
  std::list<Entry> lru_;
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

struct SmoResult {
  std::vector<double> alpha;
  std::vector<double> gradient;  // Q a + p at the solution
  double rho = 0.0;              // offset of the decision function sum_i a_i y_i K(x_i, .) - rho
  double objective = 0.0;        // 0.5 a'Qa + p'a
  double kkt_violation = 0.0;    // max over violating pairs, m(a) - M(a)
  std::size_t iterations = 0;
  bool converged = false;
};

/// Problem data. `kernel` returns raw kernel rows K(x_i, .); signs from y
/// are applied by the solver.
struct SmoProblem {
  std::span<const double> p;
  std::span<const signed char> y;
  std::span<const double> upper;  // C_i
  std::vector<double> initial_alpha;
};

class SmoSolver {
 public:
  SmoSolver(const SmoProblem& problem, KernelRows& kernel) : prob_(problem), kernel_(kernel), n_(problem.p.size()) {
    if (kernel.size() != n_ || problem.y.size() != n_ || problem.upper.size() != n_ ||
        problem.initial_alpha.size() != n_)
      throw Error("SMO: inconsistent problem sizes");
    alpha_ = problem.initial_alpha;
    gradient_.assign(prob_.p.begin(), prob_.p.end());
    for (std::size_t i = 0; i < n_; ++i) {
      if (alpha_[i] == 0.0) continue;
      auto row = kernel_.row_ref(i);
      for (std::size_t j = 0; j < n_; ++j) gradient_[j] += alpha_[i] * q(i, j, row[j]);
    }
  }

  /// Runs until the maximal KKT violation drops below eps. May be called
  /// again with a smaller eps to continue from the current point.
  SmoResult solve(double eps, std::size_t max_iterations) {
    SmoResult res;
    std::size_t it = 0;
    for (; it < max_iterations; ++it) {
      std::size_t i = 0, j = 0;
      if (!select_pair(eps, i, j)) {
        res.converged = true;
        break;
      }
      update_pair(i, j);
    }
    iterations_ += it;
    res.iterations = iterations_;
    res.kkt_violation = violation();
    if (!res.converged && res.kkt_violation < eps) res.converged = true;
    res.alpha = alpha_;
    res.gradient = gradient_;
    res.rho = compute_rho();
    double obj = 0.0;
    for (std::size_t t = 0; t < n_; ++t) obj += alpha_[t] * (gradient_[t] + prob_.p[t]);
    res.objective = 0.5 * obj;
    return res;
  }

 private:
  static constexpr double kTau = 1e-12;

  double q(std::size_t i, std::size_t j, double k) const { return prob_.y[i] * prob_.y[j] * k; }
  bool at_upper(std::size_t t) const { return alpha_[t] >= prob_.upper[t]; }
  bool at_lower(std::size_t t) const { return alpha_[t] <= 0.0; }
  bool in_up_set(std::size_t t) const { return prob_.y[t] > 0 ? !at_upper(t) : !at_lower(t); }
  bool in_low_set(std::size_t t) const { return prob_.y[t] > 0 ? !at_lower(t) : !at_upper(t); }

  double violation() const {
    double gmax = -INFINITY, gmin = INFINITY;
    for (std::size_t t = 0; t < n_; ++t) {
      const double v = -prob_.y[t] * gradient_[t];
      if (in_up_set(t)) gmax = std::max(gmax, v);
      if (in_low_set(t)) gmin = std::min(gmin, v);
    }
    if (gmax == -INFINITY || gmin == INFINITY) return 0.0;
    return std::max(0.0, gmax - gmin);
  }

  bool select_pair(double eps, std::size_t& out_i, std::size_t& out_j) {
    double gmax = -INFINITY;
    std::ptrdiff_t gmax_idx = -1;
    for (std::size_t t = 0; t < n_; ++t) {
      if (!in_up_set(t)) continue;
      const double v = -prob_.y[t] * gradient_[t];
      if (v >= gmax) {
        gmax = v;
        gmax_idx = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (gmax_idx < 0) return false;
    const std::size_t i = static_cast<std::size_t>(gmax_idx);
    auto row_i = kernel_.row_ref(i);
    const double qd_i = kernel_.diagonal(i);

    double gmax2 = -INFINITY;
    double best = INFINITY;
    std::ptrdiff_t gmin_idx = -1;
    for (std::size_t t = 0; t < n_; ++t) {
      if (!in_low_set(t)) continue;
      const double v = prob_.y[t] * gradient_[t];
      gmax2 = std::max(gmax2, v);
      const double grad_diff = gmax + v;
      if (grad_diff > 0.0) {
        double quad = qd_i + kernel_.diagonal(t) - 2.0 * row_i[t];
        if (quad <= 0.0) quad = kTau;
        const double obj = -(grad_diff * grad_diff) / quad;
        if (obj <= best) {
          best = obj;
          gmin_idx = static_cast<std::ptrdiff_t>(t);
        }
      }
    }
    if (gmax + gmax2 < eps || gmin_idx < 0) return false;
    out_i = i;
    out_j = static_cast<std::size_t>(gmin_idx);
    return true;
  }

  void update_pair(std::size_t i, std::size_t j) {
    // Copy row i: fetching row j may evict it.
    std::vector<double> row_i(kernel_.row_ref(i).begin(), kernel_.row_ref(i).end());
    const double ci = prob_.upper[i], cj = prob_.upper[j];
    const double old_i = alpha_[i], old_j = alpha_[j];
    const double qij = q(i, j, row_i[j]);
    double& ai = alpha_[i];
    double& aj = alpha_[j];

    if (prob_.y[i] != prob_.y[j]) {
      double quad = kernel_.diagonal(i) + kernel_.diagonal(j) + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-gradient_[i] - gradient_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) {
          aj = 0.0;
          ai = diff;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = -diff;
      }
      if (diff > ci - cj) {
        if (ai > ci) {
          ai = ci;
          aj = ci - diff;
        }
      } else if (aj > cj) {
        aj = cj;
        ai = cj + diff;
      }
    } else {
      double quad = kernel_.diagonal(i) + kernel_.diagonal(j) - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (gradient_[i] - gradient_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > ci) {
        if (ai > ci) {
          ai = ci;
          aj = sum - ci;
        }
      } else if (aj < 0.0) {
        aj = 0.0;
        ai = sum;
      }
      if (sum > cj) {
        if (aj > cj) {
          aj = cj;
          ai = sum - cj;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = sum;
      }
    }

    const double di = ai - old_i, dj = aj - old_j;
    auto row_j = kernel_.row_ref(j);
    for (std::size_t t = 0; t < n_; ++t)
      gradient_[t] += q(i, t, row_i[t]) * di + q(j, t, row_j[t]) * dj;
  }

  double compute_rho() const {
    double ub = INFINITY, lb = -INFINITY, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n_; ++t) {
      const double yg = prob_.y[t] * gradient_[t];
      if (at_upper(t)) {
        if (prob_.y[t] < 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else if (at_lower(t)) {
        if (prob_.y[t] > 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    if (n_free > 0) return sum_free / static_cast<double>(n_free);
    if (!std::isfinite(ub)) return lb;
    if (!std::isfinite(lb)) return ub;
    return (ub + lb) / 2.0;
  }

  const SmoProblem& prob_;
  KernelRows& kernel_;
  std::size_t n_;
  std::vector<double> alpha_;
  std::vector<double> gradient_;
  std::size_t iterations_ = 0;
};

}  // namespace clfsec
