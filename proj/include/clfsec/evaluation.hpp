#pragma once

// ROC analysis and security evaluation: performance of a classifier trained
// on TR^i and tested on TS^i, averaged over folds, as a function of the
// attack strength.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "clfsec/attacks.hpp"
#include "clfsec/classifiers/model.hpp"
#include "clfsec/data_model.hpp"
#include "clfsec/error.hpp"
#include "clfsec/parallel.hpp"
#include "clfsec/rng.hpp"

namespace clfsec {

// ---------------------------------------------------------------------------
// ROC

struct ScoredSample {
  double score = 0.0;  // larger = more malicious
  Label label = Label::Legitimate;
};

/// Detection: positives are malicious samples flagged when score >= t,
/// points are (FP rate, TP rate). Verification: positives are genuine
/// (legitimate) users accepted when score <= t, points are (FAR, GAR).
enum class RocMode { Detection, Verification };

struct RocPoint {
  double fpr = 0.0;  // FP rate, or FAR in verification mode
  double tpr = 0.0;  // TP rate, or GAR in verification mode
  double threshold = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
  RocMode mode = RocMode::Detection;
  std::vector<RocPoint> points;  // starts at (0, 0), ends at (1, 1)
  friend bool operator==(const RocCurve&, const RocCurve&) = default;
};

/// Exact step ROC over all thresholds; samples with equal scores move
/// together, producing a diagonal segment.
inline RocCurve roc(std::span<const ScoredSample> scores, RocMode mode = RocMode::Detection) {
  const Label positive = mode == RocMode::Detection ? Label::Malicious : Label::Legitimate;
  std::size_t n_pos = 0, n_neg = 0;
  for (const auto& s : scores) {
    if (!std::isfinite(s.score)) throw Error("roc: non-finite score");
    (s.label == positive ? n_pos : n_neg)++;
  }
  if (n_pos == 0 || n_neg == 0) throw Error("roc: both classes are required");

  std::vector<ScoredSample> sorted(scores.begin(), scores.end());
  if (mode == RocMode::Detection)
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  else
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score < b.score; });

  RocCurve curve;
  curve.mode = mode;
  const double start = mode == RocMode::Detection ? INFINITY : -INFINITY;
  curve.points.push_back({0.0, 0.0, start});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double t = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == t; ++i) (sorted[i].label == positive ? tp : fp)++;
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                            static_cast<double>(tp) / static_cast<double>(n_pos), t});
  }
  return curve;
}

/// Unnormalized area under the ROC curve for FP rate in [0, 0.1], by the
/// trapezoidal rule; the segment crossing 0.1 is interpolated linearly.
inline double auc10(const RocCurve& curve) {
  constexpr double kLimit = 0.1;
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    if (a.fpr >= kLimit) break;
    if (b.fpr <= a.fpr) continue;
    double x1 = b.fpr, y1 = b.tpr;
    if (x1 > kLimit) {
      y1 = a.tpr + (b.tpr - a.tpr) * (kLimit - a.fpr) / (b.fpr - a.fpr);
      x1 = kLimit;
    }
    area += 0.5 * (a.tpr + y1) * (x1 - a.fpr);
  }
  return std::clamp(area, 0.0, kLimit);
}

/// Highest TP rate among operating points with FP rate <= fpr.
inline double tpr_at(const RocCurve& curve, double fpr) {
  double best = 0.0;
  for (const auto& p : curve.points)
    if (p.fpr <= fpr) best = std::max(best, p.tpr);
  return best;
}

struct FarAtGar {
  double far = 1.0;
  bool reached = false;
};

/// Smallest FAR among operating points whose GAR is at least `gar`.
inline FarAtGar far_at_gar(const RocCurve& curve, double gar) {
  if (!(gar > 0.0 && gar <= 1.0)) throw Error("far_at_gar: GAR must lie in (0, 1]");
  FarAtGar out;
  for (const auto& p : curve.points) {
    if (p.tpr >= gar && (!out.reached || p.fpr < out.far)) {
      out.far = p.fpr;
      out.reached = true;
    }
  }
  if (!out.reached) out.far = 1.0;
  return out;
}

enum class MetricKind { Auc10, FarAtGar };

struct Metric {
  MetricKind kind = MetricKind::Auc10;
  double gar = 0.9;

  std::string name() const {
    if (kind == MetricKind::Auc10) return "auc10";
    std::ostringstream os;
    os << "far_at_gar(" << gar << ")";
    return os.str();
  }
  RocMode roc_mode() const { return kind == MetricKind::Auc10 ? RocMode::Detection : RocMode::Verification; }
  double evaluate(const RocCurve& c) const { return kind == MetricKind::Auc10 ? auc10(c) : far_at_gar(c, gar).far; }
};

// ---------------------------------------------------------------------------
// Classifier configuration and training

enum class Family { LinearSvm, LogisticRegression, OneClassSvm, LlrFusion };

struct ClassifierConfig {
  std::string label;
  Family family = Family::LinearSvm;
  double c = 1.0;
  std::vector<double> c_grid;  // nonempty: choose C by cross-validated AUC10 on TR
  std::size_t cv_folds = 5;
  double tolerance = 1e-3;
  LogisticConfig logistic;
  double nu = 0.01;
  double gamma = 0.5;
  double fusion_threshold = 1.0;
};

inline std::vector<ScoredSample> score_dataset(const Model& model, const Dataset& data) {
  std::vector<ScoredSample> out;
  out.reserve(data.size());
  for (const Sample& s : data) out.push_back({decision_score(model, s.features), s.label});
  return out;
}

/// C maximizing the mean AUC10 of a k-fold cross-validation on `train`
/// (first grid value on ties).
inline double select_svm_c(const Dataset& train, std::span<const double> grid, std::size_t folds, double tolerance,
                           std::uint64_t seed) {
  if (grid.empty()) throw Error("select_svm_c: empty C grid");
  const FoldSet cv = resample(train, CrossValidation{folds}, derive_seed(seed, Stream::ModelSelection));
  double best_c = grid.front(), best = -1.0;
  for (double c : grid) {
    double total = 0.0;
    for (const auto& pair : cv.pairs) {
      const Model m = train_linear_svm(pair.train, c, tolerance);
      const auto scores = score_dataset(m, pair.test);
      total += auc10(roc(scores));
    }
    const double mean = total / static_cast<double>(cv.k());
    if (mean > best) {
      best = mean;
      best_c = c;
    }
  }
  return best_c;
}

inline Model train_classifier(const ClassifierConfig& cfg, const Dataset& train, std::uint64_t seed) {
  switch (cfg.family) {
    case Family::LinearSvm: {
      const double c = cfg.c_grid.empty() ? cfg.c : select_svm_c(train, cfg.c_grid, cfg.cv_folds, cfg.tolerance, seed);
      return train_linear_svm(train, c, cfg.tolerance);
    }
    case Family::LogisticRegression:
      return train_logistic_regression(train, cfg.logistic, seed);
    case Family::OneClassSvm:
      return train_one_class_svm(train, cfg.nu, cfg.gamma, cfg.tolerance);
    case Family::LlrFusion: {
      FusionModel m = fit_gamma_product(train);
      m.threshold = cfg.fusion_threshold;
      return m;
    }
  }
  throw Error("unknown classifier family");
}

// ---------------------------------------------------------------------------
// TR / TS construction

/// Sample: run the sampling procedure on the phase spec. Transform: keep
/// every sample of D in order and replace each sample of an attacked class
/// by its own attack sample; only valid when p(A|Y) is 0 or 1 and the
/// priors are unchanged.
enum class SetConstruction { Sample, Transform };

struct SetSize {
  enum class Kind { Source, KeepLegitimate, Fixed };
  Kind kind = Kind::Source;
  std::size_t value = 0;
};

inline Dataset construct_phase_set(const Dataset& source, const DistributionSpec& spec, const ScenarioPools& pools,
                                   Phase phase, SetConstruction how, SetSize size, std::uint64_t seed) {
  if (how == SetConstruction::Transform) {
    if (spec.prior_malicious != source.malicious_fraction())
      throw Error("transform construction cannot change class priors; use sampling");
    std::array<std::size_t, 2> next{0, 0};
    Dataset out(source.dimension());
    out.reserve(source.size());
    for (const Sample& s : source) {
      const double pa = spec.attack_probability(s.label);
      if (pa == 0.0) {
        out.add(s);
      } else if (pa == 1.0) {
        const auto& pool = *pools.at({phase, s.label, AttackFlag::Attacked});
        const std::size_t expected = source.count(s.label);
        if (pool.size() != expected)
          throw Error("transform construction needs one attack sample per source sample");
        out.add(pool[next[index_of(s.label)]++]);
      } else {
        throw Error("transform construction requires attack probabilities of 0 or 1");
      }
    }
    return out;
  }
  std::size_t n = source.size();
  if (size.kind == SetSize::Kind::Fixed) {
    n = size.value;
  } else if (size.kind == SetSize::Kind::KeepLegitimate) {
    if (spec.prior_malicious >= 1.0) throw Error("keep_legitimate size undefined for a malicious prior of 1");
    n = static_cast<std::size_t>(
        std::llround(static_cast<double>(source.count(Label::Legitimate)) / (1.0 - spec.prior_malicious)));
  }
  return sample_dataset(spec, n, seed);
}

// ---------------------------------------------------------------------------
// Security sweep

struct SweepOptions {
  Metric metric;
  SetConstruction train_construction = SetConstruction::Sample;
  SetConstruction test_construction = SetConstruction::Transform;
  SetSize train_size;
  SetSize test_size;
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool keep_roc = false;  // keep the ROC of repetition 0, fold 0 at every strength
};

struct CurvePoint {
  double strength = 0.0;
  double mean = 0.0;
  double std = 0.0;
  std::size_t k = 0;
  std::vector<double> values;  // one per (repetition, fold)
};

struct SecurityCurve {
  std::string series;
  std::string strength_name;
  std::string metric;
  std::vector<CurvePoint> points;
  std::vector<std::pair<double, RocCurve>> rocs;
};

/// Mean and sample standard deviation (n - 1 denominator, 0 when n = 1),
/// summed in index order.
inline std::pair<double, double> mean_std(std::span<const double> v) {
  if (v.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

namespace detail {
inline std::string format_strength(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", s);
  return buf;
}
}  // namespace detail

/// For every strength value and every (repetition, fold): build TR and TS
/// from the scenario's data model, train, score TS and compute the metric.
/// A model trained on unaffected training data is shared across strengths.
inline SecurityCurve security_sweep(const FoldSet& folds, const AttackScenario& scenario,
                                    const ClassifierConfig& classifier, std::span<const double> strengths,
                                    const SweepOptions& opt) {
  if (folds.k() == 0) throw Error("security_sweep: no folds");
  if (strengths.empty()) throw Error("security_sweep: no strength values");
  if (std::find(strengths.begin(), strengths.end(), 0.0) == strengths.end())
    throw Error("security_sweep: strength values must include 0");
  if (opt.repetitions == 0) throw Error("security_sweep: repetitions must be positive");

  const std::size_t reps = opt.repetitions, k = folds.k(), n_str = strengths.size();
  const std::size_t n_runs = reps * k;
  const auto run_seed = [&](Stream st, std::size_t run) {
    return derive_seed(opt.seed, st, {run / k, run % k});
  };

  // Models trained on D_TR, shared by every strength that leaves training untouched.
  const bool need_clean = std::any_of(strengths.begin(), strengths.end(),
                                      [&](double s) { return !scenario.affects(Phase::Training, s); });
  std::vector<std::optional<Model>> clean_models(n_runs);
  if (need_clean) {
    parallel_for(n_runs, opt.jobs, [&](std::size_t run) {
      const auto& pair = folds.pairs[run % k];
      try {
        clean_models[run] = train_classifier(classifier, pair.train, run_seed(Stream::Training, run));
      } catch (const Error& e) {
        throw Error("fold " + std::to_string(run % k) + ", strength 0: " + e.what());
      }
    });
  }

  std::vector<double> values(n_runs * n_str);
  std::vector<std::optional<RocCurve>> rocs(n_str);
  parallel_for(n_runs * n_str, opt.jobs, [&](std::size_t item) {
    const std::size_t run = item / n_str, si = item % n_str;
    const double s = strengths[si];
    const auto& pair = folds.pairs[run % k];
    try {
      const AttackContext base{nullptr, s, run_seed(Stream::Attack, run)};
      std::optional<Model> model;
      if (scenario.affects(Phase::Training, s)) {
        const ScenarioPools pools = build_scenario_pools(pair.train, pair.test, scenario, base);
        const DistributionSpec spec = phase_spec(scenario, Phase::Training, pools, s, pair.train.malicious_fraction());
        const Dataset tr = construct_phase_set(pair.train, spec, pools, Phase::Training, opt.train_construction,
                                               opt.train_size, run_seed(Stream::TrainSet, run));
        model = train_classifier(classifier, tr, run_seed(Stream::Training, run));
      } else {
        model = *clean_models[run];
      }

      std::vector<ScoredSample> scores;
      if (scenario.affects(Phase::Testing, s)) {
        AttackContext ctx = base;
        ctx.model = &*model;
        const ScenarioPools pools = build_scenario_pools(pair.train, pair.test, scenario, ctx);
        const DistributionSpec spec = phase_spec(scenario, Phase::Testing, pools, s, pair.test.malicious_fraction());
        const Dataset ts = construct_phase_set(pair.test, spec, pools, Phase::Testing, opt.test_construction,
                                               opt.test_size, run_seed(Stream::TestSet, run));
        scores = score_dataset(*model, ts);
      } else {
        scores = score_dataset(*model, pair.test);
      }
      const RocCurve curve = roc(scores, opt.metric.roc_mode());
      values[item] = opt.metric.evaluate(curve);
      if (opt.keep_roc && run == 0) rocs[si] = curve;
    } catch (const Error& e) {
      throw Error("fold " + std::to_string(run % k) + ", strength " + detail::format_strength(s) + ": " + e.what());
    }
  });

  SecurityCurve out;
  out.series = classifier.label;
  out.strength_name = scenario.strength.name;
  out.metric = opt.metric.name();
  for (std::size_t si = 0; si < n_str; ++si) {
    CurvePoint p;
    p.strength = strengths[si];
    p.k = n_runs;
    for (std::size_t run = 0; run < n_runs; ++run) p.values.push_back(values[run * n_str + si]);
    std::tie(p.mean, p.std) = mean_std(p.values);
    out.points.push_back(std::move(p));
    if (rocs[si]) out.rocs.emplace_back(strengths[si], std::move(*rocs[si]));
  }
  return out;
}

/// CSV with header `strength,mean,std,k`; reals printed with 17 significant digits.
inline std::string curve_csv(const SecurityCurve& curve) {
  std::string out = "strength,mean,std,k\n";
  char buf[128];
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%zu\n", p.strength, p.mean, p.std, p.k);
    out += buf;
  }
  return out;
}

}  // namespace clfsec
