#pragma once

// Adversary model (goal, knowledge, capability, strategy) and the attack
// sample generators: greedy good-word-insertion / bad-word-obfuscation
// against linear classifiers, biometric spoofing by score substitution, and
// training-set poisoning of one-class detectors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clfsec/classifiers/linear.hpp"
#include "clfsec/classifiers/model.hpp"
#include "clfsec/data_model.hpp"
#include "clfsec/error.hpp"
#include "clfsec/rng.hpp"

namespace clfsec {

enum class Influence { Causative, Exploratory };
enum class Violation { Integrity, Availability, Privacy };
enum class Specificity { Targeted, Indiscriminate };
enum class Phase : std::uint8_t { Training = 0, Testing = 1 };
enum class BiometricTrait { Fingerprint, Face };

enum class GeneratorKind {
  None,
  GwiBwo,                 // testing malicious samples, greedy word flips against a linear model
  Spoof,                  // testing impostor samples, one score replaced by a genuine one
  PoisonWithTestMalicious // training attack samples copied from the malicious testing samples
};

inline const char* to_string(Phase p) noexcept { return p == Phase::Training ? "training" : "testing"; }
constexpr std::size_t index_of(Phase p) noexcept { return static_cast<std::size_t>(p); }

/// Knowledge of (k.i) training data, (k.ii) feature set, (k.iii) learning
/// algorithm, (k.iv) trained parameters, (k.v) classifier feedback.
struct Knowledge {
  bool training_data = false;
  bool feature_set = false;
  bool algorithm = false;
  bool parameters = false;
  bool feedback = false;
};

struct Capability {
  bool affects_training = false;
  bool affects_testing = false;
  bool prior_change_allowed = false;
  std::array<double, 2> controllable_fraction{0.0, 0.0};  // by index_of(Label)
  std::optional<std::size_t> max_modified_features;
};

struct Strategy {
  std::optional<double> prior_override;
  std::array<std::array<double, 2>, 2> attacked_fraction{};  // [index_of(Phase)][index_of(Label)]
  GeneratorKind generator = GeneratorKind::None;
  BiometricTrait trait = BiometricTrait::Fingerprint;

  double attacked(Phase p, Label y) const { return attacked_fraction[index_of(p)][index_of(y)]; }
};

struct StrengthParameter {
  std::string name = "strength";
  std::vector<double> values{0.0};
};

struct AttackScenario {
  std::string name;
  Influence influence = Influence::Exploratory;
  Violation violation = Violation::Integrity;
  Specificity specificity = Specificity::Indiscriminate;
  Knowledge knowledge;
  Capability capability;
  Strategy strategy;
  StrengthParameter strength;

  /// Phase that the configured generator manipulates.
  std::optional<Phase> attacked_phase() const {
    switch (strategy.generator) {
      case GeneratorKind::GwiBwo:
      case GeneratorKind::Spoof:
        return Phase::Testing;
      case GeneratorKind::PoisonWithTestMalicious:
        return Phase::Training;
      case GeneratorKind::None:
        break;
    }
    return std::nullopt;
  }

  /// Whether the phase's data differ from D at the given strength.
  bool affects(Phase p, double strength_value) const {
    if (strength_value == 0.0) return false;
    const auto ap = attacked_phase();
    if (!ap || *ap != p) return false;
    return strategy.attacked(p, Label::Malicious) > 0.0 || strategy.attacked(p, Label::Legitimate) > 0.0;
  }
};

// ---------------------------------------------------------------------------
// Budgets

struct AttackBudget {
  std::size_t n_max = 0;
};

/// Budget checked against the feature dimension.
inline AttackBudget make_budget(std::size_t n_max, std::size_t dimension) {
  if (n_max > dimension)
    throw Error("attack budget n_max = " + std::to_string(n_max) + " exceeds dimension " + std::to_string(dimension));
  return {n_max};
}

class PoisonSpec {
 public:
  explicit PoisonSpec(double p_max) : p_max_(p_max) {
    if (!(p_max >= 0.0 && p_max <= 0.5))
      throw Error("poisoning fraction p_max = " + std::to_string(p_max) + " outside the capability bound [0, 0.5]");
  }
  double p_max() const noexcept { return p_max_; }

 private:
  double p_max_;
};

// ---------------------------------------------------------------------------
// Generators

inline bool is_binary(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

/// Greedy minimizer of g over the Hamming ball of radius n_max around a
/// binary x: features are visited by decreasing |w_i| (ties by index); a
/// negative-weight absent feature is inserted and a positive-weight present
/// feature is removed, until n_max flips are made. Zero weights are skipped.
inline std::vector<double> gwi_bwo_attack(std::span<const double> x, const LinearModel& model, AttackBudget budget) {
  if (x.size() != model.dimension())
    throw Error("gwi_bwo_attack: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                std::to_string(model.dimension()) + ")");
  if (!is_binary(x)) throw Error("gwi_bwo_attack: feature vector is not binary");
  std::vector<double> out(x.begin(), x.end());
  if (budget.n_max == 0) return out;

  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(model.weights[a]) > std::abs(model.weights[b]);
  });
  std::size_t flips = 0;
  for (std::size_t i : order) {
    if (flips == budget.n_max) break;
    const double w = model.weights[i];
    if (w < 0.0 && out[i] == 0.0) {
      out[i] = 1.0;
      ++flips;
    } else if (w > 0.0 && out[i] == 1.0) {
      out[i] = 0.0;
      ++flips;
    }
  }
  return out;
}

/// Replaces the spoofed trait's impostor score with the target's genuine one.
inline std::vector<double> spoof_substitution(std::span<const double> impostor, std::span<const double> target_genuine,
                                              BiometricTrait trait) {
  if (impostor.size() != 2 || target_genuine.size() != 2) throw Error("spoof_substitution: expected 2-D score pairs");
  std::vector<double> out(impostor.begin(), impostor.end());
  const std::size_t f = trait == BiometricTrait::Fingerprint ? 0 : 1;
  out[f] = target_genuine[f];
  return out;
}

/// One spoofed sample per impostor, each targeting a genuine sample drawn
/// uniformly and independently under seed.
inline Dataset build_spoof_pool(const Dataset& impostor_pool, const Dataset& genuine_pool, BiometricTrait trait,
                                std::uint64_t seed) {
  if (genuine_pool.empty()) throw Error("build_spoof_pool: empty genuine pool");
  if (impostor_pool.empty()) throw Error("build_spoof_pool: empty impostor pool");
  Rng rng(derive_seed(seed, Stream::Attack));
  Dataset out(impostor_pool.dimension());
  out.reserve(impostor_pool.size());
  for (const Sample& s : impostor_pool) {
    const Sample& target = genuine_pool[rng.index(genuine_pool.size())];
    out.add({spoof_substitution(s.features, target.features, trait), Label::Malicious, AttackFlag::Attacked});
  }
  return out;
}

/// Training distribution under poisoning: prior p(M) = p_max, every malicious
/// training sample is an attack sample drawn from the malicious testing pool,
/// legitimate samples come from the clean legitimate pool.
inline DistributionSpec poison_training_spec(std::shared_ptr<const Dataset> legitimate_pool,
                                             std::shared_ptr<const Dataset> malicious_test_pool,
                                             const PoisonSpec& poison) {
  if (poison.p_max() > 0.0 && (!malicious_test_pool || malicious_test_pool->empty()))
    throw Error("poison_training_spec: empty malicious pool with p_max > 0");
  DistributionSpec spec;
  spec.prior_malicious = poison.p_max();
  spec.set_attack_probability(Label::Legitimate, 0.0);
  spec.set_attack_probability(Label::Malicious, 1.0);
  if (legitimate_pool) spec.set_component(Label::Legitimate, AttackFlag::Clean, ComponentDistribution::empirical(legitimate_pool));
  if (malicious_test_pool)
    spec.set_component(Label::Malicious, AttackFlag::Attacked, ComponentDistribution::empirical(malicious_test_pool));
  return spec;
}

// ---------------------------------------------------------------------------
// Scenario consistency

/// Checks that the strategy stays within the capability, that the taxonomy
/// is coherent, and that the generator's knowledge requirements are met.
inline std::vector<std::string> check_scenario_consistency(const AttackScenario& sc) {
  std::vector<std::string> out;
  const auto& cap = sc.capability;
  const auto& st = sc.strategy;

  if (sc.influence == Influence::Exploratory && cap.affects_training)
    out.push_back("exploratory attack cannot affect training data");
  if (sc.influence == Influence::Causative && !cap.affects_training)
    out.push_back("causative attack must be able to affect training data");

  for (Phase p : {Phase::Training, Phase::Testing}) {
    const bool phase_allowed = p == Phase::Training ? cap.affects_training : cap.affects_testing;
    for (Label y : kLabels) {
      const double f = st.attacked(p, y);
      if (f < 0.0 || f > 1.0)
        out.push_back(std::string("attacked fraction out of range for ") + to_string(y) + " in " + to_string(p));
      if (f > 0.0 && !phase_allowed)
        out.push_back(std::string("strategy attacks ") + to_string(p) + " data but capability forbids it");
      if (f > cap.controllable_fraction[index_of(y)])
        out.push_back(std::string("strategy manipulates ") + (y == Label::Malicious ? "malicious" : "legitimate") +
                      " " + to_string(p) + " samples beyond the controllable fraction");
    }
  }
  if (sc.influence == Influence::Exploratory && (st.attacked(Phase::Training, Label::Legitimate) > 0.0 ||
                                                 st.attacked(Phase::Training, Label::Malicious) > 0.0))
    out.push_back("exploratory attack with attacked training fraction > 0");
  if (st.prior_override && !cap.prior_change_allowed) out.push_back("prior override without prior-change capability");
  if (st.prior_override && (*st.prior_override < 0.0 || *st.prior_override > 1.0))
    out.push_back("prior override out of range");

  if (st.generator != GeneratorKind::None && sc.violation != Violation::Integrity)
    out.push_back("only integrity-violation generators are implemented");

  switch (st.generator) {
    case GeneratorKind::None:
      break;
    case GeneratorKind::GwiBwo:
      if (!sc.knowledge.feature_set || !sc.knowledge.algorithm || !sc.knowledge.parameters)
        out.push_back("gwi_bwo requires knowledge of feature set, algorithm and parameters (k.ii-k.iv)");
      if (st.attacked(Phase::Testing, Label::Malicious) <= 0.0)
        out.push_back("gwi_bwo generator but no testing malicious samples are attacked");
      for (double v : sc.strength.values)
        if (cap.max_modified_features && v > static_cast<double>(*cap.max_modified_features))
          out.push_back("n_max = " + std::to_string(v) + " exceeds the feature manipulation capability");
      break;
    case GeneratorKind::Spoof:
      if (!sc.knowledge.feature_set) out.push_back("spoofing requires knowledge of the biometric traits (k.ii)");
      if (cap.max_modified_features && *cap.max_modified_features < 1)
        out.push_back("spoofing modifies one score but capability allows none");
      if (st.attacked(Phase::Testing, Label::Malicious) <= 0.0)
        out.push_back("spoof generator but no testing malicious samples are attacked");
      break;
    case GeneratorKind::PoisonWithTestMalicious:
      if (!sc.knowledge.feature_set) out.push_back("poisoning requires knowledge of the feature set (k.ii)");
      if (!cap.prior_change_allowed) out.push_back("poisoning changes the training prior but capability forbids it");
      if (st.attacked(Phase::Training, Label::Malicious) != 1.0)
        out.push_back("poisoning requires every malicious training sample to be an attack sample");
      for (double v : sc.strength.values)
        if (v < 0.0 || v > 0.5) out.push_back("p_max = " + std::to_string(v) + " outside [0, 0.5]");
      break;
  }
  if (sc.strength.values.empty()) out.push_back("no attack strength values");
  for (double v : sc.strength.values)
    if (!std::isfinite(v) || v < 0.0) out.push_back("attack strength values must be finite and nonnegative");
  return out;
}

// ---------------------------------------------------------------------------
// Pools D^{y,a} per phase

struct PoolKey {
  Phase phase;
  Label label;
  AttackFlag flag;
  friend auto operator<=>(const PoolKey&, const PoolKey&) = default;
};

using ScenarioPools = std::map<PoolKey, std::shared_ptr<const Dataset>>;

/// Inputs an attack generator may need beyond the data.
struct AttackContext {
  const Model* model = nullptr;  // classifier under attack (for gwi_bwo)
  double strength = 0.0;
  std::uint64_t seed = 0;
};

/// Builds D_TR^{y,a} and D_TS^{y,a}. Clean pools are label slices of the
/// input sets; attacked pools come from the scenario's generator, one attack
/// sample per source sample in source order, and stay empty for phases the
/// generator does not touch or when the strength is zero.
inline ScenarioPools build_scenario_pools(const Dataset& d_tr, const Dataset& d_ts, const AttackScenario& sc,
                                          const AttackContext& ctx) {
  if (d_tr.dimension() != d_ts.dimension()) throw Error("build_scenario_pools: training/testing dimension mismatch");
  const auto& cap = sc.capability;
  for (Phase p : {Phase::Training, Phase::Testing}) {
    const bool allowed = p == Phase::Training ? cap.affects_training : cap.affects_testing;
    for (Label y : kLabels) {
      const double f = sc.strategy.attacked(p, y);
      if (f > 0.0 && (!allowed || f > cap.controllable_fraction[index_of(y)]))
        throw Error(std::string("capability violation: ") + to_string(p) + " " + to_string(y) +
                    " samples may not be manipulated");
    }
  }

  ScenarioPools pools;
  const std::size_t dim = d_tr.dimension();
  for (Phase p : {Phase::Training, Phase::Testing}) {
    const Dataset& src = p == Phase::Training ? d_tr : d_ts;
    for (Label y : kLabels) {
      pools[{p, y, AttackFlag::Clean}] = std::make_shared<const Dataset>(src.slice(y));
      pools[{p, y, AttackFlag::Attacked}] = std::make_shared<const Dataset>(dim);
    }
  }

  const auto phase = sc.attacked_phase();
  if (!phase || !sc.affects(*phase, ctx.strength)) return pools;

  auto& target = pools[{*phase, Label::Malicious, AttackFlag::Attacked}];
  switch (sc.strategy.generator) {
    case GeneratorKind::GwiBwo: {
      const auto* lin = ctx.model ? std::get_if<LinearModel>(ctx.model) : nullptr;
      if (!lin) throw Error("gwi_bwo attack requires a trained linear model");
      const auto n_max = static_cast<std::size_t>(std::llround(ctx.strength));
      const AttackBudget budget{std::min(n_max, dim)};
      Dataset out(dim);
      for (const Sample& s : *pools[{Phase::Testing, Label::Malicious, AttackFlag::Clean}])
        out.add({gwi_bwo_attack(s.features, *lin, budget), Label::Malicious, AttackFlag::Attacked});
      target = std::make_shared<const Dataset>(std::move(out));
      break;
    }
    case GeneratorKind::Spoof: {
      const auto& impostors = *pools[{Phase::Testing, Label::Malicious, AttackFlag::Clean}];
      const auto& genuine = *pools[{Phase::Testing, Label::Legitimate, AttackFlag::Clean}];
      if (!impostors.empty()) target = std::make_shared<const Dataset>(build_spoof_pool(impostors, genuine, sc.strategy.trait, ctx.seed));
      break;
    }
    case GeneratorKind::PoisonWithTestMalicious: {
      Dataset out(dim);
      for (const Sample& s : *pools[{Phase::Testing, Label::Malicious, AttackFlag::Clean}])
        out.add({s.features, Label::Malicious, AttackFlag::Attacked});
      target = std::make_shared<const Dataset>(std::move(out));
      break;
    }
    case GeneratorKind::None:
      break;
  }
  return pools;
}

/// p(Y) p(A|Y) p(X|Y,A) for one phase at the given strength. Components are
/// set only for cells with positive mass. The prior defaults to the label
/// frequency of the phase's source set.
inline DistributionSpec phase_spec(const AttackScenario& sc, Phase phase, const ScenarioPools& pools,
                                   double strength, double source_prior) {
  const auto pool = [&](Label y, AttackFlag a) { return pools.at({phase, y, a}); };
  if (sc.strategy.generator == GeneratorKind::PoisonWithTestMalicious && phase == Phase::Training &&
      sc.affects(phase, strength)) {
    return poison_training_spec(pool(Label::Legitimate, AttackFlag::Clean), pool(Label::Malicious, AttackFlag::Attacked),
                                PoisonSpec(strength));
  }
  DistributionSpec spec;
  const bool affected = sc.affects(phase, strength);
  spec.prior_malicious = affected && sc.strategy.prior_override ? *sc.strategy.prior_override : source_prior;
  for (Label y : kLabels) spec.set_attack_probability(y, affected ? sc.strategy.attacked(phase, y) : 0.0);
  for (Label y : kLabels)
    for (AttackFlag a : kFlags)
      if (spec.cell_probability(y, a) > 0.0) spec.set_component(y, a, ComponentDistribution::empirical(pool(y, a)));
  return spec;
}

}  // namespace clfsec
