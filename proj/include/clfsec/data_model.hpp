#pragma once

// Generative model of training/testing data under attack and the set
// construction procedure that samples from it.
//
// Data are modelled as p(Y) p(A|Y) p(X|Y,A): Y is the class label, A a
// Boolean flag telling whether a sample was produced by the adversary, and
// each of the four (Y, A) cells owns a component distribution which is
// either an analytic density, an empirical pool sampled with replacement, or
// an attack generator invoked online.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "clfsec/error.hpp"
#include "clfsec/rng.hpp"

namespace clfsec {

enum class Label : std::uint8_t { Legitimate = 0, Malicious = 1 };
enum class AttackFlag : std::uint8_t { Clean = 0, Attacked = 1 };

inline constexpr std::array<Label, 2> kLabels{Label::Legitimate, Label::Malicious};
inline constexpr std::array<AttackFlag, 2> kFlags{AttackFlag::Clean, AttackFlag::Attacked};

constexpr std::size_t index_of(Label y) noexcept { return static_cast<std::size_t>(y); }
constexpr std::size_t index_of(AttackFlag a) noexcept { return static_cast<std::size_t>(a); }
constexpr std::size_t cell_index(Label y, AttackFlag a) noexcept { return 2 * index_of(y) + index_of(a); }

inline const char* to_string(Label y) noexcept { return y == Label::Malicious ? "M" : "L"; }
inline const char* to_string(AttackFlag a) noexcept { return a == AttackFlag::Attacked ? "Attacked" : "Clean"; }

inline std::string cell_name(Label y, AttackFlag a) {
  return std::string("(") + to_string(y) + ", " + to_string(a) + ")";
}

struct Sample {
  std::vector<double> features;
  Label label = Label::Legitimate;
  AttackFlag flag = AttackFlag::Clean;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Ordered collection of samples sharing one feature dimension.
class Dataset {
 public:
  explicit Dataset(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw Error("Dataset: dimension must be positive");
  }

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  void reserve(std::size_t n) { samples_.reserve(n); }

  void add(Sample s) {
    if (s.features.size() != dimension_)
      throw Error("Dataset: sample of dimension " + std::to_string(s.features.size()) +
                  " added to dataset of dimension " + std::to_string(dimension_));
    samples_.push_back(std::move(s));
  }

  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  Sample& operator[](std::size_t i) { return samples_[i]; }
  std::span<const Sample> samples() const noexcept { return samples_; }
  auto begin() const noexcept { return samples_.begin(); }
  auto end() const noexcept { return samples_.end(); }

  std::size_t count(Label y) const {
    return static_cast<std::size_t>(
        std::count_if(samples_.begin(), samples_.end(), [y](const Sample& s) { return s.label == y; }));
  }

  /// Fraction of malicious samples; 0 for an empty set.
  double malicious_fraction() const {
    return empty() ? 0.0 : static_cast<double>(count(Label::Malicious)) / static_cast<double>(size());
  }

  bool has_both_classes() const { return count(Label::Malicious) > 0 && count(Label::Legitimate) > 0; }

  /// Samples with the given label, in their original order.
  Dataset slice(Label y) const {
    Dataset out(dimension_);
    for (const Sample& s : samples_)
      if (s.label == y) out.add(s);
    return out;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t dimension_;
  std::vector<Sample> samples_;
};

// ---------------------------------------------------------------------------
// Component distributions p(X | Y=y, A=a)

/// Isotropic Gaussian N(mean, sigma^2 I).
struct GaussianDensity {
  std::vector<double> mean;
  double sigma = 1.0;

  std::size_t dimension() const noexcept { return mean.size(); }

  double log_density(std::span<const double> x) const {
    double sq = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) sq += (x[i] - mean[i]) * (x[i] - mean[i]);
    const double d = static_cast<double>(mean.size());
    return -0.5 * sq / (sigma * sigma) - d * std::log(sigma) - 0.5 * d * std::log(2.0 * std::numbers::pi);
  }

  std::vector<double> draw(Rng& rng) const {
    std::vector<double> x(mean.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal(mean[i], sigma);
    return x;
  }
};

/// Product of independent Gamma(shape_i, scale_i) marginals.
struct GammaProductDensity {
  std::vector<double> shape;
  std::vector<double> scale;

  std::size_t dimension() const noexcept { return shape.size(); }

  double log_density(std::span<const double> x) const {
    double lp = 0.0;
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (x[i] <= 0.0) return -INFINITY;
      lp += (shape[i] - 1.0) * std::log(x[i]) - x[i] / scale[i] - std::lgamma(shape[i]) -
            shape[i] * std::log(scale[i]);
    }
    return lp;
  }

  std::vector<double> draw(Rng& rng) const {
    std::vector<double> x(shape.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.gamma(shape[i], scale[i]);
    return x;
  }
};

struct AnalyticComponent {
  std::variant<GaussianDensity, GammaProductDensity> density;

  std::size_t dimension() const {
    return std::visit([](const auto& d) { return d.dimension(); }, density);
  }
  double log_density(std::span<const double> x) const {
    return std::visit([&](const auto& d) { return d.log_density(x); }, density);
  }
  std::vector<double> draw(Rng& rng) const {
    return std::visit([&](const auto& d) { return d.draw(rng); }, density);
  }
};

/// Empirical distribution of a fixed set D^{y,a}; sampled with replacement.
struct EmpiricalPool {
  std::shared_ptr<const Dataset> pool;
};

/// Maps a source sample to an attack sample. The partial dataset holds the
/// samples whose features were generated before this call.
using AttackFunction = std::function<std::vector<double>(const Sample& source, const Dataset& partial, Rng& rng)>;

/// Unbounded attack generator run online: draws a source sample uniformly
/// (with replacement) and applies the attack function to it.
struct AttackGenerator {
  std::shared_ptr<const Dataset> source;
  AttackFunction attack;
};

enum class ComponentKind { Analytic, EmpiricalPool, AttackGenerator };

struct ComponentDistribution {
  std::variant<AnalyticComponent, EmpiricalPool, AttackGenerator> value;

  ComponentKind kind() const noexcept { return static_cast<ComponentKind>(value.index()); }

  static ComponentDistribution analytic(GaussianDensity d) { return {AnalyticComponent{std::move(d)}}; }
  static ComponentDistribution analytic(GammaProductDensity d) { return {AnalyticComponent{std::move(d)}}; }
  static ComponentDistribution empirical(std::shared_ptr<const Dataset> pool) { return {EmpiricalPool{std::move(pool)}}; }
  static ComponentDistribution empirical(Dataset pool) {
    return empirical(std::make_shared<const Dataset>(std::move(pool)));
  }
  static ComponentDistribution generator(std::shared_ptr<const Dataset> source, AttackFunction f) {
    return {AttackGenerator{std::move(source), std::move(f)}};
  }

  /// Dimension of generated vectors; nullopt for an empty pool/source.
  std::optional<std::size_t> dimension() const {
    switch (kind()) {
      case ComponentKind::Analytic:
        return std::get<AnalyticComponent>(value).dimension();
      case ComponentKind::EmpiricalPool: {
        const auto& p = std::get<EmpiricalPool>(value).pool;
        if (p) return p->dimension();
        return std::nullopt;
      }
      case ComponentKind::AttackGenerator: {
        const auto& s = std::get<AttackGenerator>(value).source;
        if (s) return s->dimension();
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  /// True when the component can produce at least one vector.
  bool can_generate() const {
    switch (kind()) {
      case ComponentKind::Analytic:
        return true;
      case ComponentKind::EmpiricalPool: {
        const auto& p = std::get<EmpiricalPool>(value).pool;
        return p && !p->empty();
      }
      case ComponentKind::AttackGenerator: {
        const auto& g = std::get<AttackGenerator>(value);
        return g.source && !g.source->empty() && static_cast<bool>(g.attack);
      }
    }
    return false;
  }
};

enum class GenerationMode {
  IID,                    // every sample drawn independently, in order
  IncrementalAttackLast,  // cells first, then clean vectors, then attack vectors one at a time
};

/// p(Y) p(A|Y) p(X|Y,A) for one phase (training or testing).
struct DistributionSpec {
  double prior_malicious = 0.5;
  std::array<double, 2> attack_prob{0.0, 0.0};  // p(A=Attacked | Y=y), by index_of(y)
  std::array<std::optional<ComponentDistribution>, 4> components;  // by cell_index
  GenerationMode mode = GenerationMode::IID;

  double prior(Label y) const { return y == Label::Malicious ? prior_malicious : 1.0 - prior_malicious; }
  double attack_probability(Label y) const { return attack_prob[index_of(y)]; }
  void set_attack_probability(Label y, double p) { attack_prob[index_of(y)] = p; }

  double cell_probability(Label y, AttackFlag a) const {
    const double pa = attack_probability(y);
    return prior(y) * (a == AttackFlag::Attacked ? pa : 1.0 - pa);
  }

  const std::optional<ComponentDistribution>& component(Label y, AttackFlag a) const {
    return components[cell_index(y, a)];
  }
  void set_component(Label y, AttackFlag a, ComponentDistribution c) { components[cell_index(y, a)] = std::move(c); }
};

/// Lists every reason the spec cannot be sampled; empty iff usable.
inline std::vector<std::string> validate_spec(const DistributionSpec& spec) {
  std::vector<std::string> out;
  const auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(spec.prior_malicious)) out.push_back("prior out of range");
  for (Label y : kLabels)
    if (!in_unit(spec.attack_probability(y)))
      out.push_back(std::string("attack probability out of range for ") + to_string(y));
  if (!out.empty()) return out;

  std::optional<std::size_t> dim;
  for (Label y : kLabels) {
    for (AttackFlag a : kFlags) {
      const double mass = spec.cell_probability(y, a);
      const auto& comp = spec.component(y, a);
      if (mass <= 0.0) continue;
      if (!comp) {
        out.push_back("missing component " + cell_name(y, a));
        continue;
      }
      if (!comp->can_generate()) {
        out.push_back("empty pool " + cell_name(y, a) + " with positive probability");
        continue;
      }
      const auto d = comp->dimension();
      if (dim && d && *d != *dim) out.push_back("dimension mismatch at " + cell_name(y, a));
      if (!dim) dim = d;
    }
  }
  return out;
}

/// Feature dimension of the vectors a spec generates.
inline std::size_t spec_dimension(const DistributionSpec& spec) {
  for (const auto& c : spec.components)
    if (c)
      if (auto d = c->dimension()) return *d;
  throw Error("distribution spec has no component with a known dimension");
}

// ---------------------------------------------------------------------------
// Resampling of D into (D_TR, D_TS) pairs

struct CrossValidation {
  std::size_t k = 5;
};
struct Bootstrap {
  std::size_t k = 1;
};
struct Chronological {
  std::size_t split_index = 0;
};
using ResampleMethod = std::variant<CrossValidation, Bootstrap, Chronological>;

struct FoldPair {
  Dataset train;
  Dataset test;
};

struct FoldSet {
  std::vector<FoldPair> pairs;
  std::size_t k() const noexcept { return pairs.size(); }
};

namespace detail {
inline Dataset gather(const Dataset& data, std::span<const std::size_t> idx) {
  Dataset out(data.dimension());
  out.reserve(idx.size());
  for (std::size_t i : idx) out.add(data[i]);
  return out;
}
}  // namespace detail

/// Splits D into k (D_TR, D_TS) pairs. Cross-validation partitions a seeded
/// permutation into k nearly equal test parts (each part keeps the original
/// sample order); bootstrap trains on n draws with replacement and tests on
/// the out-of-bag samples; chronological keeps order and never shuffles.
inline FoldSet resample(const Dataset& data, const ResampleMethod& method, std::uint64_t seed) {
  if (data.empty()) throw Error("resample: empty dataset");
  const std::size_t n = data.size();
  FoldSet out;
  if (const auto* cv = std::get_if<CrossValidation>(&method)) {
    if (cv->k == 0) throw Error("resample: k must be positive");
    if (cv->k > n) throw Error("too many folds");
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(derive_seed(seed, Stream::Resample));
    rng.shuffle(std::span<std::size_t>(perm));
    std::vector<std::size_t> fold_of(n);
    for (std::size_t r = 0; r < n; ++r) fold_of[perm[r]] = r * cv->k / n;
    for (std::size_t f = 0; f < cv->k; ++f) {
      std::vector<std::size_t> tr, ts;
      for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? ts : tr).push_back(i);
      out.pairs.push_back({detail::gather(data, tr), detail::gather(data, ts)});
    }
  } else if (const auto* bs = std::get_if<Bootstrap>(&method)) {
    if (bs->k == 0) throw Error("resample: k must be positive");
    for (std::size_t f = 0; f < bs->k; ++f) {
      Rng rng(derive_seed(seed, Stream::Resample, {f}));
      std::vector<std::size_t> tr(n);
      std::vector<char> in_bag(n, 0);
      for (auto& i : tr) {
        i = rng.index(n);
        in_bag[i] = 1;
      }
      std::vector<std::size_t> ts;
      for (std::size_t i = 0; i < n; ++i)
        if (!in_bag[i]) ts.push_back(i);
      if (ts.empty()) throw Error("resample: bootstrap fold " + std::to_string(f) + " has no out-of-bag samples");
      out.pairs.push_back({detail::gather(data, tr), detail::gather(data, ts)});
    }
  } else {
    const auto& ch = std::get<Chronological>(method);
    if (ch.split_index == 0 || ch.split_index >= n)
      throw Error("resample: chronological split index must lie in [1, " + std::to_string(n - 1) + "]");
    std::vector<std::size_t> tr(ch.split_index), ts(n - ch.split_index);
    for (std::size_t i = 0; i < tr.size(); ++i) tr[i] = i;
    for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = ch.split_index + i;
    out.pairs.push_back({detail::gather(data, tr), detail::gather(data, ts)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Set construction (TR or TS) from a DistributionSpec

namespace detail {

inline std::vector<double> draw_features(const ComponentDistribution& comp, const Dataset& partial, Rng& rng) {
  switch (comp.kind()) {
    case ComponentKind::Analytic:
      return std::get<AnalyticComponent>(comp.value).draw(rng);
    case ComponentKind::EmpiricalPool: {
      const Dataset& pool = *std::get<EmpiricalPool>(comp.value).pool;
      return pool[rng.index(pool.size())].features;
    }
    case ComponentKind::AttackGenerator: {
      const auto& g = std::get<AttackGenerator>(comp.value);
      const Sample& src = (*g.source)[rng.index(g.source->size())];
      return g.attack(src, partial, rng);
    }
  }
  throw Error("unknown component kind");
}

}  // namespace detail

/// Draws n samples from spec. Cells (y, a) and feature vectors come from two
/// separate sub-streams of seed, so both generation modes produce the same
/// cell sequence. In incremental mode attack vectors are generated last, in
/// cell order, each seeing every vector generated before it; the returned
/// dataset is always in cell order.
inline Dataset sample_dataset(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error("sample_dataset: n must be positive");
  if (auto problems = validate_spec(spec); !problems.empty()) throw Error("sample_dataset: invalid spec: " + problems.front());
  const std::size_t dim = spec_dimension(spec);

  Rng cell_rng(derive_seed(seed, {1}));
  Rng feature_rng(derive_seed(seed, {2}));

  std::vector<Label> labels(n);
  std::vector<AttackFlag> flags(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = cell_rng.bernoulli(spec.prior_malicious) ? Label::Malicious : Label::Legitimate;
    flags[i] = cell_rng.bernoulli(spec.attack_probability(labels[i])) ? AttackFlag::Attacked : AttackFlag::Clean;
  }

  const auto component_for = [&](std::size_t i) -> const ComponentDistribution& {
    const auto& c = spec.component(labels[i], flags[i]);
    if (!c || !c->can_generate())
      throw Error("sample_dataset: no samples available for cell " + cell_name(labels[i], flags[i]));
    return *c;
  };

  Dataset out(dim);
  out.reserve(n);
  if (spec.mode == GenerationMode::IID) {
    for (std::size_t i = 0; i < n; ++i) {
      auto x = detail::draw_features(component_for(i), out, feature_rng);
      out.add({std::move(x), labels[i], flags[i]});
    }
    return out;
  }

  std::vector<std::vector<double>> features(n);
  Dataset partial(dim);
  partial.reserve(n);
  for (AttackFlag phase : kFlags) {
    for (std::size_t i = 0; i < n; ++i) {
      if (flags[i] != phase) continue;
      features[i] = detail::draw_features(component_for(i), partial, feature_rng);
      partial.add({features[i], labels[i], flags[i]});
    }
  }
  for (std::size_t i = 0; i < n; ++i) out.add({std::move(features[i]), labels[i], flags[i]});
  return out;
}

}  // namespace clfsec
