#include <set>

#include <gtest/gtest.h>

#include "clfsec/attacks.hpp"
#include "oracles.hpp"

using namespace clfsec;

namespace {

AttackScenario evasion_scenario() {
  AttackScenario sc;
  sc.influence = Influence::Exploratory;
  sc.knowledge = {false, true, true, true, false};
  sc.capability.affects_testing = true;
  sc.capability.controllable_fraction = {0.0, 1.0};
  sc.strategy.attacked_fraction[index_of(Phase::Testing)] = {0.0, 1.0};
  sc.strategy.generator = GeneratorKind::GwiBwo;
  sc.strength = {"n_max", {0, 1, 2}};
  return sc;
}

AttackScenario poisoning_scenario() {
  AttackScenario sc;
  sc.influence = Influence::Causative;
  sc.knowledge.feature_set = true;
  sc.capability.affects_training = true;
  sc.capability.prior_change_allowed = true;
  sc.capability.controllable_fraction = {0.0, 1.0};
  sc.strategy.attacked_fraction[index_of(Phase::Training)] = {0.0, 1.0};
  sc.strategy.generator = GeneratorKind::PoisonWithTestMalicious;
  sc.strength = {"p_max", {0.0, 0.1}};
  return sc;
}

Dataset binary_set(std::size_t n_legit, std::size_t n_mal, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Dataset out(d);
  for (std::size_t i = 0; i < n_legit + n_mal; ++i) {
    std::vector<double> x(d);
    for (auto& v : x) v = rng.bernoulli(0.4) ? 1.0 : 0.0;
    out.add({std::move(x), i < n_legit ? Label::Legitimate : Label::Malicious});
  }
  return out;
}

}  // namespace

TEST(GwiBwo, WorkedExample) {
  const LinearModel m{{2.0, -1.0, 3.0}, 0.0};
  const std::vector<double> x{1, 1, 0};
  const auto a = gwi_bwo_attack(x, m, {1});
  EXPECT_EQ(a, (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(m.discriminant(x), 1.0);
  EXPECT_EQ(m.discriminant(a), -1.0);
  EXPECT_EQ(m.discriminant(a), oracle::hamming_ball_minimum(x, m, 1));
}

TEST(GwiBwo, ZeroBudgetIsIdentity) {
  const LinearModel m{{2.0, -1.0, 3.0}, 0.5};
  const std::vector<double> x{1, 0, 1};
  EXPECT_EQ(gwi_bwo_attack(x, m, {0}), x);
}

TEST(GwiBwo, FullBudgetReachesGlobalMinimum) {
  const LinearModel m{{2.0, -1.0, 0.0, -0.5, 3.0}, 1.0};
  const std::vector<double> x{1, 0, 1, 1, 0};
  const auto a = gwi_bwo_attack(x, m, {5});
  EXPECT_EQ(a, (std::vector<double>{0, 1, 1, 1, 0}));  // zero weight left alone
}

TEST(GwiBwo, MatchesExhaustiveSearch) {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.index(10);
    LinearModel m{std::vector<double>(d), rng.normal()};
    for (auto& w : m.weights) w = rng.bernoulli(0.1) ? 0.0 : rng.normal();
    std::vector<double> x(d);
    for (auto& v : x) v = rng.bernoulli(0.5) ? 1.0 : 0.0;
    double prev = m.discriminant(x);
    for (std::size_t r = 0; r <= d; ++r) {
      const auto a = gwi_bwo_attack(x, m, make_budget(r, d));
      EXPECT_EQ(m.discriminant(a), oracle::hamming_ball_minimum(x, m, r));
      EXPECT_LE(oracle::hamming(x, a), r);
      EXPECT_LE(m.discriminant(a), prev);
      prev = m.discriminant(a);
    }
  }
}

TEST(GwiBwo, RejectsNonBinaryAndOversizedBudget) {
  const LinearModel m{{1.0, 1.0}, 0.0};
  const std::vector<double> x{0.5, 1.0};
  EXPECT_THROW(gwi_bwo_attack(x, m, {1}), Error);
  EXPECT_THROW(make_budget(3, 2), Error);
}

TEST(Spoof, Substitution) {
  const std::vector<double> imp{0.2, 0.3}, tgt{0.9, 0.8};
  EXPECT_EQ(spoof_substitution(imp, tgt, BiometricTrait::Fingerprint), (std::vector<double>{0.9, 0.3}));
  EXPECT_EQ(spoof_substitution(imp, tgt, BiometricTrait::Face), (std::vector<double>{0.2, 0.8}));
  EXPECT_EQ(spoof_substitution(imp, imp, BiometricTrait::Face), imp);
}

TEST(Spoof, PoolContract) {
  Dataset imp(2), gen(2);
  imp.add({{0.1, 0.2}, Label::Malicious});
  gen.add({{0.7, 0.9}, Label::Legitimate});
  const Dataset one = build_spoof_pool(imp, gen, BiometricTrait::Fingerprint, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].features, spoof_substitution(imp[0].features, gen[0].features, BiometricTrait::Fingerprint));

  Rng rng(2);
  Dataset many(2), genuine(2);
  for (int i = 0; i < 50; ++i) many.add({{rng.uniform(), rng.uniform()}, Label::Malicious});
  for (int i = 0; i < 20; ++i) genuine.add({{rng.uniform(), rng.uniform()}, Label::Legitimate});
  const Dataset a = build_spoof_pool(many, genuine, BiometricTrait::Face, 9);
  EXPECT_EQ(a.size(), 50u);
  EXPECT_EQ(a, build_spoof_pool(many, genuine, BiometricTrait::Face, 9));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].features[0], many[i].features[0]);  // untouched coordinate, bit-identical
    EXPECT_EQ(a[i].flag, AttackFlag::Attacked);
  }
  EXPECT_THROW(build_spoof_pool(many, Dataset(2), BiometricTrait::Face, 1), Error);
}

TEST(Poison, ZeroStrengthHasNoMaliciousMass) {
  auto legit = std::make_shared<const Dataset>(binary_set(10, 0, 4, 1));
  auto mal = std::make_shared<const Dataset>(binary_set(0, 3, 4, 2));
  const auto spec = poison_training_spec(legit, mal, PoisonSpec(0.0));
  const Dataset tr = sample_dataset(spec, 500, 3);
  EXPECT_EQ(tr.count(Label::Malicious), 0u);
}

TEST(Poison, HalfPoisonedCount) {
  auto legit = std::make_shared<const Dataset>(binary_set(10, 0, 4, 1));
  auto mal = std::make_shared<const Dataset>(binary_set(0, 3, 4, 2));
  const auto spec = poison_training_spec(legit, mal, PoisonSpec(0.5));
  const Dataset tr = sample_dataset(spec, 40000, 4);
  std::size_t attacked = 0;
  for (const auto& s : tr) attacked += s.flag == AttackFlag::Attacked;
  EXPECT_TRUE(oracle::within_4_sigma(attacked, 40000, 0.5)) << attacked;
}

TEST(Poison, AttackSamplesComeFromPool) {
  auto legit = std::make_shared<const Dataset>(binary_set(10, 0, 6, 1));
  auto mal = std::make_shared<const Dataset>(binary_set(0, 3, 6, 2));
  const Dataset tr = sample_dataset(poison_training_spec(legit, mal, PoisonSpec(0.1)), 1000, 5);
  std::set<std::vector<double>> pool;
  for (const auto& s : *mal) pool.insert(s.features);
  for (const auto& s : tr)
    if (s.flag == AttackFlag::Attacked) EXPECT_TRUE(pool.count(s.features));
}

TEST(Poison, CapabilityBound) { EXPECT_THROW(PoisonSpec(0.6), Error); }

TEST(Consistency, TableScenariosAreConsistent) {
  EXPECT_TRUE(check_scenario_consistency(evasion_scenario()).empty());
  EXPECT_TRUE(check_scenario_consistency(poisoning_scenario()).empty());
}

TEST(Consistency, ExploratoryWithTrainingAttack) {
  auto sc = evasion_scenario();
  sc.strategy.attacked_fraction[index_of(Phase::Training)] = {0.0, 0.2};
  const auto report = check_scenario_consistency(sc);
  EXPECT_FALSE(report.empty());
  bool found = false;
  for (const auto& r : report) found |= r.find("exploratory") != std::string::npos;
  EXPECT_TRUE(found);
}

TEST(Consistency, LegitimateManipulationBeyondCapability) {
  auto sc = evasion_scenario();
  sc.strategy.attacked_fraction[index_of(Phase::Testing)] = {0.5, 1.0};
  EXPECT_FALSE(check_scenario_consistency(sc).empty());
}

TEST(Consistency, GwiBwoNeedsParameterKnowledge) {
  auto sc = evasion_scenario();
  sc.knowledge.parameters = false;
  EXPECT_FALSE(check_scenario_consistency(sc).empty());
}

TEST(ScenarioPools, ExploratoryLeavesTrainingClean) {
  const Dataset tr = binary_set(6, 4, 5, 1), ts = binary_set(5, 5, 5, 2);
  const Model m = LinearModel{{1, -1, 1, -1, 1}, 0.0};
  const auto pools = build_scenario_pools(tr, ts, evasion_scenario(), {&m, 2.0, 1});
  EXPECT_EQ(*pools.at({Phase::Training, Label::Legitimate, AttackFlag::Clean}), tr.slice(Label::Legitimate));
  EXPECT_EQ(*pools.at({Phase::Training, Label::Malicious, AttackFlag::Clean}), tr.slice(Label::Malicious));
  EXPECT_TRUE(pools.at({Phase::Training, Label::Malicious, AttackFlag::Attacked})->empty());
  EXPECT_EQ(pools.at({Phase::Testing, Label::Malicious, AttackFlag::Attacked})->size(), 5u);
  const auto spec = phase_spec(evasion_scenario(), Phase::Training, pools, 2.0, tr.malicious_fraction());
  EXPECT_EQ(spec.attack_probability(Label::Malicious), 0.0);
  EXPECT_EQ(spec.prior_malicious, tr.malicious_fraction());
}

TEST(ScenarioPools, PoisonPoolEqualsMaliciousTestSet) {
  const Dataset tr = binary_set(8, 0, 4, 1), ts = binary_set(6, 3, 4, 2);
  const auto pools = build_scenario_pools(tr, ts, poisoning_scenario(), {nullptr, 0.1, 1});
  const auto& attacked = *pools.at({Phase::Training, Label::Malicious, AttackFlag::Attacked});
  ASSERT_EQ(attacked.size(), 3u);
  const Dataset mal = ts.slice(Label::Malicious);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(attacked[i].features, mal[i].features);
}

TEST(ScenarioPools, NoAttackLeavesAttackedPoolsEmpty) {
  auto sc = evasion_scenario();
  sc.strategy.attacked_fraction = {};
  const Model m = LinearModel{{1, -1, 1, -1, 1}, 0.0};
  const auto pools = build_scenario_pools(binary_set(4, 4, 5, 1), binary_set(4, 4, 5, 2), sc, {&m, 3.0, 1});
  for (const auto& [key, pool] : pools)
    if (key.flag == AttackFlag::Attacked) EXPECT_TRUE(pool->empty());
}

TEST(ScenarioPools, CapabilityViolation) {
  auto sc = evasion_scenario();
  sc.capability.controllable_fraction = {0.0, 0.5};
  try {
    build_scenario_pools(binary_set(4, 4, 5, 1), binary_set(4, 4, 5, 2), sc, {nullptr, 1.0, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("capability violation"), std::string::npos);
  }
}

TEST(ScenarioPools, ZeroPoisoningEqualsCleanTrainingSpec) {
  const Dataset tr = binary_set(20, 0, 4, 1), ts = binary_set(6, 3, 4, 2);
  const auto sc = poisoning_scenario();
  const auto pools = build_scenario_pools(tr, ts, sc, {nullptr, 0.0, 1});
  const auto attacked = phase_spec(sc, Phase::Training, pools, 0.0, tr.malicious_fraction());
  DistributionSpec clean;
  clean.prior_malicious = 0.0;
  clean.set_component(Label::Legitimate, AttackFlag::Clean, ComponentDistribution::empirical(tr.slice(Label::Legitimate)));
  EXPECT_EQ(sample_dataset(attacked, 300, 11), sample_dataset(clean, 300, 11));
}
