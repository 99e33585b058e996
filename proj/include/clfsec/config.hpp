#pragma once

// Scenario configuration: data source, classifiers, attack scenario,
// evaluation protocol and output, stored as a versioned JSON document.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "clfsec/attacks.hpp"
#include "clfsec/error.hpp"
#include "clfsec/evaluation.hpp"

namespace clfsec {

inline constexpr int kConfigVersion = 1;

enum class DataSource { SyntheticSpam, SyntheticScores, SyntheticTraffic, EmailCorpus, ScoreTable, Payloads, Tabular };
enum class ResampleKind { CrossValidation, Bootstrap, Chronological, FixedSplit };

struct DataConfig {
  DataSource source = DataSource::SyntheticSpam;
  std::string path;        // corpus index, score table, payload or tabular file
  std::string test_path;   // second file for a fixed train/test split
  std::size_t dimension = 200;
  std::size_t samples = 2000;
  double prior_malicious = 0.5;
  std::size_t n_legitimate = 500;  // synthetic traffic / scores (genuine)
  std::size_t n_malicious = 100;   // synthetic traffic / scores (impostor)
  std::size_t vocab_size = 1000;
  ResampleKind resampling = ResampleKind::CrossValidation;
  std::size_t folds = 5;
  std::size_t split_index = 0;
  SetSize train_size;
  SetSize test_size;
};

struct EvaluationConfig {
  Metric metric;
  std::size_t repetitions = 1;
  std::size_t jobs = 1;
  std::optional<SetConstruction> train_construction;  // default: sample
  std::optional<SetConstruction> test_construction;   // default: transform
  bool keep_roc = false;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};
};

struct ScenarioConfig {
  int version = kConfigVersion;
  std::string name;
  std::uint64_t seed = 1;
  DataConfig data;
  std::vector<ClassifierConfig> classifiers;
  AttackScenario attack;
  EvaluationConfig evaluation;
  OutputConfig output;
};

// ---------------------------------------------------------------------------
// Enum names

namespace detail {

template <typename E>
struct EnumName {
  E value;
  std::string_view name;
};

template <typename E, std::size_t N>
E parse_enum(const EnumName<E> (&table)[N], const std::string& s, std::string_view what) {
  for (const auto& e : table)
    if (e.name == s) return e.value;
  std::string allowed;
  for (const auto& e : table) allowed += (allowed.empty() ? "" : ", ") + std::string(e.name);
  throw ConfigError("unknown " + std::string(what) + " '" + s + "' (expected one of: " + allowed + ")");
}

template <typename E, std::size_t N>
std::string enum_name(const EnumName<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return std::string(e.name);
  throw Error("enum value without a name");
}

inline constexpr EnumName<DataSource> kSources[] = {
    {DataSource::SyntheticSpam, "synthetic_spam"},     {DataSource::SyntheticScores, "synthetic_scores"},
    {DataSource::SyntheticTraffic, "synthetic_traffic"}, {DataSource::EmailCorpus, "email_corpus"},
    {DataSource::ScoreTable, "score_table"},           {DataSource::Payloads, "payloads"},
    {DataSource::Tabular, "tabular"}};
inline constexpr EnumName<ResampleKind> kResampling[] = {{ResampleKind::CrossValidation, "cross_validation"},
                                                         {ResampleKind::Bootstrap, "bootstrap"},
                                                         {ResampleKind::Chronological, "chronological"},
                                                         {ResampleKind::FixedSplit, "fixed_split"}};
inline constexpr EnumName<SetSize::Kind> kSizes[] = {{SetSize::Kind::Source, "source"},
                                                     {SetSize::Kind::KeepLegitimate, "keep_legitimate"},
                                                     {SetSize::Kind::Fixed, "fixed"}};
inline constexpr EnumName<SetConstruction> kConstructions[] = {{SetConstruction::Sample, "sample"},
                                                               {SetConstruction::Transform, "transform"}};
inline constexpr EnumName<Family> kFamilies[] = {{Family::LinearSvm, "linear_svm"},
                                                 {Family::LogisticRegression, "logistic_regression"},
                                                 {Family::OneClassSvm, "one_class_svm"},
                                                 {Family::LlrFusion, "llr_fusion"}};
inline constexpr EnumName<Influence> kInfluences[] = {{Influence::Causative, "causative"},
                                                      {Influence::Exploratory, "exploratory"}};
inline constexpr EnumName<Violation> kViolations[] = {
    {Violation::Integrity, "integrity"}, {Violation::Availability, "availability"}, {Violation::Privacy, "privacy"}};
inline constexpr EnumName<Specificity> kSpecificities[] = {{Specificity::Targeted, "targeted"},
                                                           {Specificity::Indiscriminate, "indiscriminate"}};
inline constexpr EnumName<GeneratorKind> kGenerators[] = {{GeneratorKind::None, "none"},
                                                          {GeneratorKind::GwiBwo, "gwi_bwo"},
                                                          {GeneratorKind::Spoof, "spoof"},
                                                          {GeneratorKind::PoisonWithTestMalicious, "poison_test_malicious"}};
inline constexpr EnumName<BiometricTrait> kTraits[] = {{BiometricTrait::Fingerprint, "fingerprint"},
                                                       {BiometricTrait::Face, "face"}};

using nlohmann::json;

// Typed field access that reports the offending key.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return where_ + "." + key; }

  template <typename T>
  T get(const char* key, T fallback) const {
    if (!has(key)) return fallback;
    return as<T>(j_.at(key), path(key));
  }
  template <typename T>
  T require(const char* key) const {
    if (!has(key)) throw ConfigError(path(key) + ": missing required key");
    return as<T>(j_.at(key), path(key));
  }
  Reader sub(const char* key) const {
    static const json kEmpty = json::object();
    return Reader(has(key) ? j_.at(key) : kEmpty, path(key));
  }

  void reject_unknown(std::initializer_list<std::string_view> known) const {
    for (const auto& [k, v] : j_.items()) {
      bool ok = false;
      for (auto n : known) ok = ok || n == k;
      if (!ok) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
  }

  template <typename T>
  static T as(const json& v, const std::string& where) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(where + ": expected a number");
        return v.get<double>();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
        return v.get<bool>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
          throw ConfigError(where + ": expected a nonnegative integer");
        return v.get<T>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(where + ": expected a string");
        return v.get<std::string>();
      } else {
        return v.get<T>();
      }
    } catch (const json::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }

 private:
  const json& j_;
  std::string where_;
};

inline std::array<double, 2> parse_label_pair(const Reader& r) {
  r.reject_unknown({"L", "M"});
  return {r.get<double>("L", 0.0), r.get<double>("M", 0.0)};
}

inline json label_pair(const std::array<double, 2>& v) { return {{"L", v[0]}, {"M", v[1]}}; }

inline SetSize parse_size_spec(const Reader& r) {
  r.reject_unknown({"kind", "value"});
  SetSize s;
  s.kind = parse_enum(kSizes, r.get<std::string>("kind", "source"), "set size kind");
  s.value = r.get<std::size_t>("value", 0);
  if (s.kind == SetSize::Kind::Fixed && s.value == 0) throw ConfigError(r.path("value") + ": fixed size must be positive");
  return s;
}

inline json size_json(const SetSize& s) {
  json j{{"kind", enum_name(kSizes, s.kind)}};
  if (s.kind == SetSize::Kind::Fixed) j["value"] = s.value;
  return j;
}

inline std::vector<double> parse_strength_values(const Reader& r) {
  if (r.has("values")) {
    const json& v = r.raw("values");
    if (!v.is_array()) throw ConfigError(r.path("values") + ": expected an array");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(Reader::as<double>(e, r.path("values")));
    return out;
  }
  if (r.has("range")) {
    const Reader rg = r.sub("range");
    rg.reject_unknown({"start", "stop", "step"});
    const double start = rg.require<double>("start"), stop = rg.require<double>("stop");
    const double step = rg.get<double>("step", 1.0);
    if (!(step > 0.0) || stop < start) throw ConfigError(r.path("range") + ": need step > 0 and stop >= start");
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  throw ConfigError(r.path("values") + ": strength needs `values` or `range`");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// JSON -> config

inline ClassifierConfig parse_classifier(const nlohmann::json& j, const std::string& where) {
  const detail::Reader r(j, where);
  r.reject_unknown({"label", "family", "c", "c_grid", "cv_folds", "tolerance", "learning_rate", "decay_steps",
                    "epochs", "nu", "gamma", "threshold"});
  ClassifierConfig c;
  c.family = detail::parse_enum(detail::kFamilies, r.require<std::string>("family"), "classifier family");
  c.label = r.get<std::string>("label", detail::enum_name(detail::kFamilies, c.family));
  c.c = r.get<double>("c", 1.0);
  if (r.has("c_grid")) {
    for (const auto& e : r.raw("c_grid")) c.c_grid.push_back(detail::Reader::as<double>(e, r.path("c_grid")));
    if (c.c_grid.empty()) throw ConfigError(r.path("c_grid") + ": empty grid");
  }
  c.cv_folds = r.get<std::size_t>("cv_folds", 5);
  c.tolerance = r.get<double>("tolerance", 1e-3);
  c.logistic.initial_rate = r.get<double>("learning_rate", 0.1);
  c.logistic.decay_steps = r.get<double>("decay_steps", 0.0);
  c.logistic.epochs = r.get<std::size_t>("epochs", 20);
  c.nu = r.get<double>("nu", 0.01);
  c.gamma = r.get<double>("gamma", 0.5);
  c.fusion_threshold = r.get<double>("threshold", 1.0);

  if (!(c.c > 0.0)) throw ConfigError(r.path("c") + ": must be positive");
  for (double v : c.c_grid)
    if (!(v > 0.0)) throw ConfigError(r.path("c_grid") + ": values must be positive");
  if (c.cv_folds < 2) throw ConfigError(r.path("cv_folds") + ": need at least 2 folds");
  if (!(c.tolerance > 0.0)) throw ConfigError(r.path("tolerance") + ": must be positive");
  if (!(c.logistic.initial_rate > 0.0)) throw ConfigError(r.path("learning_rate") + ": must be positive");
  if (c.logistic.decay_steps < 0.0) throw ConfigError(r.path("decay_steps") + ": must be nonnegative");
  if (!(c.nu > 0.0 && c.nu <= 1.0)) throw ConfigError(r.path("nu") + ": must lie in (0, 1]");
  if (!(c.gamma > 0.0)) throw ConfigError(r.path("gamma") + ": must be positive");
  if (!(c.fusion_threshold > 0.0)) throw ConfigError(r.path("threshold") + ": must be positive");
  return c;
}

inline AttackScenario parse_attack(const nlohmann::json& j) {
  const detail::Reader r(j, "attack");
  r.reject_unknown({"name", "influence", "violation", "specificity", "knowledge", "capability", "strategy", "strength"});
  AttackScenario sc;
  sc.name = r.get<std::string>("name", "");
  sc.influence = detail::parse_enum(detail::kInfluences, r.require<std::string>("influence"), "influence");
  sc.violation = detail::parse_enum(detail::kViolations, r.get<std::string>("violation", "integrity"), "violation");
  sc.specificity =
      detail::parse_enum(detail::kSpecificities, r.get<std::string>("specificity", "indiscriminate"), "specificity");

  const auto k = r.sub("knowledge");
  k.reject_unknown({"training_data", "feature_set", "algorithm", "parameters", "feedback"});
  sc.knowledge = {k.get("training_data", false), k.get("feature_set", false), k.get("algorithm", false),
                  k.get("parameters", false), k.get("feedback", false)};

  const auto c = r.sub("capability");
  c.reject_unknown({"affects_training", "affects_testing", "prior_change_allowed", "controllable_fraction",
                    "max_modified_features"});
  sc.capability.affects_training = c.get("affects_training", false);
  sc.capability.affects_testing = c.get("affects_testing", false);
  sc.capability.prior_change_allowed = c.get("prior_change_allowed", false);
  sc.capability.controllable_fraction = detail::parse_label_pair(c.sub("controllable_fraction"));
  if (c.has("max_modified_features")) sc.capability.max_modified_features = c.get<std::size_t>("max_modified_features", 0);

  const auto s = r.sub("strategy");
  s.reject_unknown({"prior_override", "attacked_fraction", "generator", "trait"});
  if (s.has("prior_override")) sc.strategy.prior_override = s.get<double>("prior_override", 0.0);
  const auto af = s.sub("attacked_fraction");
  af.reject_unknown({"training", "testing"});
  sc.strategy.attacked_fraction[index_of(Phase::Training)] = detail::parse_label_pair(af.sub("training"));
  sc.strategy.attacked_fraction[index_of(Phase::Testing)] = detail::parse_label_pair(af.sub("testing"));
  sc.strategy.generator = detail::parse_enum(detail::kGenerators, s.get<std::string>("generator", "none"), "generator");
  sc.strategy.trait = detail::parse_enum(detail::kTraits, s.get<std::string>("trait", "fingerprint"), "trait");

  const auto st = r.sub("strength");
  st.reject_unknown({"name", "values", "range"});
  sc.strength.name = st.get<std::string>("name", "strength");
  sc.strength.values = detail::parse_strength_values(st);
  return sc;
}

inline ScenarioConfig parse_config(const nlohmann::json& j) {
  const detail::Reader r(j, "config");
  r.reject_unknown({"version", "name", "seed", "data", "classifiers", "attack", "evaluation", "output"});
  ScenarioConfig cfg;
  cfg.version = static_cast<int>(r.require<std::size_t>("version"));
  if (cfg.version != kConfigVersion)
    throw ConfigError("config.version: unsupported version " + std::to_string(cfg.version) + " (expected " +
                      std::to_string(kConfigVersion) + ")");
  cfg.name = r.get<std::string>("name", "");
  cfg.seed = r.get<std::uint64_t>("seed", 1);

  const auto d = r.sub("data");
  d.reject_unknown({"source", "path", "test_path", "dimension", "samples", "prior_malicious", "n_legitimate",
                    "n_malicious", "vocab_size", "resampling", "train_size", "test_size"});
  auto& dc = cfg.data;
  dc.source = detail::parse_enum(detail::kSources, d.require<std::string>("source"), "data source");
  dc.path = d.get<std::string>("path", "");
  dc.test_path = d.get<std::string>("test_path", "");
  dc.dimension = d.get<std::size_t>("dimension", 200);
  dc.samples = d.get<std::size_t>("samples", 2000);
  dc.prior_malicious = d.get<double>("prior_malicious", 0.5);
  dc.n_legitimate = d.get<std::size_t>("n_legitimate", 500);
  dc.n_malicious = d.get<std::size_t>("n_malicious", 100);
  dc.vocab_size = d.get<std::size_t>("vocab_size", 1000);
  const auto rs = d.sub("resampling");
  rs.reject_unknown({"method", "k", "split_index"});
  dc.resampling = detail::parse_enum(detail::kResampling, rs.get<std::string>("method", "cross_validation"), "resampling");
  dc.folds = rs.get<std::size_t>("k", 5);
  dc.split_index = rs.get<std::size_t>("split_index", 0);
  dc.train_size = detail::parse_size_spec(d.sub("train_size"));
  dc.test_size = detail::parse_size_spec(d.sub("test_size"));

  const bool needs_path = dc.source == DataSource::EmailCorpus || dc.source == DataSource::ScoreTable ||
                          dc.source == DataSource::Payloads || dc.source == DataSource::Tabular;
  if (needs_path && dc.path.empty()) throw ConfigError("config.data.path: required for this data source");
  if (!(dc.prior_malicious >= 0.0 && dc.prior_malicious <= 1.0))
    throw ConfigError("config.data.prior_malicious: must lie in [0, 1]");
  if (dc.vocab_size == 0) throw ConfigError("config.data.vocab_size: must be positive");
  if ((dc.resampling == ResampleKind::CrossValidation || dc.resampling == ResampleKind::Bootstrap) && dc.folds == 0)
    throw ConfigError("config.data.resampling.k: must be positive");
  if (dc.resampling == ResampleKind::Chronological && dc.split_index == 0)
    throw ConfigError("config.data.resampling.split_index: required for chronological resampling");
  const bool split_source = dc.source == DataSource::SyntheticTraffic || !dc.test_path.empty();
  if (dc.resampling == ResampleKind::FixedSplit && !split_source)
    throw ConfigError("config.data.resampling: fixed_split needs a source with separate training and testing data");
  if (split_source && dc.resampling != ResampleKind::FixedSplit)
    throw ConfigError("config.data.resampling: a source with separate training and testing data needs fixed_split");
  if (dc.source == DataSource::EmailCorpus && dc.resampling != ResampleKind::Chronological)
    throw ConfigError(
        "config.data.resampling: email corpora need chronological resampling (features are selected on the "
        "training part only)");

  if (!r.has("classifiers") || !r.raw("classifiers").is_array() || r.raw("classifiers").empty())
    throw ConfigError("config.classifiers: expected a nonempty array");
  for (std::size_t i = 0; i < r.raw("classifiers").size(); ++i)
    cfg.classifiers.push_back(
        parse_classifier(r.raw("classifiers")[i], "config.classifiers[" + std::to_string(i) + "]"));

  if (!r.has("attack")) throw ConfigError("config.attack: missing required section");
  cfg.attack = parse_attack(r.raw("attack"));

  const auto e = r.sub("evaluation");
  e.reject_unknown({"metric", "gar", "repetitions", "jobs", "train_construction", "test_construction", "keep_roc"});
  const auto metric = e.get<std::string>("metric", "auc10");
  if (metric == "auc10") {
    cfg.evaluation.metric.kind = MetricKind::Auc10;
  } else if (metric == "far_at_gar") {
    cfg.evaluation.metric.kind = MetricKind::FarAtGar;
    cfg.evaluation.metric.gar = e.get<double>("gar", 0.9);
    if (!(cfg.evaluation.metric.gar > 0.0 && cfg.evaluation.metric.gar <= 1.0))
      throw ConfigError("config.evaluation.gar: must lie in (0, 1]");
  } else {
    throw ConfigError("config.evaluation.metric: unknown metric '" + metric + "' (expected auc10 or far_at_gar)");
  }
  cfg.evaluation.repetitions = e.get<std::size_t>("repetitions", 1);
  if (cfg.evaluation.repetitions == 0) throw ConfigError("config.evaluation.repetitions: must be positive");
  cfg.evaluation.jobs = e.get<std::size_t>("jobs", 1);
  if (e.has("train_construction"))
    cfg.evaluation.train_construction =
        detail::parse_enum(detail::kConstructions, e.get<std::string>("train_construction", ""), "set construction");
  if (e.has("test_construction"))
    cfg.evaluation.test_construction =
        detail::parse_enum(detail::kConstructions, e.get<std::string>("test_construction", ""), "set construction");
  cfg.evaluation.keep_roc = e.get("keep_roc", false);

  const auto o = r.sub("output");
  o.reject_unknown({"directory", "formats"});
  cfg.output.directory = o.get<std::string>("directory", "out");
  if (o.has("formats")) {
    cfg.output.formats.clear();
    for (const auto& f : o.raw("formats")) {
      auto s = detail::Reader::as<std::string>(f, "config.output.formats");
      if (s != "csv" && s != "json" && s != "svg")
        throw ConfigError("config.output.formats: unknown format '" + s + "' (expected csv, json or svg)");
      cfg.output.formats.push_back(std::move(s));
    }
  }
  return cfg;
}

inline ScenarioConfig parse_config_text(const std::string& text, const std::string& source = "config") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source + ": invalid JSON: " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// config -> JSON

inline nlohmann::json classifier_json(const ClassifierConfig& c) {
  nlohmann::json j{{"label", c.label}, {"family", detail::enum_name(detail::kFamilies, c.family)}};
  switch (c.family) {
    case Family::LinearSvm:
      j["c"] = c.c;
      if (!c.c_grid.empty()) j["c_grid"] = c.c_grid;
      j["cv_folds"] = c.cv_folds;
      j["tolerance"] = c.tolerance;
      break;
    case Family::LogisticRegression:
      j["learning_rate"] = c.logistic.initial_rate;
      j["decay_steps"] = c.logistic.decay_steps;
      j["epochs"] = c.logistic.epochs;
      break;
    case Family::OneClassSvm:
      j["nu"] = c.nu;
      j["gamma"] = c.gamma;
      j["tolerance"] = c.tolerance;
      break;
    case Family::LlrFusion:
      j["threshold"] = c.fusion_threshold;
      break;
  }
  return j;
}

inline nlohmann::json attack_json(const AttackScenario& sc) {
  using detail::enum_name;
  nlohmann::json cap{{"affects_training", sc.capability.affects_training},
                     {"affects_testing", sc.capability.affects_testing},
                     {"prior_change_allowed", sc.capability.prior_change_allowed},
                     {"controllable_fraction", detail::label_pair(sc.capability.controllable_fraction)}};
  if (sc.capability.max_modified_features) cap["max_modified_features"] = *sc.capability.max_modified_features;
  nlohmann::json strat{
      {"attacked_fraction",
       {{"training", detail::label_pair(sc.strategy.attacked_fraction[index_of(Phase::Training)])},
        {"testing", detail::label_pair(sc.strategy.attacked_fraction[index_of(Phase::Testing)])}}},
      {"generator", enum_name(detail::kGenerators, sc.strategy.generator)},
      {"trait", enum_name(detail::kTraits, sc.strategy.trait)}};
  if (sc.strategy.prior_override) strat["prior_override"] = *sc.strategy.prior_override;
  return {{"name", sc.name},
          {"influence", enum_name(detail::kInfluences, sc.influence)},
          {"violation", enum_name(detail::kViolations, sc.violation)},
          {"specificity", enum_name(detail::kSpecificities, sc.specificity)},
          {"knowledge",
           {{"training_data", sc.knowledge.training_data},
            {"feature_set", sc.knowledge.feature_set},
            {"algorithm", sc.knowledge.algorithm},
            {"parameters", sc.knowledge.parameters},
            {"feedback", sc.knowledge.feedback}}},
          {"capability", cap},
          {"strategy", strat},
          {"strength", {{"name", sc.strength.name}, {"values", sc.strength.values}}}};
}

inline nlohmann::json config_json(const ScenarioConfig& cfg) {
  using detail::enum_name;
  const auto& dc = cfg.data;
  nlohmann::json data{{"source", enum_name(detail::kSources, dc.source)}};
  switch (dc.source) {
    case DataSource::SyntheticSpam:
      data["dimension"] = dc.dimension;
      data["samples"] = dc.samples;
      data["prior_malicious"] = dc.prior_malicious;
      break;
    case DataSource::SyntheticScores:
    case DataSource::SyntheticTraffic:
      data["n_legitimate"] = dc.n_legitimate;
      data["n_malicious"] = dc.n_malicious;
      break;
    case DataSource::EmailCorpus:
      data["vocab_size"] = dc.vocab_size;
      [[fallthrough]];
    default:
      data["path"] = dc.path;
      if (!dc.test_path.empty()) data["test_path"] = dc.test_path;
      break;
  }
  nlohmann::json rs{{"method", enum_name(detail::kResampling, dc.resampling)}};
  if (dc.resampling == ResampleKind::CrossValidation || dc.resampling == ResampleKind::Bootstrap) rs["k"] = dc.folds;
  if (dc.resampling == ResampleKind::Chronological) rs["split_index"] = dc.split_index;
  data["resampling"] = rs;
  data["train_size"] = detail::size_json(dc.train_size);
  data["test_size"] = detail::size_json(dc.test_size);

  nlohmann::json classifiers = nlohmann::json::array();
  for (const auto& c : cfg.classifiers) classifiers.push_back(classifier_json(c));

  nlohmann::json eval{{"repetitions", cfg.evaluation.repetitions},
                      {"jobs", cfg.evaluation.jobs},
                      {"keep_roc", cfg.evaluation.keep_roc}};
  if (cfg.evaluation.metric.kind == MetricKind::Auc10) {
    eval["metric"] = "auc10";
  } else {
    eval["metric"] = "far_at_gar";
    eval["gar"] = cfg.evaluation.metric.gar;
  }
  if (cfg.evaluation.train_construction)
    eval["train_construction"] = enum_name(detail::kConstructions, *cfg.evaluation.train_construction);
  if (cfg.evaluation.test_construction)
    eval["test_construction"] = enum_name(detail::kConstructions, *cfg.evaluation.test_construction);

  return {{"version", cfg.version},
          {"name", cfg.name},
          {"seed", cfg.seed},
          {"data", data},
          {"classifiers", classifiers},
          {"attack", attack_json(cfg.attack)},
          {"evaluation", eval},
          {"output", {{"directory", cfg.output.directory}, {"formats", cfg.output.formats}}}};
}

inline std::string serialize_config(const ScenarioConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

/// Problems that make the config unusable beyond what parsing catches.
inline std::vector<std::string> check_config(const ScenarioConfig& cfg) {
  std::vector<std::string> out = check_scenario_consistency(cfg.attack);
  for (const auto& c : cfg.classifiers) {
    if (cfg.attack.strategy.generator == GeneratorKind::GwiBwo && c.family != Family::LinearSvm &&
        c.family != Family::LogisticRegression)
      out.push_back("classifier '" + c.label + "': gwi_bwo attacks linear classifiers only");
    if (c.family == Family::LlrFusion && cfg.data.source != DataSource::SyntheticScores &&
        cfg.data.source != DataSource::ScoreTable && cfg.data.source != DataSource::Tabular)
      out.push_back("classifier '" + c.label + "': llr_fusion needs 2-D score data");
  }
  if (std::find(cfg.attack.strength.values.begin(), cfg.attack.strength.values.end(), 0.0) ==
      cfg.attack.strength.values.end())
    out.push_back("attack strength values must include 0");
  return out;
}

}  // namespace clfsec
