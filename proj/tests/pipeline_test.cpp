#include <filesystem>

#include <gtest/gtest.h>

#include "clfsec/pipeline.hpp"

using namespace clfsec;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("clfsec_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ScenarioConfig small_spam() {
  return parse_config_text(R"({
    "version": 1, "name": "small", "seed": 9,
    "data": { "source": "synthetic_spam", "dimension": 20, "samples": 150, "prior_malicious": 0.5,
              "resampling": { "method": "cross_validation", "k": 3 } },
    "classifiers": [ { "label": "svm", "family": "linear_svm", "c": 1 } ],
    "attack": {
      "name": "small_gwi_bwo", "influence": "exploratory",
      "knowledge": { "feature_set": true, "algorithm": true, "parameters": true },
      "capability": { "affects_testing": true, "controllable_fraction": { "M": 1 } },
      "strategy": { "attacked_fraction": { "testing": { "M": 1 } }, "generator": "gwi_bwo" },
      "strength": { "name": "n_max", "values": [0, 2, 5] }
    }
  })");
}

nlohmann::json report(const std::string& scenario, const std::string& metric, const std::string& series,
                      const std::vector<std::pair<double, double>>& pts) {
  nlohmann::json p = nlohmann::json::array();
  for (auto [s, m] : pts) p.push_back({{"strength", s}, {"mean", m}, {"std", 0.0}});
  return {{"format", "clfsec-report"},
          {"scenario", scenario},
          {"metric", metric},
          {"strength_name", "s"},
          {"curves", {{{"series", series}, {"points", p}}}}};
}

}  // namespace

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(FileStem, ReplacesUnsafeCharacters) {
  EXPECT_EQ(file_stem("svm"), "svm");
  EXPECT_EQ(file_stem("one class/svm:1"), "one_class_svm_1");
  EXPECT_EQ(file_stem(""), "series");
}

TEST(Prepared, WriteReadRoundTrip) {
  const ScenarioConfig cfg = small_spam();
  const fs::path a = scratch("prep_a"), b = scratch("prep_b");
  const PreparedData data = ingest(cfg, {});
  const auto ma = write_prepared(data, cfg, a);
  const auto mb = write_prepared(ingest(cfg, {}), cfg, b);
  EXPECT_EQ(ma, mb);
  EXPECT_EQ(read_text_file(a / "dataset.csv"), read_text_file(b / "dataset.csv"));
  const PreparedData back = read_prepared(a);
  ASSERT_TRUE(back.dataset.has_value());
  EXPECT_EQ(*back.dataset, *data.dataset);
  EXPECT_EQ(ma.at("files").at("dataset.csv").get<std::string>(), sha256_hex(read_text_file(a / "dataset.csv")));
}

TEST(Prepared, TamperedFileIsRejected) {
  const ScenarioConfig cfg = small_spam();
  const fs::path dir = scratch("tamper");
  write_prepared(ingest(cfg, {}), cfg, dir);
  write_text_file(dir / "dataset.csv", read_text_file(dir / "dataset.csv") + "1");
  try {
    read_prepared(dir);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("content hash"), std::string::npos);
  }
}

TEST(Prepared, SplitSourceWritesTrainAndTest) {
  ScenarioConfig cfg = small_spam();
  cfg.data.source = DataSource::SyntheticTraffic;
  cfg.data.resampling = ResampleKind::FixedSplit;
  cfg.data.n_legitimate = 30;
  cfg.data.n_malicious = 5;
  const fs::path dir = scratch("split");
  const auto m = write_prepared(ingest(cfg, {}), cfg, dir);
  EXPECT_EQ(m.at("layout"), "split");
  const PreparedData back = read_prepared(dir);
  ASSERT_TRUE(back.split.has_value());
  EXPECT_EQ(back.split->train.count(Label::Malicious), 0u);
  EXPECT_EQ(back.split->test.count(Label::Malicious), 5u);
}

TEST(Prepared, EmailSplitIndexOutOfRange) {
  const fs::path dir = scratch("email");
  write_synthetic_email_corpus(dir / "corpus", 8, 1);
  ScenarioConfig cfg = small_spam();
  cfg.data.source = DataSource::EmailCorpus;
  cfg.data.path = "corpus/index";
  cfg.data.resampling = ResampleKind::Chronological;
  cfg.data.split_index = 8;
  EXPECT_THROW(ingest(cfg, dir), ConfigError);
  cfg.data.split_index = 4;
  cfg.data.vocab_size = 5;
  const PreparedData d = ingest(cfg, dir);
  ASSERT_TRUE(d.split.has_value());
  EXPECT_EQ(d.split->train.size(), 4u);
  EXPECT_EQ(d.split->test.dimension(), 5u);
}

TEST(Evaluate, WritesCurvesAndReport) {
  const ScenarioConfig cfg = small_spam();
  const fs::path dir = scratch("evaluate");
  const auto out = evaluate_to_directory(cfg, ingest(cfg, {}), dir);
  EXPECT_EQ(out.files, (std::vector<std::string>{"curve_svm.csv", "report.json"}));
  const auto rep = load_report(dir / "report.json");
  EXPECT_EQ(rep.doc.at("metric"), "auc10");
  EXPECT_EQ(rep.doc.at("folds"), 3);
  EXPECT_EQ(rep.doc.at("curves").at(0).at("points").size(), 3u);
  EXPECT_EQ(read_text_file(dir / "curve_svm.csv"), curve_csv(out.curves.front()));
}

TEST(Evaluate, InconsistentScenarioIsConfigError) {
  ScenarioConfig cfg = small_spam();
  cfg.attack.strength.values = {1.0, 2.0};
  EXPECT_THROW(run_evaluation(cfg, ingest(cfg, {})), ConfigError);
}

TEST(Merge, SingleReportPassesThrough) {
  const fs::path dir = scratch("merge_one");
  const auto files = merge_reports({{"a.json", report("a", "auc10", "svm", {{0, 0.1}, {1, 0.05}})}}, dir).files;
  EXPECT_EQ(files, (std::vector<std::string>{"security_curves.csv", "security_curves.svg", "plots.json"}));
  EXPECT_EQ(read_text_file(dir / "security_curves.csv"),
            "strength,svm_mean,svm_std\n0,0.10000000000000001,0\n1,0.050000000000000003,0\n");
}

TEST(Merge, UnionGridLeavesGaps) {
  const fs::path dir = scratch("merge_two");
  merge_reports({{"a.json", report("a", "auc10", "svm", {{0, 0.5}, {2, 0.25}})},
                 {"b.json", report("b", "auc10", "lr", {{0, 0.5}, {1, 0.75}})}},
                dir);
  EXPECT_EQ(read_text_file(dir / "security_curves.csv"),
            "strength,svm_mean,svm_std,lr_mean,lr_std\n0,0.5,0,0.5,0\n1,,,0.75,0\n2,0.25,0,,\n");
}

TEST(Merge, DuplicateSeriesArePrefixed) {
  const fs::path dir = scratch("merge_dup");
  merge_reports({{"a.json", report("a", "auc10", "svm", {{0, 0.5}})}, {"b.json", report("b", "auc10", "svm", {{0, 0.25}})}},
                dir);
  EXPECT_EQ(read_text_file(dir / "security_curves.csv").substr(0, 46), "strength,svm_mean,svm_std,b:svm_mean,b:svm_std");
}

TEST(Merge, MetricMismatchNamesReports) {
  const fs::path dir = scratch("merge_bad");
  try {
    merge_reports({{"a.json", report("a", "auc10", "svm", {{0, 0.5}})},
                   {"b.json", report("b", "far_at_gar(0.9)", "llr", {{0, 0.5}})}},
                  dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("b.json"), std::string::npos);
  }
  EXPECT_THROW(merge_reports({}, dir), ConfigError);
}

TEST(Merge, RejectsForeignJson) {
  const fs::path dir = scratch("foreign");
  write_text_file(dir / "x.json", "{\"format\": \"other\"}");
  EXPECT_THROW(load_report(dir / "x.json"), InputError);
  write_text_file(dir / "y.json", "not json");
  EXPECT_THROW(load_report(dir / "y.json"), InputError);
}
