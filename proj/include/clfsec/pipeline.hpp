#pragma once

// The four evaluation steps as file-level operations: ingest and write the
// canonical datasets, run the security sweeps, and merge reports into
// plot-ready tables and SVG renderings.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "clfsec/config.hpp"
#include "clfsec/evaluation.hpp"
#include "clfsec/ingestion.hpp"
#include "clfsec/synthetic.hpp"

namespace clfsec {

namespace fs = std::filesystem;

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  return encode_hex(std::span<const std::uint8_t>(digest, len));
}

// ---------------------------------------------------------------------------
// Step 2a: ingestion

/// D as a single set, or as a fixed (D_TR, D_TS) pair.
struct PreparedData {
  std::optional<Dataset> dataset;
  std::optional<FoldPair> split;
  std::optional<Vocabulary> vocabulary;
  std::vector<std::string> warnings;
  std::size_t skipped = 0;
};

inline fs::path resolve_input(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

/// Relative input paths are resolved against `base` (the config file's directory).
inline PreparedData ingest(const ScenarioConfig& cfg, const fs::path& base) {
  const auto& dc = cfg.data;
  const std::uint64_t seed = derive_seed(cfg.seed, Stream::Synthetic);
  PreparedData out;
  switch (dc.source) {
    case DataSource::SyntheticSpam:
      out.dataset = synthetic_spam(dc.dimension, dc.samples, dc.prior_malicious, seed);
      break;
    case DataSource::SyntheticScores:
      out.dataset = synthetic_scores(dc.n_legitimate, dc.n_malicious, seed);
      break;
    case DataSource::SyntheticTraffic:
      out.split = FoldPair{synthetic_traffic(dc.n_legitimate, 0, derive_seed(seed, {1})),
                           synthetic_traffic(dc.n_legitimate, dc.n_malicious, derive_seed(seed, {2}))};
      break;
    case DataSource::EmailCorpus: {
      const EmailCorpus corpus = load_email_corpus(resolve_input(base, dc.path));
      out.warnings = corpus.warnings;
      out.skipped = corpus.skipped;
      const std::size_t n = corpus.documents.size();
      if (dc.split_index == 0 || dc.split_index >= n)
        throw ConfigError("config.data.resampling.split_index: must lie in [1, " + std::to_string(n) +
                          ") for a corpus of " + std::to_string(n) + " readable documents");
      const std::span<const TokenSet> docs(corpus.documents);
      const std::span<const Label> labels(corpus.labels);
      out.vocabulary = information_gain_select(docs.first(dc.split_index), labels.first(dc.split_index),
                                               dc.vocab_size, &out.warnings);
      out.split = FoldPair{vectorize_corpus(docs.first(dc.split_index), labels.first(dc.split_index), *out.vocabulary),
                           vectorize_corpus(docs.subspan(dc.split_index), labels.subspan(dc.split_index),
                                            *out.vocabulary)};
      break;
    }
    case DataSource::ScoreTable:
      out.dataset = load_scores(resolve_input(base, dc.path)).data;
      break;
    case DataSource::Payloads:
    case DataSource::Tabular: {
      const auto load = [&](const std::string& p) {
        return dc.source == DataSource::Payloads ? load_payloads(resolve_input(base, p))
                                                 : load_tabular(resolve_input(base, p));
      };
      if (dc.test_path.empty()) out.dataset = load(dc.path);
      else out.split = FoldPair{load(dc.path), load(dc.test_path)};
      break;
    }
  }
  if (out.split && out.split->train.dimension() != out.split->test.dimension())
    throw Error("training and testing data have different dimensions");
  return out;
}

// ---------------------------------------------------------------------------
// Step 2b: canonical files and manifest

inline constexpr const char* kManifestName = "manifest.json";

/// Writes dataset.csv (or train.csv and test.csv), vocabulary.txt for
/// email corpora, and a manifest with the SHA-256 of every file.
inline nlohmann::json write_prepared(const PreparedData& data, const ScenarioConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  std::map<std::string, std::string> files;
  const auto emit = [&](const std::string& name, const std::string& text) {
    write_text_file(dir / name, text);
    files[name] = sha256_hex(text);
  };
  if (data.dataset) emit("dataset.csv", dense_csv(*data.dataset));
  if (data.split) {
    emit("train.csv", dense_csv(data.split->train));
    emit("test.csv", dense_csv(data.split->test));
  }
  if (data.vocabulary) {
    std::string text;
    for (std::size_t i = 0; i < data.vocabulary->size(); ++i)
      text += data.vocabulary->terms[i] + "\t" + detail::format_real(data.vocabulary->gains[i]) + "\n";
    emit("vocabulary.txt", text);
  }
  nlohmann::json manifest{{"format", "clfsec-manifest"},
                          {"version", 1},
                          {"config_sha256", sha256_hex(serialize_config(cfg))},
                          {"layout", data.split ? "split" : "single"},
                          {"files", files},
                          {"skipped_documents", data.skipped},
                          {"warnings", data.warnings}};
  write_text_file(dir / kManifestName, manifest.dump(2) + "\n");
  return manifest;
}

/// Reads the files listed in a manifest, checking their hashes.
inline PreparedData read_prepared(const fs::path& dir) {
  const fs::path mpath = dir / kManifestName;
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text_file(mpath));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(mpath.string(), std::string("invalid manifest: ") + e.what());
  }
  PreparedData out;
  const auto load = [&](const std::string& name) {
    const std::string text = read_text_file(dir / name);
    const auto& files = manifest.at("files");
    if (!files.contains(name) || files.at(name).get<std::string>() != sha256_hex(text))
      throw InputError((dir / name).string(), "content hash does not match the manifest");
    std::istringstream in(text);
    return parse_dense_csv(in, (dir / name).string());
  };
  if (manifest.value("layout", "single") == "split") out.split = FoldPair{load("train.csv"), load("test.csv")};
  else out.dataset = load("dataset.csv");
  return out;
}

// ---------------------------------------------------------------------------
// Steps 3-4: TR/TS construction and evaluation

inline FoldSet fold_set(const ScenarioConfig& cfg, const PreparedData& data) {
  if (data.split) {
    FoldSet f;
    f.pairs.push_back(*data.split);
    return f;
  }
  const Dataset& d = *data.dataset;
  const std::uint64_t seed = cfg.seed;
  switch (cfg.data.resampling) {
    case ResampleKind::CrossValidation:
      return resample(d, CrossValidation{cfg.data.folds}, seed);
    case ResampleKind::Bootstrap:
      return resample(d, Bootstrap{cfg.data.folds}, seed);
    case ResampleKind::Chronological:
      return resample(d, Chronological{cfg.data.split_index}, seed);
    case ResampleKind::FixedSplit:
      break;
  }
  throw ConfigError("fixed_split resampling needs prepared training and testing files");
}

inline SweepOptions sweep_options(const ScenarioConfig& cfg) {
  SweepOptions o;
  o.metric = cfg.evaluation.metric;
  o.train_construction = cfg.evaluation.train_construction.value_or(SetConstruction::Sample);
  o.test_construction = cfg.evaluation.test_construction.value_or(SetConstruction::Transform);
  o.train_size = cfg.data.train_size;
  o.test_size = cfg.data.test_size;
  o.repetitions = cfg.evaluation.repetitions;
  o.seed = cfg.seed;
  o.jobs = cfg.evaluation.jobs;
  o.keep_roc = cfg.evaluation.keep_roc;
  return o;
}

inline std::vector<SecurityCurve> run_evaluation(const ScenarioConfig& cfg, const PreparedData& data) {
  if (auto problems = check_config(cfg); !problems.empty()) {
    std::string msg = "inconsistent scenario:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
  const FoldSet folds = fold_set(cfg, data);
  const SweepOptions opt = sweep_options(cfg);
  std::vector<SecurityCurve> curves;
  for (const auto& c : cfg.classifiers) {
    try {
      curves.push_back(security_sweep(folds, cfg.attack, c, cfg.attack.strength.values, opt));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw Error("classifier '" + c.label + "': " + e.what());
    }
  }
  return curves;
}

inline const char* roc_axis_x(RocMode m) { return m == RocMode::Detection ? "fp_rate" : "far"; }
inline const char* roc_axis_y(RocMode m) { return m == RocMode::Detection ? "tp_rate" : "gar"; }

inline nlohmann::json report_json(const ScenarioConfig& cfg, const std::vector<SecurityCurve>& curves,
                                  std::size_t folds, double wall_seconds) {
  nlohmann::json jc = nlohmann::json::array();
  nlohmann::json jr = nlohmann::json::array();
  for (const auto& c : curves) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : c.points)
      pts.push_back({{"strength", p.strength}, {"mean", p.mean}, {"std", p.std}, {"k", p.k}, {"values", p.values}});
    jc.push_back({{"series", c.series}, {"points", pts}});
    for (const auto& [s, roc] : c.rocs) {
      nlohmann::json rp = nlohmann::json::array();
      for (const auto& p : roc.points) rp.push_back({p.fpr, p.tpr});
      jr.push_back({{"series", c.series},
                    {"strength", s},
                    {"x", roc_axis_x(roc.mode)},
                    {"y", roc_axis_y(roc.mode)},
                    {"points", rp}});
    }
  }
  return {{"format", "clfsec-report"},
          {"version", 1},
          {"scenario", cfg.attack.name.empty() ? cfg.name : cfg.attack.name},
          {"config", config_json(cfg)},
          {"seed", cfg.seed},
          {"metric", cfg.evaluation.metric.name()},
          {"strength_name", cfg.attack.strength.name},
          {"folds", folds},
          {"repetitions", cfg.evaluation.repetitions},
          {"curves", jc},
          {"rocs", jr},
          {"wall_clock_seconds", wall_seconds}};
}

inline std::string file_stem(std::string s) {
  for (char& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
  return s.empty() ? "series" : s;
}

struct EvaluationOutput {
  std::vector<SecurityCurve> curves;
  std::vector<std::string> files;
  std::vector<std::string> summary;  // key=value lines
};

/// Runs the sweeps and writes curve_<series>.csv and report.json.
inline EvaluationOutput evaluate_to_directory(const ScenarioConfig& cfg, const PreparedData& data, const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  EvaluationOutput out;
  out.curves = run_evaluation(cfg, data);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(dir);
  const auto wants = [&](const char* f) {
    return std::find(cfg.output.formats.begin(), cfg.output.formats.end(), f) != cfg.output.formats.end();
  };
  for (const auto& c : out.curves) {
    if (wants("csv")) {
      const auto name = "curve_" + file_stem(c.series) + ".csv";
      write_text_file(dir / name, curve_csv(c));
      out.files.push_back(name);
    }
  }
  if (wants("json")) {
    const std::size_t folds = data.split ? 1 : fold_set(cfg, data).k();
    write_text_file(dir / "report.json", report_json(cfg, out.curves, folds, wall).dump(2) + "\n");
    out.files.push_back("report.json");
  }

  const bool lower_is_worse = cfg.evaluation.metric.kind == MetricKind::Auc10;
  out.summary.push_back("metric=" + cfg.evaluation.metric.name());
  for (const auto& c : out.curves) {
    const auto key = file_stem(c.series);
    const CurvePoint* clean = nullptr;
    const CurvePoint* worst = &c.points.front();
    for (const auto& p : c.points) {
      if (p.strength == 0.0) clean = &p;
      if (lower_is_worse ? p.mean < worst->mean : p.mean > worst->mean) worst = &p;
    }
    out.summary.push_back(key + ".clean=" + detail::format_real(clean->mean));
    out.summary.push_back(key + ".worst=" + detail::format_real(worst->mean));
    out.summary.push_back(key + ".worst_" + file_stem(c.strength_name) + "=" + detail::format_real(worst->strength));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report merging

struct LoadedReport {
  std::string path;
  nlohmann::json doc;
};

inline LoadedReport load_report(const fs::path& path) {
  LoadedReport r{path.string(), {}};
  try {
    r.doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string(), std::string("invalid report: ") + e.what());
  }
  if (r.doc.value("format", "") != "clfsec-report") throw InputError(path.string(), "not a clfsec report");
  return r;
}

namespace detail {

struct Series {
  std::string name;
  std::map<double, std::pair<double, double>> points;  // strength -> (mean, std)
};

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct SvgLine {
  std::string name;
  std::vector<std::pair<double, double>> xy;
};

/// Minimal line chart; `log_x` maps x through log10 (non-positive x dropped).
inline std::string svg_chart(const std::vector<SvgLine>& lines, const std::string& xlabel, const std::string& ylabel,
                             bool log_x) {
  constexpr double W = 640, H = 420, L = 70, R = 170, T = 20, B = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  const auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
  for (const auto& l : lines)
    for (auto [x, y] : l.xy) {
      if (log_x && !(x > 0.0)) continue;
      x0 = std::min(x0, tx(x));
      x1 = std::max(x1, tx(x));
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  y0 = std::min(y0, 0.0);
  const auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  char buf[256];
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" font-family=\"sans-serif\" "
                  "font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<path d=\"M%g %g V%g H%g\" fill=\"none\" stroke=\"black\"/>\n", L, T, H - B, W - R);
  s += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">", (L + W - R) / 2, H - 12);
  s += buf + svg_escape(xlabel + (log_x ? " (log scale)" : "")) + "</text>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"14\" y=\"%g\" transform=\"rotate(-90 14 %g)\" text-anchor=\"middle\">",
                (T + H - B) / 2, (T + H - B) / 2);
  s += buf + svg_escape(ylabel) + "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%.3g</text>\n",
                  L + (xv - x0) / (x1 - x0) * (W - L - R), H - B + 16, log_x ? std::pow(10.0, xv) : xv);
    s += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.3g</text>\n", L - 6, py(yv) + 4, yv);
    s += buf;
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    std::string d;
    for (auto [x, y] : lines[i].xy) {
      if (log_x && !(x > 0.0)) continue;
      std::snprintf(buf, sizeof buf, "%s%.2f %.2f", d.empty() ? "M" : " L", px(x), py(y));
      d += buf;
    }
    s += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" fill=\"%s\">", W - R + 10, T + 16.0 * (i + 1), color);
    s += buf + svg_escape(lines[i].name) + "</text>\n";
  }
  return s + "</svg>\n";
}

}  // namespace detail

struct ReportBundle {
  std::vector<std::string> files;
};

/// Merges reports that share a metric into security_curves.csv (strength,
/// then mean and std columns per series over the union of strength values;
/// missing points are left empty), roc.csv, plots.json with axis hints, and
/// SVG renderings.
inline ReportBundle merge_reports(const std::vector<LoadedReport>& reports, const fs::path& dir) {
  if (reports.empty()) throw ConfigError("report: no report files given");
  const std::string metric = reports.front().doc.value("metric", "");
  std::string conflicts;
  for (const auto& r : reports)
    if (r.doc.value("metric", "") != metric)
      conflicts += "\n  " + r.path + ": " + r.doc.value("metric", "") + " (expected " + metric + ")";
  if (!conflicts.empty()) throw Error("report: mismatched metrics:" + conflicts);

  std::vector<detail::Series> series;
  std::set<std::string> names;
  std::set<double> grid;
  std::string strength_name = reports.front().doc.value("strength_name", "strength");
  struct Roc {
    std::string name, x, y;
    std::vector<std::pair<double, double>> pts;
  };
  std::vector<Roc> rocs;
  for (const auto& r : reports) {
    const std::string scenario = r.doc.value("scenario", "");
    for (const auto& c : r.doc.at("curves")) {
      detail::Series s;
      s.name = c.at("series").get<std::string>();
      if (names.contains(s.name)) s.name = scenario + ":" + s.name;
      for (int dup = 2; names.contains(s.name); ++dup) s.name = c.at("series").get<std::string>() + "#" + std::to_string(dup);
      names.insert(s.name);
      for (const auto& p : c.at("points")) {
        const double x = p.at("strength").get<double>();
        s.points[x] = {p.at("mean").get<double>(), p.at("std").get<double>()};
        grid.insert(x);
      }
      series.push_back(std::move(s));
    }
    for (const auto& c : r.doc.value("rocs", nlohmann::json::array())) {
      Roc roc{c.at("series").get<std::string>() + " @ " + detail::format_real(c.at("strength").get<double>()),
              c.at("x").get<std::string>(), c.at("y").get<std::string>(), {}};
      if (!scenario.empty()) roc.name = scenario + ": " + roc.name;
      for (const auto& p : c.at("points")) roc.pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      rocs.push_back(std::move(roc));
    }
  }

  fs::create_directories(dir);
  ReportBundle out;
  std::string csv = "strength";
  for (const auto& s : series) csv += "," + s.name + "_mean," + s.name + "_std";
  csv += "\n";
  for (double x : grid) {
    csv += detail::format_real(x);
    for (const auto& s : series) {
      const auto it = s.points.find(x);
      if (it == s.points.end()) csv += ",,";
      else csv += "," + detail::format_real(it->second.first) + "," + detail::format_real(it->second.second);
    }
    csv += "\n";
  }
  write_text_file(dir / "security_curves.csv", csv);
  out.files.push_back("security_curves.csv");

  std::vector<detail::SvgLine> lines;
  for (const auto& s : series) {
    detail::SvgLine l{s.name, {}};
    for (const auto& [x, v] : s.points) l.xy.emplace_back(x, v.first);
    lines.push_back(std::move(l));
  }
  write_text_file(dir / "security_curves.svg", detail::svg_chart(lines, strength_name, metric, false));
  out.files.push_back("security_curves.svg");

  nlohmann::json figures = nlohmann::json::array();
  figures.push_back({{"file", "security_curves.csv"},
                     {"svg", "security_curves.svg"},
                     {"x", strength_name},
                     {"y", metric},
                     {"x_scale", "linear"}});

  if (!rocs.empty()) {
    std::string rcsv = "curve," + rocs.front().x + "," + rocs.front().y + "\n";
    std::vector<detail::SvgLine> rl;
    for (const auto& r : rocs) {
      for (auto [x, y] : r.pts) rcsv += "\"" + r.name + "\"," + detail::format_real(x) + "," + detail::format_real(y) + "\n";
      rl.push_back({r.name, r.pts});
    }
    const bool log_x = rocs.front().x == "far";
    write_text_file(dir / "roc.csv", rcsv);
    write_text_file(dir / "roc.svg", detail::svg_chart(rl, rocs.front().x, rocs.front().y, log_x));
    out.files.push_back("roc.csv");
    out.files.push_back("roc.svg");
    figures.push_back({{"file", "roc.csv"},
                       {"svg", "roc.svg"},
                       {"x", rocs.front().x},
                       {"y", rocs.front().y},
                       {"x_scale", log_x ? "log" : "linear"}});
  }
  write_text_file(dir / "plots.json", nlohmann::json{{"figures", figures}}.dump(2) + "\n");
  out.files.push_back("plots.json");
  return out;
}

}  // namespace clfsec
