// clfsec: security evaluation of pattern classifiers under simulated attacks.
//
//   clfsec prepare  --scenario spam_gwi_bwo --out out/spam
//   clfsec evaluate --config my.json --seed 7 --jobs 4
//   clfsec report   out/a/report.json out/b/report.json --out figures
//   clfsec validate --config my.json
//
// Exit status: 0 on success, 1 on runtime failure, 2 on configuration or
// input errors.

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "canned_scenarios.hpp"
#include "clfsec/clfsec.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> jobs;
  std::vector<std::string> reports;
};

bool use_color() { return std::getenv("CLFSEC_NO_COLOR") == nullptr && isatty(STDERR_FILENO); }

void print_error(const std::string& stage, const std::string& what) {
  if (use_color()) std::cerr << "\033[1;31merror\033[0m";
  else std::cerr << "error";
  std::cerr << " [" << stage << "]: " << what << "\n";
}

void print_warning(const std::string& what) {
  if (use_color()) std::cerr << "\033[33mwarning\033[0m";
  else std::cerr << "warning";
  std::cerr << ": " << what << "\n";
}

struct LoadedConfig {
  clfsec::ScenarioConfig cfg;
  fs::path base;  // directory for relative input paths
};

LoadedConfig load_config(const Options& o) {
  if (o.config.empty() == o.scenario.empty())
    throw clfsec::ConfigError("exactly one of --config or --scenario is required");
  LoadedConfig out;
  if (!o.scenario.empty()) {
    std::string names;
    for (const auto& [name, text] : clfsec_cli::kCannedScenarios) {
      if (name == o.scenario) {
        out.cfg = clfsec::parse_config_text(std::string(text), "scenario " + o.scenario);
        out.base = fs::current_path();
        break;
      }
      names += (names.empty() ? "" : ", ") + std::string(name);
    }
    if (out.cfg.classifiers.empty())
      throw clfsec::ConfigError("unknown scenario '" + o.scenario + "' (available: " + names + ")");
  } else {
    out.cfg = clfsec::parse_config_text(clfsec::read_text_file(o.config), o.config);
    out.base = fs::absolute(o.config).parent_path();
  }
  if (o.seed) out.cfg.seed = *o.seed;
  if (!o.out.empty()) out.cfg.output.directory = o.out;
  if (o.jobs) out.cfg.evaluation.jobs = *o.jobs;
  return out;
}

void emit(const std::string& key, const std::string& value) { std::cout << key << "=" << value << "\n"; }

clfsec::PreparedData prepare(const LoadedConfig& lc, const fs::path& dir) {
  clfsec::PreparedData data = clfsec::ingest(lc.cfg, lc.base);
  for (const auto& w : data.warnings) print_warning(w);
  const auto manifest = clfsec::write_prepared(data, lc.cfg, dir);
  emit("prepared", dir.string());
  for (const auto& [name, hash] : manifest.at("files").items()) emit("sha256." + name, hash.get<std::string>());
  emit("skipped_documents", std::to_string(data.skipped));
  return data;
}

int cmd_prepare(const Options& o) {
  const LoadedConfig lc = load_config(o);
  prepare(lc, lc.cfg.output.directory);
  return 0;
}

int cmd_evaluate(const Options& o, bool sweep) {
  const LoadedConfig lc = load_config(o);
  if (sweep && lc.cfg.attack.strength.values.size() < 2)
    throw clfsec::ConfigError("sweep needs at least two attack strength values");
  if (auto problems = clfsec::check_config(lc.cfg); !problems.empty()) {
    std::string msg = "inconsistent scenario:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw clfsec::ConfigError(msg);
  }
  const fs::path dir = lc.cfg.output.directory;
  std::optional<clfsec::PreparedData> data;
  if (fs::exists(dir / clfsec::kManifestName)) {
    const auto manifest = nlohmann::json::parse(clfsec::read_text_file(dir / clfsec::kManifestName));
    if (manifest.value("config_sha256", "") == clfsec::sha256_hex(clfsec::serialize_config(lc.cfg)))
      data = clfsec::read_prepared(dir);
  }
  if (!data) data = prepare(lc, dir);
  const auto result = clfsec::evaluate_to_directory(lc.cfg, *data, dir);
  for (const auto& f : result.files) emit("wrote", (dir / f).string());
  for (const auto& line : result.summary) std::cout << line << "\n";
  return 0;
}

int cmd_report(const Options& o) {
  std::vector<clfsec::LoadedReport> reports;
  for (const auto& p : o.reports) reports.push_back(clfsec::load_report(p));
  const fs::path dir = o.out.empty() ? fs::path("report") : fs::path(o.out);
  const auto bundle = clfsec::merge_reports(reports, dir);
  for (const auto& f : bundle.files) emit("wrote", (dir / f).string());
  return 0;
}

int cmd_validate(const Options& o) {
  const LoadedConfig lc = load_config(o);
  const auto problems = clfsec::check_config(lc.cfg);
  for (const auto& p : problems) print_error("validate", p);
  if (!problems.empty()) return 2;
  emit("valid", "true");
  emit("classifiers", std::to_string(lc.cfg.classifiers.size()));
  emit("strength_values", std::to_string(lc.cfg.attack.strength.values.size()));
  return 0;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "Scenario config file (JSON)");
  cmd->add_option("--scenario", o.scenario, "Canned scenario name");
  cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", o.out, "Output directory (overrides the config)");
  cmd->add_option("--jobs", o.jobs, "Concurrent work items")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Security evaluation of pattern classifiers under attack"};
  app.require_subcommand(1);
  Options o;
  auto* prep = app.add_subcommand("prepare", "Ingest data and write canonical dataset files");
  auto* eval = app.add_subcommand("evaluate", "Run the security evaluation and write curves and a report");
  auto* sweep = app.add_subcommand("sweep", "Alias of evaluate for several attack strengths");
  auto* report = app.add_subcommand("report", "Merge reports into plot data");
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  for (auto* c : {prep, eval, sweep, validate}) add_common(c, o);
  report->add_option("reports", o.reports, "Report files")->required();
  report->add_option("--out", o.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string stage = "clfsec";
  try {
    if (prep->parsed()) return stage = "prepare", cmd_prepare(o);
    if (eval->parsed()) return stage = "evaluate", cmd_evaluate(o, false);
    if (sweep->parsed()) return stage = "sweep", cmd_evaluate(o, true);
    if (report->parsed()) return stage = "report", cmd_report(o);
    if (validate->parsed()) return stage = "validate", cmd_validate(o);
  } catch (const clfsec::ConfigError& e) {
    print_error(stage, e.what());
    return 2;
  } catch (const clfsec::InputError& e) {
    print_error(stage, e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error(stage, e.what());
    return 1;
  }
  return 1;
}
