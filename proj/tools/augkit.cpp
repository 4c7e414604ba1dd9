// Copyright 2026 The augkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end for the augmentation experiment runner.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "augkit/config.hpp"
#include "augkit/metrics.hpp"
#include "augkit/runner.hpp"

namespace {

using namespace augkit;

enum Exit : int { kOk = 0, kConfig = 2, kStage = 3, kIntegrity = 4 };

struct Globals {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  bool quiet = false;
};

run::ExperimentConfig load(const Globals& g) {
  if (g.config.empty()) throw run::ConfigError({{"MISSING_FIELD", "--config", "a config file is required"}});
  auto cfg = run::load_config(g.config);
  if (g.out) cfg.output_dir = *g.out;
  if (g.seed) cfg.set_run_seed(*g.seed);
  if (g.backend) cfg.backend = *g.backend == "live" ? run::Backend::Live : run::Backend::Mock;
  return cfg;
}

void print_diagnostics(const std::vector<run::Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << run::to_string(d) << '\n';
}

run::ExperimentConfig load_valid(const Globals& g) {
  auto cfg = load(g);
  auto diags = run::validate(cfg);
  if (!diags.empty()) throw run::ConfigError(diags);
  return cfg;
}

void print_sweep(const run::ExperimentConfig& cfg) {
  std::cout << "run directory: " << cfg.output_dir << "/" << run::config_hash(cfg) << "\n";
  std::cout << "  " << run::kBaselineTag << "\n";
  for (const auto& row : cfg.sweep()) std::cout << "  " << row.tag() << "  [" << row.slug() << "]\n";
}

int rows_exit(const std::vector<run::RowResult>& rows) {
  for (const auto& r : rows)
    if (r.status == "failed") return kStage;
  return kOk;
}

int standalone_evaluate(const std::string& predictions, const std::string& test_path, const std::string& tag) {
  auto preds = metrics::read_predictions(predictions);
  std::optional<Corpus> test;
  if (!test_path.empty()) test = load_csv(test_path);
  auto cm = metrics::confusion(preds, test ? &*test : nullptr);
  auto report = metrics::evaluate(cm, tag);
  std::cout << metrics::report_table({report});
  std::cout << "confusion (rows true, cols predicted; Fake, Real): [[" << cm.tp << ", " << cm.fn << "], ["
            << cm.fp << ", " << cm.tn << "]]\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"augkit: LLM paraphrase augmentation experiments for news classification"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Experiment config (JSON)");
  app.add_option("--out", g.out, "Output directory (overrides the config)");
  app.add_option("--seed", g.seed, "Run seed (overrides the config)");
  app.add_option("--backend", g.backend, "Generation backend")->check(CLI::IsMember({"live", "mock"}));
  app.add_flag("-q,--quiet", g.quiet, "Suppress progress output");

  auto* split = app.add_subcommand("split", "Stratified train/test split");
  auto* generate = app.add_subcommand("generate", "Generate paraphrase candidates");
  auto* select = app.add_subcommand("select", "Select K candidates per article for every row");
  auto* plan = app.add_subcommand("plan", "Build augmented training sets");
  auto* train = app.add_subcommand("train-baseline", "Fit the baseline classifier and predict the test set");
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against the test split");
  auto* report = app.add_subcommand("report", "Render the comparison table");
  auto* all = app.add_subcommand("run", "Run every stage");
  auto* validate = app.add_subcommand("validate", "Check the config and print the planned sweep");

  std::string preds_path, test_path, tag = "predictions";
  evaluate->add_option("--predictions", preds_path, "Score a predictions CSV without a run directory");
  evaluate->add_option("--test", test_path, "Test corpus CSV for the standalone check");
  evaluate->add_option("--tag", tag, "Row label for the standalone report");

  CLI11_PARSE(app, argc, argv);

  try {
    if (evaluate->parsed() && !preds_path.empty()) return standalone_evaluate(preds_path, test_path, tag);

    if (validate->parsed()) {
      auto cfg = load(g);
      auto diags = run::validate(cfg);
      print_diagnostics(diags);
      if (!diags.empty()) return kConfig;
      print_sweep(cfg);
      return kOk;
    }

    run::RunnerHooks hooks;
    if (!g.quiet) hooks.log = &std::cerr;
    run::Runner runner(load_valid(g), hooks);

    if (split->parsed()) runner.stage_split();
    if (generate->parsed()) {
      auto st = runner.stage_generate();
      if (st.failed > 0) return kStage;
    }
    if (select->parsed()) runner.stage_select();
    if (plan->parsed()) runner.stage_plan();
    if (train->parsed()) runner.stage_train();
    if (evaluate->parsed()) return rows_exit(runner.stage_evaluate());
    if (report->parsed() || all->parsed()) {
      auto summary = report->parsed() ? runner.stage_report() : runner.run();
      std::cout << summary.report_text;
      std::cout << "report: " << (summary.run_dir / "report" / "report.txt").string() << "\n";
      return rows_exit(summary.rows);
    }
    return kOk;
  } catch (const run::ConfigError& e) {
    print_diagnostics(e.diagnostics());
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.kind() == ErrorKind::Integrity || e.kind() == ErrorKind::Provenance) return kIntegrity;
    if (e.kind() == ErrorKind::Schema || e.kind() == ErrorKind::Row) return kConfig;
    return kStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStage;
  }
}
