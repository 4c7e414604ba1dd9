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

#pragma once

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "augkit/baseclf.hpp"
#include "augkit/config.hpp"
#include "augkit/corpus.hpp"
#include "augkit/embedsim.hpp"
#include "augkit/error.hpp"
#include "augkit/genclient.hpp"
#include "augkit/metrics.hpp"
#include "augkit/planner.hpp"
#include "augkit/selection.hpp"

namespace augkit::run {

namespace fs = std::filesystem;

/// Test seams; production runs leave these empty.
struct RunnerHooks {
  gen::ChatBackend* chat = nullptr;
  embed::EmbedProvider* embedder = nullptr;
  std::ostream* log = nullptr;
};

struct RowResult {
  std::string tag;
  std::string slug;
  bool baseline = false;
  std::optional<metrics::EvalReport> report;
  std::string status = "pending";  // ok | failed | awaiting_predictions
  std::string error;
};

struct RunSummary {
  std::vector<RowResult> rows;
  std::string report_text;
  std::string report_digest;
  fs::path run_dir;
  gen::GenerateStats generation;
};

namespace detail {

inline void write_text(const fs::path& p, const std::string& data) {
  fs::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + p.string(), {p.string()});
    out << data;
    if (!out) fail(ErrorKind::Io, "write failed for " + p.string(), {p.string()});
  }
  fs::rename(tmp, p);
}

inline void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

inline json read_json(const fs::path& p) {
  auto j = json::parse(csv::read_file(p.string()), nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::Schema, p.string() + " is not valid JSON", {p.string()});
  return j;
}

template <typename T, typename F>
void write_jsonl(const fs::path& p, const std::vector<T>& items, F&& to) {
  std::string data;
  for (const auto& it : items) data += to(it).dump() + "\n";
  write_text(p, data);
}

inline std::vector<json> read_jsonl(const fs::path& p) {
  std::vector<json> out;
  std::istringstream in(csv::read_file(p.string()));
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded()) fail(ErrorKind::Schema, "malformed line in " + p.string(), {p.string()});
    out.push_back(std::move(j));
  }
  return out;
}

class DirLock {
 public:
  explicit DirLock(const fs::path& dir) {
    fs::create_directories(dir);
    auto path = (dir / ".lock").string();
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0 || ::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      if (fd_ >= 0) ::close(fd_);
      fail(ErrorKind::Io, "output directory " + dir.string() + " is locked by another run", {dir.string()});
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;
  ~DirLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }

 private:
  int fd_ = -1;
};

inline std::string sanitize_name(std::string s) {
  for (auto& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  return s;
}

}  // namespace detail

/// Drives split -> generate -> select -> plan -> train -> evaluate -> report.
/// Each stage reads its inputs from the run directory, so stages can also be
/// invoked one at a time.
class Runner {
 public:
  explicit Runner(ExperimentConfig cfg, RunnerHooks hooks = {})
      : cfg_(std::move(cfg)), hooks_(hooks) {
    hash_ = config_hash(cfg_);
    run_dir_ = fs::path(cfg_.output_dir) / hash_;
    cache_dir_ = fs::path(cfg_.output_dir) / "cache";
  }

  const ExperimentConfig& config() const { return cfg_; }
  const fs::path& run_dir() const { return run_dir_; }
  const fs::path& cache_dir() const { return cache_dir_; }
  const std::string& hash() const { return hash_; }

  fs::path row_dir(const std::string& slug) const { return run_dir_ / "configs" / slug; }

  std::vector<ConfigurationSpec> rows() const { return cfg_.sweep(); }

  // -- split ---------------------------------------------------------------

  Split stage_split() {
    auto lock = lock_run();
    log("split: loading " + cfg_.dataset.path);
    auto corpus = load_csv(cfg_.dataset.path, cfg_.dataset.columns, cfg_.dataset.name);
    auto split = stratified_split(corpus, cfg_.split);
    const auto dir = run_dir_ / "split";
    auto train_csv = to_csv_string(split.train), test_csv = to_csv_string(split.test);
    detail::write_text(dir / "train.csv", train_csv);
    detail::write_text(dir / "test.csv", test_csv);
    detail::write_json(dir / "split.json",
                       {{"train_digest", sha256_hex(train_csv)},
                        {"test_digest", sha256_hex(test_csv)},
                        {"train", plan::to_json(composition(split.train))},
                        {"test", plan::to_json(composition(split.test))}});
    log("split: train " + std::to_string(split.train.size()) + ", test " + std::to_string(split.test.size()));
    return split;
  }

  /// Reloads the split and re-verifies the recorded digests.
  Split load_split() const {
    const auto dir = run_dir_ / "split";
    if (!fs::exists(dir / "split.json"))
      fail(ErrorKind::Io, "no split in " + run_dir_.string() + "; run the split stage first");
    auto meta = detail::read_json(dir / "split.json");
    auto train_csv = csv::read_file((dir / "train.csv").string());
    auto test_csv = csv::read_file((dir / "test.csv").string());
    if (sha256_hex(test_csv) != meta.at("test_digest").get<std::string>())
      fail(ErrorKind::Integrity, "test split was modified after it was recorded");
    if (sha256_hex(train_csv) != meta.at("train_digest").get<std::string>())
      fail(ErrorKind::Integrity, "train split was modified after it was recorded");
    Split s{parse_csv(train_csv, {}, cfg_.dataset.name + "/train"),
            parse_csv(test_csv, {}, cfg_.dataset.name + "/test")};
    if (s.test.has_synthetic()) fail(ErrorKind::Integrity, "test split contains synthetic articles");
    return s;
  }

  // -- generate ------------------------------------------------------------

  gen::GenerateStats stage_generate() {
    auto lock = lock_run();
    auto split = load_split();
    std::vector<Article> sources;
    for (const auto& a : split.train)
      if (cfg_.target_classes.count(a.label)) sources.push_back(a);

    auto gcfg = cfg_.gen;
    gen::GenerateOptions opts;
    std::unique_ptr<gen::ChatBackend> owned;
    gen::ChatBackend* backend = hooks_.chat;
    std::string cache_name = "generations.jsonl";
    if (cfg_.backend == Backend::Mock) {
      gcfg.model_id = "mock-paraphraser/seed=" + std::to_string(cfg_.mock_seed);
      gcfg.backoff_base = std::chrono::milliseconds(0);
      opts.clock = gen::epoch_clock();
      cache_name = "generations-mock.jsonl";
      if (!backend) owned = std::make_unique<gen::MockChatBackend>(cfg_.mock_seed);
    } else {
      if (!http::env_secret(gcfg.api_key_env))
        throw ConfigError({{"MISSING_API_KEY", "/generation/api_key_env",
                            "environment variable " + gcfg.api_key_env + " is not set"}});
      if (!backend) owned = std::make_unique<gen::HttpChatBackend>(gcfg);
    }
    if (!backend) backend = owned.get();

    gen::GenCache cache(cache_dir_ / cache_name);
    gen::GenerateStats total;
    for (Mode mode : cfg_.modes_in_use()) {
      gen::RequestTemplate tmpl;
      tmpl.n_variants = cfg_.n_variants;
      tmpl.mode = mode;
      if (mode == Mode::FewShot)
        tmpl.exemplars = prompting::ExemplarBank(split.train, cfg_.n_exemplars, derive_seed(cfg_.run_seed, "exemplars"));
      log("generate: " + std::string(prompting::name(mode)) + " for " + std::to_string(sources.size()) + " articles");
      const auto dir = run_dir_ / "generate" / std::string(prompting::name(mode));
      std::error_code ec;
      fs::remove(dir / "FAILED", ec);
      gen::GenerateResult result;
      try {
        result = gen::generate(sources, tmpl, gcfg, *backend, cache, opts);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::Integrity || e.kind() == ErrorKind::Io) throw;
        detail::write_text(dir / "FAILED", std::string(e.what()) + "\n");
        fs::remove(dir / "records.jsonl", ec);
        log("FAILED generate " + std::string(prompting::name(mode)) + ": " + e.what());
        continue;
      }
      detail::write_jsonl(dir / "records.jsonl", result.records, [](const gen::GenRecord& r) { return gen::to_json(r); });
      const auto& st = result.stats;
      detail::write_json(dir / "summary.json",
                         {{"articles", sources.size()}, {"candidates", st.candidates},
                          {"complete", st.complete}, {"partial", st.partial}, {"failed", st.failed},
                          {"warnings", st.warnings}});
      log("generate: " + std::to_string(st.candidates) + " candidates (" + std::to_string(st.cache_hits) +
          " cached, " + std::to_string(st.network_requests) + " requests, " + std::to_string(st.partial) +
          " partial, " + std::to_string(st.failed) + " failed)");
      total.cache_hits += st.cache_hits;
      total.network_requests += st.network_requests;
      total.complete += st.complete;
      total.partial += st.partial;
      total.failed += st.failed;
      total.candidates += st.candidates;
      total.warnings.insert(total.warnings.end(), st.warnings.begin(), st.warnings.end());
    }
    return total;
  }

  std::vector<gen::GenRecord> load_records(Mode mode) const {
    const auto dir = run_dir_ / "generate" / std::string(prompting::name(mode));
    if (fs::exists(dir / "FAILED"))
      fail(ErrorKind::Provider, "generation failed: " + std::string(text::trim(csv::read_file((dir / "FAILED").string()))));
    auto p = dir / "records.jsonl";
    if (!fs::exists(p)) fail(ErrorKind::Io, "no generation records at " + p.string() + "; run generate first");
    std::vector<gen::GenRecord> out;
    for (const auto& j : detail::read_jsonl(p)) out.push_back(gen::record_from_json(j));
    return out;
  }

  // -- select --------------------------------------------------------------

  void stage_select() {
    auto lock = lock_run();
    auto split = load_split();
    std::unordered_map<std::string, std::string> source_text;
    for (const auto& a : split.train) source_text.emplace(a.id, a.content);
    for (const auto& row : rows()) {
      clear_failure(row.slug());
      guarded(row.slug(), [&] {
        auto records = load_records(row.mode);
        std::vector<prompting::CandidateSet> pools;
        for (const auto& r : records) pools.push_back(r.candidate_set);
        select::SelectionPolicy policy{row.strategy, row.k, cfg_.run_seed, cfg_.min_similarity};
        embed::EmbedProvider* provider = nullptr;
        std::unique_ptr<embed::EmbedCache> ecache;
        if (policy.needs_scores()) {
          provider = embedder();
          ecache = std::make_unique<embed::EmbedCache>(
              cache_dir_ / ("embeddings-" + detail::sanitize_name(provider->id()) + ".jsonl"));
        }
        auto result = select::apply_policy(pools, policy, source_text, provider, ecache.get(), cfg_.gen.max_inflight);
        const auto dir = row_dir(row.slug()) / "select";
        detail::write_jsonl(dir / "selected.jsonl", result.sets, [](const select::SelectedSet& s) { return select::to_json(s); });
        detail::write_json(dir / "summary.json",
                           {{"tag", row.tag()}, {"chosen", result.summary.total_chosen},
                            {"shortfall", result.summary.total_shortfall},
                            {"shortfall_by_cause", result.summary.shortfall_by_cause},
                            {"warnings", result.summary.warnings}});
        log("select: " + row.tag() + " chose " + std::to_string(result.summary.total_chosen));
      });
    }
  }

  // -- plan ----------------------------------------------------------------

  void stage_plan() {
    auto lock = lock_run();
    auto split = load_split();
    std::unordered_set<std::string> test_ids;
    for (const auto& a : split.test) test_ids.insert(a.id);
    for (const auto& row : rows()) {
      if (failed(row.slug())) continue;
      guarded(row.slug(), [&] {
        std::vector<select::SelectedSet> sets;
        for (const auto& j : detail::read_jsonl(row_dir(row.slug()) / "select" / "selected.jsonl"))
          sets.push_back(select::selected_from_json(j));
        plan::AugmentPolicy policy{cfg_.target_classes, row.k,
                                   {row.strategy, row.k, cfg_.run_seed, cfg_.min_similarity}, row.mode};
        auto built = plan::build_augmented(split.train, sets, policy, cfg_.tolerance, &test_ids);
        const auto dir = row_dir(row.slug()) / "plan";
        detail::write_text(dir / "train_augmented.csv", to_csv_string(built.corpus));
        detail::write_json(dir / "composition.json", built.manifest);
        log("plan: " + row.tag() + " -> " + std::to_string(built.corpus.size()) + " training articles");
      });
    }
  }

  // -- train / predict -----------------------------------------------------

  void stage_train() {
    auto lock = lock_run();
    auto split = load_split();
    auto train_one = [&](const std::string& slug, const Corpus& train) {
      guarded(slug, [&] {
        const auto dir = row_dir(slug);
        if (cfg_.classifier == ClassifierKind::External) {
          detail::write_text(dir / "export" / "train.csv", to_csv_string(train));
          detail::write_text(dir / "export" / "test.csv", to_csv_string(split.test));
          log("train: exported " + slug + " for the external trainer");
          return;
        }
        auto model = clf::fit(train, cfg_.hyper);
        auto preds = clf::predict(model, split.test);
        detail::write_text(dir / "train" / "model.json", clf::to_json(model).dump() + "\n");
        detail::write_json(dir / "train" / "loss.json", model.loss_history);
        std::ostringstream csv_out;
        metrics::write_predictions(csv_out, preds);
        detail::write_text(dir / "predict" / "predictions.csv", csv_out.str());
        log("train: " + slug + " fitted on " + std::to_string(train.size()) + " articles");
      });
    };
    clear_failure(std::string(kBaselineSlug));
    train_one(std::string(kBaselineSlug), split.train);
    for (const auto& row : rows()) {
      if (failed(row.slug())) continue;
      auto p = row_dir(row.slug()) / "plan" / "train_augmented.csv";
      guarded(row.slug(), [&] {
        auto train = parse_csv(csv::read_file(p.string()), {}, row.slug());
        train_one(row.slug(), train);
      });
    }
  }

  // -- evaluate ------------------------------------------------------------

  std::vector<RowResult> stage_evaluate() {
    auto lock = lock_run();
    auto split = load_split();  // re-verifies the test digest
    std::vector<RowResult> out;
    auto eval_one = [&](const std::string& tag, const std::string& slug, bool baseline) {
      RowResult rr{tag, slug, baseline, std::nullopt, "ok", {}};
      const auto dir = row_dir(slug);
      if (auto why = failure(slug)) {
        rr.status = "failed";
        rr.error = *why;
      } else {
        auto preds_path = dir / "predict" / "predictions.csv";
        if (!fs::exists(preds_path)) {
          rr.status = cfg_.classifier == ClassifierKind::External ? "awaiting_predictions" : "failed";
          rr.error = "no predictions at " + preds_path.string();
        } else {
          try {
            auto preds = metrics::read_predictions(preds_path.string());
            auto cm = metrics::confusion(preds, &split.test);
            rr.report = metrics::evaluate(cm, tag, baseline);
          } catch (const Error& e) {
            if (e.kind() == ErrorKind::Integrity) throw;
            rr.status = "failed";
            rr.error = e.what();
          }
        }
      }
      auto report = rr.report ? *rr.report
                              : metrics::failed_report(tag, rr.status == "awaiting_predictions"
                                                                ? "AWAITING_PREDICTIONS"
                                                                : rr.error,
                                                       baseline);
      detail::write_json(dir / "evaluate" / "report.json", metrics::to_json(report));
      out.push_back(std::move(rr));
    };
    eval_one(std::string(kBaselineTag), std::string(kBaselineSlug), true);
    for (const auto& row : rows()) eval_one(row.tag(), row.slug(), false);
    return out;
  }

  // -- report --------------------------------------------------------------

  RunSummary stage_report() {
    auto lock = lock_run();
    RunSummary summary;
    summary.run_dir = run_dir_;
    std::vector<metrics::EvalReport> reports;
    json rows_json = json::array();
    auto collect = [&](const std::string& tag, const std::string& slug, bool baseline) {
      auto p = row_dir(slug) / "evaluate" / "report.json";
      metrics::EvalReport r = fs::exists(p) ? metrics::report_from_json(detail::read_json(p))
                                            : metrics::failed_report(tag, "not evaluated", baseline);
      r.config_tag = tag;
      r.baseline = baseline;
      RowResult rr{tag, slug, baseline, std::nullopt, r.failure ? "failed" : "ok", r.failure.value_or("")};
      if (r.failure && *r.failure == "AWAITING_PREDICTIONS") rr.status = "awaiting_predictions";
      if (!r.failure) rr.report = r;
      rows_json.push_back({{"tag", tag}, {"slug", slug}, {"status", rr.status}});
      summary.rows.push_back(rr);
      reports.push_back(std::move(r));
    };
    collect(std::string(kBaselineTag), std::string(kBaselineSlug), true);
    for (const auto& row : rows()) collect(row.tag(), row.slug(), false);

    summary.report_text = metrics::report_table(reports);
    json report_json = json::array();
    for (const auto& r : reports) report_json.push_back(metrics::to_json(r));
    const auto report_dir = run_dir_ / "report";
    detail::write_text(report_dir / "report.txt", summary.report_text);
    detail::write_json(report_dir / "report.json", report_json);
    summary.report_digest = sha256_hex(summary.report_text + report_json.dump());

    json manifest{{"config_hash", hash_}, {"config", to_json(cfg_)}, {"rows", rows_json},
                  {"report_digest", summary.report_digest}};
    if (fs::exists(run_dir_ / "split" / "split.json")) {
      auto meta = detail::read_json(run_dir_ / "split" / "split.json");
      manifest["split"] = {{"train_digest", meta["train_digest"]}, {"test_digest", meta["test_digest"]}};
    }
    detail::write_json(run_dir_ / "MANIFEST.json", manifest);
    return summary;
  }

  /// Full pipeline. Per-configuration failures are recorded as FAILED rows;
  /// integrity violations abort the run.
  RunSummary run() {
    stage_split();
    std::optional<gen::GenerateStats> gstats;
    try {
      gstats = stage_generate();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Integrity || dynamic_cast<const ConfigError*>(&e)) throw;
      for (const auto& row : rows()) mark_failed(row.slug(), std::string("generation: ") + e.what());
    }
    if (gstats) {
      stage_select();
      stage_plan();
    }
    stage_train();
    stage_evaluate();
    auto summary = stage_report();
    if (gstats) summary.generation = *gstats;
    return summary;
  }

 private:
  struct LockHolder {
    std::shared_ptr<detail::DirLock> lock;
  };

  LockHolder lock_run() {
    if (auto held = lock_.lock()) return {held};
    auto l = std::make_shared<detail::DirLock>(run_dir_);
    lock_ = l;
    return {l};
  }

  embed::EmbedProvider* embedder() {
    if (hooks_.embedder) return hooks_.embedder;
    if (!embedder_) {
      const auto& e = cfg_.embedding;
      if (e.kind == EmbedKind::Precomputed)
        embedder_ = std::make_unique<embed::PrecomputedProvider>(e.precomputed_path);
      else if (e.kind == EmbedKind::Http && cfg_.backend == Backend::Live)
        embedder_ = std::make_unique<embed::HttpEmbedProvider>(e.http);
      else
        embedder_ = std::make_unique<embed::HashingEmbedder>(e.hashing_dim);
    }
    return embedder_.get();
  }

  void log(const std::string& msg) const {
    if (hooks_.log) *hooks_.log << msg << '\n';
  }

  fs::path failure_marker(const std::string& slug) const { return row_dir(slug) / "FAILED"; }

  void mark_failed(const std::string& slug, const std::string& why) {
    detail::write_text(failure_marker(slug), why + "\n");
    log("FAILED " + slug + ": " + why);
  }

  void clear_failure(const std::string& slug) {
    std::error_code ec;
    fs::remove(failure_marker(slug), ec);
  }

  bool failed(const std::string& slug) const { return fs::exists(failure_marker(slug)); }

  std::optional<std::string> failure(const std::string& slug) const {
    if (!failed(slug)) return std::nullopt;
    return std::string(text::trim(csv::read_file(failure_marker(slug).string())));
  }

  template <typename F>
  void guarded(const std::string& slug, F&& body) {
    try {
      body();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Integrity) throw;
      mark_failed(slug, e.what());
    } catch (const std::exception& e) {
      mark_failed(slug, e.what());
    }
  }

  ExperimentConfig cfg_;
  RunnerHooks hooks_;
  std::string hash_;
  fs::path run_dir_;
  fs::path cache_dir_;
  std::weak_ptr<detail::DirLock> lock_;
  std::unique_ptr<embed::EmbedProvider> embedder_;
};

}  // namespace augkit::run
