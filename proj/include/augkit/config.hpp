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

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "augkit/baseclf.hpp"
#include "augkit/corpus.hpp"
#include "augkit/embedsim.hpp"
#include "augkit/error.hpp"
#include "augkit/genclient.hpp"
#include "augkit/hash.hpp"
#include "augkit/prompting.hpp"
#include "augkit/selection.hpp"

namespace augkit::run {

using json = nlohmann::json;
using prompting::Mode;
using select::Strategy;

enum class Backend { Mock, Live };
enum class EmbedKind { Hashing, Http, Precomputed };
enum class ClassifierKind { Baseline, External };

struct DatasetConfig {
  std::string path;
  ColumnMapping columns;
  std::string name = "corpus";
};

/// One augmented row of the comparison table.
struct ConfigurationSpec {
  Mode mode = Mode::ZeroShot;
  Strategy strategy = Strategy::Random;
  int k = 1;
  bool exhaustive = false;  // k >= n_variants: Random and Similarity coincide

  std::string tag() const {
    std::string t(prompting::short_name(mode));
    if (exhaustive) return t + " K=" + std::to_string(k) + " (exhaustive)";
    return t + " " + std::string(select::short_name(strategy)) + ", K=" + std::to_string(k);
  }

  std::string slug() const {
    std::string s = text::lower_ascii(prompting::short_name(mode));
    if (exhaustive) return s + "-k" + std::to_string(k) + "-exhaustive";
    return s + "-" + text::lower_ascii(select::short_name(strategy)) + "-k" + std::to_string(k);
  }

  bool operator==(const ConfigurationSpec&) const = default;
};

inline constexpr std::string_view kBaselineTag = "Baseline (No Aug.)";
inline constexpr std::string_view kBaselineSlug = "baseline";

struct EmbedConfig {
  EmbedKind kind = EmbedKind::Hashing;
  std::size_t hashing_dim = 1024;
  embed::HttpEmbedConfig http;
  std::string precomputed_path;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  SplitSpec split{};
  bool split_seed_explicit = false;
  int n_variants = 5;
  std::vector<Mode> prompting_modes{Mode::ZeroShot};
  std::vector<int> k_values{1, 2, 3, 5};
  std::vector<Strategy> strategies{Strategy::Random, Strategy::Similarity};
  std::vector<ConfigurationSpec> configurations;  // explicit rows; overrides the cross product
  std::set<Label> target_classes{Label::Fake};
  std::size_t n_exemplars = 5;
  std::optional<double> min_similarity;
  std::size_t tolerance = 0;
  Backend backend = Backend::Mock;
  gen::GenConfig gen;
  std::uint64_t mock_seed = 0;
  EmbedConfig embedding;
  ClassifierKind classifier = ClassifierKind::Baseline;
  clf::Hyper hyper;
  bool classifier_seed_explicit = false;
  std::uint64_t run_seed = 0;
  std::string output_dir = "out";

  /// Rows in sweep order, duplicates and K=N strategy twins collapsed.
  std::vector<ConfigurationSpec> sweep() const {
    std::vector<ConfigurationSpec> rows;
    auto add = [&](ConfigurationSpec c) {
      c.exhaustive = c.k >= n_variants;
      if (c.exhaustive) c.strategy = Strategy::Random;
      if (std::find(rows.begin(), rows.end(), c) == rows.end()) rows.push_back(c);
    };
    if (!configurations.empty()) {
      for (const auto& c : configurations) add(c);
      return rows;
    }
    for (Mode m : prompting_modes)
      for (int k : k_values)
        for (Strategy s : strategies) add({m, s, k, false});
    return rows;
  }

  std::vector<Mode> modes_in_use() const {
    std::vector<Mode> modes;
    for (const auto& c : sweep())
      if (std::find(modes.begin(), modes.end(), c.mode) == modes.end()) modes.push_back(c.mode);
    return modes;
  }

  void set_run_seed(std::uint64_t seed) {
    run_seed = seed;
    if (!split_seed_explicit) split.seed = seed;
    if (!classifier_seed_explicit) hyper.seed = seed;
  }
};

struct Diagnostic {
  std::string code;   // machine-readable, e.g. K_EXCEEDS_N
  std::string path;   // JSON pointer into the config
  std::string message;
};

inline std::string to_string(const Diagnostic& d) {
  return d.code + " at " + (d.path.empty() ? "/" : d.path) + ": " + d.message;
}

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<Diagnostic> diags)
      : Error(ErrorKind::Parameter, summarize(diags)), diagnostics_(std::move(diags)) {}
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  static std::string summarize(const std::vector<Diagnostic>& d) {
    std::string s = "invalid configuration";
    for (const auto& x : d) s += "\n  " + to_string(x);
    return s;
  }
  std::vector<Diagnostic> diagnostics_;
};

namespace detail {

class Reader {
 public:
  std::vector<Diagnostic> diags;

  void add(std::string code, std::string path, std::string msg) {
    diags.push_back({std::move(code), std::move(path), std::move(msg)});
  }

  bool object(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) {
      add("TYPE_MISMATCH", path, "expected an object");
      return false;
    }
    for (const auto& [key, value] : j.items())
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        add("UNKNOWN_FIELD", path + "/" + key, "unknown field");
    return true;
  }

  template <typename T>
  void get(const json& j, const std::string& key, const std::string& path, T& out, bool required = false) {
    if (!j.contains(key)) {
      if (required) add("MISSING_FIELD", path + "/" + key, "required field is missing");
      return;
    }
    const auto& v = j.at(key);
    const std::string p = path + "/" + key;
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) return add("TYPE_MISMATCH", p, "expected a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) return add("TYPE_MISMATCH", p, "expected a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) return add("TYPE_MISMATCH", p, "expected a number");
      out = v.get<T>();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
        return add("TYPE_MISMATCH", p, "expected a non-negative integer");
      out = v.get<T>();
    } else {
      if (!v.is_number_integer()) return add("TYPE_MISMATCH", p, "expected an integer");
      out = v.get<T>();
    }
  }
};

inline std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "zero_shot" || s == "ZS") return Mode::ZeroShot;
  if (s == "few_shot" || s == "FS") return Mode::FewShot;
  return std::nullopt;
}

}  // namespace detail

/// Parses and schema-checks; every problem becomes a Diagnostic with a JSON
/// pointer. Throws ConfigError when any diagnostic was raised.
inline ExperimentConfig parse_config(const json& j) {
  detail::Reader r;
  ExperimentConfig c;
  if (!r.object(j, "", {"dataset", "split", "n_variants", "prompting_modes", "k_values", "strategies",
                        "configurations", "target_classes", "n_exemplars", "min_similarity",
                        "quality_floor", "tolerance", "generation", "embedding", "classifier",
                        "run_seed", "output_dir"}))
    throw ConfigError(r.diags);

  if (!j.contains("dataset")) {
    r.add("MISSING_FIELD", "/dataset", "required field is missing");
  } else if (r.object(j["dataset"], "/dataset", {"path", "columns", "name"})) {
    const auto& d = j["dataset"];
    r.get(d, "path", "/dataset", c.dataset.path, true);
    r.get(d, "name", "/dataset", c.dataset.name);
    if (d.contains("columns") &&
        r.object(d["columns"], "/dataset/columns",
                 {"id", "headline", "content", "category", "label", "provenance", "parent_id"})) {
      const auto& m = d["columns"];
      auto& cm = c.dataset.columns;
      r.get(m, "id", "/dataset/columns", cm.id);
      r.get(m, "headline", "/dataset/columns", cm.headline);
      r.get(m, "content", "/dataset/columns", cm.content);
      r.get(m, "category", "/dataset/columns", cm.category);
      r.get(m, "label", "/dataset/columns", cm.label);
      r.get(m, "provenance", "/dataset/columns", cm.provenance);
      r.get(m, "parent_id", "/dataset/columns", cm.parent_id);
    }
  }

  if (j.contains("split") && r.object(j["split"], "/split", {"train_fraction", "strata", "seed"})) {
    const auto& s = j["split"];
    double fraction = c.split.train_fraction.value();
    r.get(s, "train_fraction", "/split", fraction);
    if (!(fraction > 0 && fraction < 1))
      r.add("FRACTION_OUT_OF_RANGE", "/split/train_fraction", "must lie strictly between 0 and 1");
    else
      c.split.train_fraction = Fraction::from_double(fraction);
    if (s.contains("strata")) {
      if (!s["strata"].is_array() || s["strata"].empty()) {
        r.add("INVALID_VALUE", "/split/strata", "expected a non-empty array of field names");
      } else {
        c.split.strata.clear();
        for (std::size_t i = 0; i < s["strata"].size(); ++i) {
          if (!s["strata"][i].is_string())
            r.add("TYPE_MISMATCH", "/split/strata/" + std::to_string(i), "expected a string");
          else
            c.split.strata.push_back(s["strata"][i].get<std::string>());
        }
      }
    }
    if (s.contains("seed")) {
      r.get(s, "seed", "/split", c.split.seed);
      c.split_seed_explicit = true;
    }
  }

  r.get(j, "n_variants", "", c.n_variants);
  if (c.n_variants < 1) r.add("INVALID_VALUE", "/n_variants", "must be >= 1");

  auto string_list = [&](const char* key, auto parse, auto& out) {
    if (!j.contains(key)) return;
    const std::string p = std::string("/") + key;
    if (!j[key].is_array() || j[key].empty()) return r.add("EMPTY_SWEEP", p, "expected a non-empty array");
    out.clear();
    for (std::size_t i = 0; i < j[key].size(); ++i) {
      const auto& v = j[key][i];
      auto parsed = v.is_string() ? parse(v.template get<std::string>()) : std::nullopt;
      if (!parsed) r.add("INVALID_VALUE", p + "/" + std::to_string(i), "unrecognized value");
      else out.push_back(*parsed);
    }
  };
  string_list("prompting_modes", detail::parse_mode, c.prompting_modes);
  string_list("strategies", select::parse_strategy, c.strategies);

  if (j.contains("k_values")) {
    if (!j["k_values"].is_array() || j["k_values"].empty()) {
      r.add("EMPTY_SWEEP", "/k_values", "expected a non-empty array");
    } else {
      c.k_values.clear();
      for (std::size_t i = 0; i < j["k_values"].size(); ++i) {
        if (!j["k_values"][i].is_number_integer())
          r.add("TYPE_MISMATCH", "/k_values/" + std::to_string(i), "expected an integer");
        else
          c.k_values.push_back(j["k_values"][i].get<int>());
      }
    }
  }

  if (j.contains("configurations")) {
    if (!j["configurations"].is_array()) {
      r.add("TYPE_MISMATCH", "/configurations", "expected an array");
    } else {
      for (std::size_t i = 0; i < j["configurations"].size(); ++i) {
        const std::string p = "/configurations/" + std::to_string(i);
        const auto& e = j["configurations"][i];
        if (!r.object(e, p, {"mode", "strategy", "k"})) continue;
        std::string mode = "zero_shot", strategy = "random";
        ConfigurationSpec spec;
        r.get(e, "mode", p, mode);
        r.get(e, "strategy", p, strategy);
        r.get(e, "k", p, spec.k, true);
        auto m = detail::parse_mode(mode);
        auto s = select::parse_strategy(strategy);
        if (!m) r.add("INVALID_VALUE", p + "/mode", "unrecognized prompting mode");
        if (!s) r.add("INVALID_VALUE", p + "/strategy", "unrecognized strategy");
        if (m && s) {
          spec.mode = *m;
          spec.strategy = *s;
          c.configurations.push_back(spec);
        }
      }
    }
  }

  if (j.contains("target_classes")) {
    std::vector<Label> labels;
    string_list("target_classes", [](const std::string& s) { return parse_label(s); }, labels);
    c.target_classes = std::set<Label>(labels.begin(), labels.end());
  }

  r.get(j, "n_exemplars", "", c.n_exemplars);
  if (j.contains("min_similarity") && !j["min_similarity"].is_null()) {
    double floor = 0;
    r.get(j, "min_similarity", "", floor);
    if (!(floor >= -1 && floor <= 1)) r.add("INVALID_VALUE", "/min_similarity", "must lie in [-1, 1]");
    c.min_similarity = floor;
  }
  if (j.contains("quality_floor")) {
    bool preset = false;
    r.get(j, "quality_floor", "", preset);
    if (preset) {
      if (c.min_similarity) r.add("INVALID_VALUE", "/quality_floor", "conflicts with min_similarity");
      c.min_similarity = select::kTightQualityFloor;
    }
  }
  r.get(j, "tolerance", "", c.tolerance);

  if (j.contains("generation") &&
      r.object(j["generation"], "/generation",
               {"backend", "endpoint_url", "model_id", "temperature", "max_inflight", "max_retries",
                "timeout_s", "api_key_env", "backoff_base_s", "mock_seed"})) {
    const auto& g = j["generation"];
    std::string backend = "mock";
    r.get(g, "backend", "/generation", backend);
    if (backend == "mock") c.backend = Backend::Mock;
    else if (backend == "live") c.backend = Backend::Live;
    else r.add("INVALID_VALUE", "/generation/backend", "expected \"mock\" or \"live\"");
    r.get(g, "endpoint_url", "/generation", c.gen.endpoint_url);
    r.get(g, "model_id", "/generation", c.gen.model_id);
    r.get(g, "temperature", "/generation", c.gen.temperature);
    r.get(g, "max_inflight", "/generation", c.gen.max_inflight);
    r.get(g, "max_retries", "/generation", c.gen.max_retries);
    r.get(g, "api_key_env", "/generation", c.gen.api_key_env);
    r.get(g, "mock_seed", "/generation", c.mock_seed);
    double timeout = static_cast<double>(c.gen.timeout.count()) / 1000.0;
    double backoff = static_cast<double>(c.gen.backoff_base.count()) / 1000.0;
    r.get(g, "timeout_s", "/generation", timeout);
    r.get(g, "backoff_base_s", "/generation", backoff);
    c.gen.timeout = std::chrono::milliseconds(static_cast<long long>(timeout * 1000));
    c.gen.backoff_base = std::chrono::milliseconds(static_cast<long long>(backoff * 1000));
    if (c.gen.max_inflight < 1) r.add("INVALID_VALUE", "/generation/max_inflight", "must be >= 1");
    if (c.gen.max_retries < 0) r.add("INVALID_VALUE", "/generation/max_retries", "must be >= 0");
    if (!std::isfinite(c.gen.temperature) || c.gen.temperature < 0)
      r.add("INVALID_VALUE", "/generation/temperature", "must be finite and >= 0");
  }

  if (j.contains("embedding") &&
      r.object(j["embedding"], "/embedding",
               {"provider", "url", "model", "api_key_env", "path", "dim", "batch_size", "timeout_s"})) {
    const auto& e = j["embedding"];
    std::string provider = "hashing";
    r.get(e, "provider", "/embedding", provider);
    if (provider == "hashing") c.embedding.kind = EmbedKind::Hashing;
    else if (provider == "http") c.embedding.kind = EmbedKind::Http;
    else if (provider == "precomputed") c.embedding.kind = EmbedKind::Precomputed;
    else r.add("INVALID_VALUE", "/embedding/provider", "expected hashing, http or precomputed");
    r.get(e, "url", "/embedding", c.embedding.http.url);
    r.get(e, "model", "/embedding", c.embedding.http.model);
    r.get(e, "api_key_env", "/embedding", c.embedding.http.api_key_env);
    r.get(e, "path", "/embedding", c.embedding.precomputed_path);
    r.get(e, "dim", "/embedding", c.embedding.hashing_dim);
    r.get(e, "batch_size", "/embedding", c.embedding.http.batch_size);
    if (c.embedding.hashing_dim == 0) r.add("INVALID_VALUE", "/embedding/dim", "must be >= 1");
    if (c.embedding.http.batch_size == 0) r.add("INVALID_VALUE", "/embedding/batch_size", "must be >= 1");
  }

  if (j.contains("classifier") &&
      r.object(j["classifier"], "/classifier",
               {"kind", "epochs", "learning_rate", "l2", "batch_size", "seed", "max_features"})) {
    const auto& k = j["classifier"];
    std::string kind = "baseline";
    r.get(k, "kind", "/classifier", kind);
    if (kind == "baseline") c.classifier = ClassifierKind::Baseline;
    else if (kind == "external") c.classifier = ClassifierKind::External;
    else r.add("INVALID_VALUE", "/classifier/kind", "expected \"baseline\" or \"external\"");
    r.get(k, "epochs", "/classifier", c.hyper.epochs);
    r.get(k, "learning_rate", "/classifier", c.hyper.learning_rate);
    r.get(k, "l2", "/classifier", c.hyper.l2);
    r.get(k, "batch_size", "/classifier", c.hyper.batch_size);
    r.get(k, "max_features", "/classifier", c.hyper.max_features);
    if (k.contains("seed")) {
      r.get(k, "seed", "/classifier", c.hyper.seed);
      c.classifier_seed_explicit = true;
    }
    if (c.hyper.epochs < 1) r.add("INVALID_VALUE", "/classifier/epochs", "must be >= 1");
    if (!(c.hyper.learning_rate > 0)) r.add("INVALID_VALUE", "/classifier/learning_rate", "must be > 0");
    if (c.hyper.l2 < 0) r.add("INVALID_VALUE", "/classifier/l2", "must be >= 0");
    if (c.hyper.batch_size < 1) r.add("INVALID_VALUE", "/classifier/batch_size", "must be >= 1");
  }

  std::uint64_t seed = 0;
  r.get(j, "run_seed", "", seed);
  r.get(j, "output_dir", "", c.output_dir);
  c.set_run_seed(seed);

  if (!r.diags.empty()) throw ConfigError(r.diags);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  auto text = csv::read_file(path);
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError({{"INVALID_JSON", "", path + " is not valid JSON"}});
  auto c = parse_config(j);
  // Relative data paths are resolved against the config file's directory.
  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  resolve(c.dataset.path);
  resolve(c.embedding.precomputed_path);
  resolve(c.output_dir);
  return c;
}

/// Canonical form; output_dir excluded so relocating outputs keeps the hash.
inline json to_json(const ExperimentConfig& c) {
  json modes = json::array(), strategies = json::array(), targets = json::array(), rows = json::array();
  for (Mode m : c.prompting_modes) modes.push_back(prompting::name(m));
  for (Strategy s : c.strategies) strategies.push_back(select::name(s));
  for (Label l : c.target_classes) targets.push_back(name(l));
  for (const auto& r : c.configurations)
    rows.push_back({{"mode", prompting::name(r.mode)}, {"strategy", select::name(r.strategy)}, {"k", r.k}});
  const auto& m = c.dataset.columns;
  json j{
      {"dataset",
       {{"path", c.dataset.path},
        {"name", c.dataset.name},
        {"columns",
         {{"id", m.id}, {"headline", m.headline}, {"content", m.content}, {"category", m.category},
          {"label", m.label}, {"provenance", m.provenance}, {"parent_id", m.parent_id}}}}},
      {"split",
       {{"train_fraction", {c.split.train_fraction.num, c.split.train_fraction.den}},
        {"strata", c.split.strata},
        {"seed", c.split.seed}}},
      {"n_variants", c.n_variants},
      {"prompting_modes", modes},
      {"k_values", c.k_values},
      {"strategies", strategies},
      {"configurations", rows},
      {"target_classes", targets},
      {"n_exemplars", c.n_exemplars},
      {"min_similarity", c.min_similarity ? json(*c.min_similarity) : json(nullptr)},
      {"tolerance", c.tolerance},
      {"generation",
       {{"backend", c.backend == Backend::Mock ? "mock" : "live"},
        {"endpoint_url", c.gen.endpoint_url},
        {"model_id", c.gen.model_id},
        {"temperature", c.gen.temperature},
        {"max_retries", c.gen.max_retries},
        {"api_key_env", c.gen.api_key_env},
        {"mock_seed", c.mock_seed}}},
      {"embedding",
       {{"provider", c.embedding.kind == EmbedKind::Hashing ? "hashing"
                     : c.embedding.kind == EmbedKind::Http  ? "http"
                                                            : "precomputed"},
        {"dim", c.embedding.hashing_dim},
        {"url", c.embedding.http.url},
        {"model", c.embedding.http.model},
        {"path", c.embedding.precomputed_path}}},
      {"classifier",
       {{"kind", c.classifier == ClassifierKind::Baseline ? "baseline" : "external"},
        {"epochs", c.hyper.epochs},
        {"learning_rate", c.hyper.learning_rate},
        {"l2", c.hyper.l2},
        {"batch_size", c.hyper.batch_size},
        {"max_features", c.hyper.max_features},
        {"seed", c.hyper.seed}}},
      {"run_seed", c.run_seed},
  };
  return j;
}

inline std::string config_hash(const ExperimentConfig& c) {
  return sha256_hex(to_json(c).dump()).substr(0, 12);
}

/// Semantic checks beyond the schema: paths, column mapping, sweep bounds,
/// credentials for live backends.
inline std::vector<Diagnostic> validate(const ExperimentConfig& c) {
  std::vector<Diagnostic> d;
  std::error_code ec;
  if (c.dataset.path.empty() || !std::filesystem::exists(c.dataset.path, ec)) {
    d.push_back({"PATH_NOT_FOUND", "/dataset/path", "dataset file not found: " + c.dataset.path});
  } else {
    try {
      auto data = csv::read_file(c.dataset.path);
      auto eol = data.find('\n');
      auto header = csv::parse(data.substr(0, eol == std::string::npos ? data.size() : eol + 1)).header;
      const auto& m = c.dataset.columns;
      for (auto [field, column] : {std::pair{"id", &m.id}, {"headline", &m.headline}, {"content", &m.content},
                                   {"category", &m.category}, {"label", &m.label}})
        if (std::find(header.begin(), header.end(), *column) == header.end())
          d.push_back({"MISSING_COLUMN", std::string("/dataset/columns/") + field,
                       "column '" + *column + "' not in dataset header"});
    } catch (const Error& e) {
      d.push_back({"UNREADABLE_DATASET", "/dataset/path", e.what()});
    }
  }
  auto rows = c.sweep();
  if (rows.empty()) d.push_back({"EMPTY_SWEEP", "/k_values", "no configurations to run"});
  auto check_k = [&](int k, const std::string& path) {
    if (k < 1) d.push_back({"K_INVALID", path, "k must be >= 1"});
    else if (k > c.n_variants)
      d.push_back({"K_EXCEEDS_N", path,
                   "k=" + std::to_string(k) + " exceeds n_variants=" + std::to_string(c.n_variants)});
  };
  if (c.configurations.empty()) {
    for (std::size_t i = 0; i < c.k_values.size(); ++i) check_k(c.k_values[i], "/k_values/" + std::to_string(i));
  } else {
    for (std::size_t i = 0; i < c.configurations.size(); ++i)
      check_k(c.configurations[i].k, "/configurations/" + std::to_string(i) + "/k");
  }
  if (c.target_classes.empty()) d.push_back({"EMPTY_SWEEP", "/target_classes", "no target class"});
  const bool few_shot = std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.mode == Mode::FewShot; });
  if (few_shot && c.n_exemplars == 0)
    d.push_back({"INVALID_VALUE", "/n_exemplars", "few-shot prompting needs at least one exemplar"});
  if (c.backend == Backend::Live) {
    try {
      http::parse_endpoint(c.gen.endpoint_url);
    } catch (const Error& e) {
      d.push_back({"INVALID_URL", "/generation/endpoint_url", e.what()});
    }
    if (!http::env_secret(c.gen.api_key_env))
      d.push_back({"MISSING_API_KEY", "/generation/api_key_env",
                   "environment variable " + c.gen.api_key_env + " is not set"});
  }
  const bool needs_embeddings =
      c.min_similarity || std::any_of(rows.begin(), rows.end(), [](const auto& r) {
        return r.strategy == Strategy::Similarity && !r.exhaustive;
      });
  if (needs_embeddings && c.embedding.kind == EmbedKind::Http && c.backend == Backend::Live &&
      !http::env_secret(c.embedding.http.api_key_env))
    d.push_back({"MISSING_API_KEY", "/embedding/api_key_env",
                 "environment variable " + c.embedding.http.api_key_env + " is not set"});
  if (needs_embeddings && c.embedding.kind == EmbedKind::Precomputed &&
      !std::filesystem::exists(c.embedding.precomputed_path, ec))
    d.push_back({"PATH_NOT_FOUND", "/embedding/path", "precomputed vectors not found: " + c.embedding.precomputed_path});
  return d;
}

}  // namespace augkit::run
