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

#include <gtest/gtest.h>

#include <fstream>

#include "augkit/config.hpp"
#include "support.hpp"

using namespace augkit;
using namespace augkit::run;
using augkit::testing::TempDir;
using nlohmann::json;

namespace {

struct Fixture {
  TempDir dir;
  std::string csv_path;

  Fixture() {
    csv_path = (dir / "data.csv").string();
    std::ofstream out(csv_path);
    out << "id,headline,content,category,label\na,h,Some text.,c,1\nb,h,Other text.,c,0\n";
  }

  json base() const {
    return {{"dataset", {{"path", csv_path}}},
            {"k_values", {1, 5}},
            {"strategies", {"random"}},
            {"generation", {{"backend", "mock"}}},
            {"output_dir", (dir / "out").string()}};
  }
};

std::vector<std::string> codes(const std::vector<Diagnostic>& d) {
  std::vector<std::string> out;
  for (const auto& x : d) out.push_back(x.code);
  return out;
}

std::vector<Diagnostic> parse_diags(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.diagnostics();
  }
  return {};
}

bool has(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

}  // namespace

TEST(ConfigParse, ValidMockConfigHasNoDiagnostics) {
  Fixture f;
  auto cfg = parse_config(f.base());
  EXPECT_TRUE(validate(cfg).empty());
  EXPECT_EQ(cfg.n_variants, 5);
  EXPECT_EQ(cfg.target_classes, std::set<Label>{Label::Fake});
}

TEST(ConfigParse, SweepArithmetic) {
  Fixture f;
  auto rows = parse_config(f.base()).sweep();
  ASSERT_EQ(rows.size(), 2u);  // plus the baseline row
  EXPECT_EQ(rows[0].tag(), "ZS R, K=1");
  EXPECT_EQ(rows[1].tag(), "ZS K=5 (exhaustive)");
  EXPECT_EQ(rows[1].slug(), "zs-k5-exhaustive");
}

TEST(ConfigParse, CrossProductCollapsesExhaustiveTwins) {
  Fixture f;
  auto j = f.base();
  j["k_values"] = {1, 2, 3, 5};
  j["strategies"] = {"random", "similarity"};
  j["prompting_modes"] = {"zero_shot", "few_shot"};
  auto rows = parse_config(j).sweep();
  EXPECT_EQ(rows.size(), 14u);  // 2 modes x (3 k x 2 strategies + 1 exhaustive)
}

TEST(ConfigParse, ComparisonTableRowSet) {
  auto cfg = load_config(std::string(AUGKIT_SOURCE_DIR) + "/configs/live_sweep.json");
  std::vector<std::string> tags;
  for (const auto& r : cfg.sweep()) tags.push_back(r.tag());
  const std::vector<std::string> expected{"ZS K=5 (exhaustive)", "ZS R, K=3", "ZS S, K=1", "ZS S, K=2", "ZS S, K=3",
                                          "FS K=5 (exhaustive)", "FS R, K=3", "FS S, K=1", "FS S, K=2", "FS S, K=3"};
  EXPECT_EQ(tags, expected);
  EXPECT_EQ(cfg.gen.model_id, "gemma-3-27b-it");
  EXPECT_EQ(cfg.gen.temperature, 1.0);
  EXPECT_EQ(cfg.classifier, ClassifierKind::External);
}

TEST(ConfigParse, UnknownFieldAndTypeMismatchCarryPaths) {
  Fixture f;
  auto j = f.base();
  j["colour"] = "red";
  j["n_variants"] = "five";
  j["generation"]["max_inflight"] = 0;
  auto d = parse_diags(j);
  auto c = codes(d);
  EXPECT_TRUE(has(c, "UNKNOWN_FIELD"));
  EXPECT_TRUE(has(c, "TYPE_MISMATCH"));
  EXPECT_TRUE(has(c, "INVALID_VALUE"));
  bool path_ok = false;
  for (const auto& x : d) path_ok |= x.path == "/generation/max_inflight";
  EXPECT_TRUE(path_ok);
}

TEST(ConfigParse, MissingDatasetAndEmptySweeps) {
  auto c = codes(parse_diags(json{{"k_values", json::array()}}));
  EXPECT_TRUE(has(c, "MISSING_FIELD"));
  EXPECT_TRUE(has(c, "EMPTY_SWEEP"));
  Fixture f;
  auto j = f.base();
  j["split"] = {{"train_fraction", 1.5}};
  EXPECT_TRUE(has(codes(parse_diags(j)), "FRACTION_OUT_OF_RANGE"));
}

TEST(ConfigValidate, KExceedsN) {
  Fixture f;
  auto j = f.base();
  j["k_values"] = {7};
  auto d = validate(parse_config(j));
  ASSERT_EQ(codes(d), std::vector<std::string>{"K_EXCEEDS_N"});
  EXPECT_EQ(d[0].path, "/k_values/0");
}

TEST(ConfigValidate, MissingApiKeyNamesTheVariable) {
  Fixture f;
  auto j = f.base();
  j["generation"] = {{"backend", "live"}, {"endpoint_url", "https://api.example/v1"}, {"api_key_env", "AUGKIT_TEST_ABSENT_KEY"}};
  ::unsetenv("AUGKIT_TEST_ABSENT_KEY");
  auto d = validate(parse_config(j));
  ASSERT_EQ(codes(d), std::vector<std::string>{"MISSING_API_KEY"});
  EXPECT_NE(d[0].message.find("AUGKIT_TEST_ABSENT_KEY"), std::string::npos);
  ::setenv("AUGKIT_TEST_ABSENT_KEY", "x", 1);
  EXPECT_TRUE(validate(parse_config(j)).empty());
  ::unsetenv("AUGKIT_TEST_ABSENT_KEY");
}

TEST(ConfigValidate, PathsAndColumns) {
  Fixture f;
  auto j = f.base();
  j["dataset"]["path"] = (f.dir / "nope.csv").string();
  EXPECT_EQ(codes(validate(parse_config(j))), std::vector<std::string>{"PATH_NOT_FOUND"});
  j = f.base();
  j["dataset"]["columns"] = {{"content", "body"}};
  auto d = validate(parse_config(j));
  ASSERT_EQ(codes(d), std::vector<std::string>{"MISSING_COLUMN"});
  EXPECT_EQ(d[0].path, "/dataset/columns/content");
  j = f.base();
  j["strategies"] = {"similarity"};
  j["embedding"] = {{"provider", "precomputed"}, {"path", (f.dir / "missing.jsonl").string()}};
  EXPECT_EQ(codes(validate(parse_config(j))), std::vector<std::string>{"PATH_NOT_FOUND"});
}

TEST(ConfigHash, StableAndIgnoresOutputDir) {
  Fixture f;
  auto a = parse_config(f.base());
  auto j = f.base();
  j["output_dir"] = "/elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(parse_config(j)));
  j["run_seed"] = 3;
  EXPECT_NE(config_hash(a), config_hash(parse_config(j)));
  EXPECT_EQ(config_hash(a).size(), 12u);
}

TEST(ConfigSeed, RunSeedPropagatesUnlessExplicit) {
  Fixture f;
  auto j = f.base();
  j["run_seed"] = 9;
  auto c = parse_config(j);
  EXPECT_EQ(c.split.seed, 9u);
  EXPECT_EQ(c.hyper.seed, 9u);
  j["split"] = {{"seed", 1}};
  c = parse_config(j);
  EXPECT_EQ(c.split.seed, 1u);
  c.set_run_seed(4);
  EXPECT_EQ(c.split.seed, 1u);
  EXPECT_EQ(c.hyper.seed, 4u);
}

TEST(ConfigLoad, RelativePathsResolveAgainstConfigFile) {
  Fixture f;
  auto j = f.base();
  j["dataset"]["path"] = "data.csv";
  j["output_dir"] = "out";
  auto path = f.dir / "cfg.json";
  std::ofstream(path) << j.dump();
  auto c = load_config(path.string());
  EXPECT_EQ(c.dataset.path, f.csv_path);
  EXPECT_EQ(c.output_dir, (f.dir / "out").string());
  std::ofstream(path) << "{ not json";
  try {
    load_config(path.string());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.diagnostics().at(0).code, "INVALID_JSON");
  }
}

TEST(ConfigParse, QualityFloorPreset) {
  Fixture f;
  auto j = f.base();
  j["quality_floor"] = true;
  EXPECT_EQ(parse_config(j).min_similarity, 0.7);
  j["min_similarity"] = 0.5;
  EXPECT_TRUE(has(codes(parse_diags(j)), "INVALID_VALUE"));
}
