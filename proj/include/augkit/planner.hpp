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

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "augkit/corpus.hpp"
#include "augkit/error.hpp"
#include "augkit/prompting.hpp"
#include "augkit/selection.hpp"

namespace augkit::plan {

using json = nlohmann::json;

struct AugmentPolicy {
  std::set<Label> target_classes{Label::Fake};
  int k = 1;
  select::SelectionPolicy selection{};
  prompting::Mode prompting_mode = prompting::Mode::ZeroShot;

  void validate() const {
    if (target_classes.empty()) fail(ErrorKind::Parameter, "target_classes must be non-empty");
    if (k < 1) fail(ErrorKind::Parameter, "k must be >= 1");
    if (selection.k != k) fail(ErrorKind::Parameter, "selection.k disagrees with policy k");
  }

  bool targets(Label l) const { return target_classes.count(l) != 0; }
};

struct AugmentedPlan {
  Composition expected;
  std::size_t tolerance = 0;
};

/// Targeted class with c originals: c*k synthetics, c*(k+1) total.
inline AugmentedPlan expected_composition(const Corpus& train, const AugmentPolicy& policy,
                                          std::size_t tolerance = 0) {
  policy.validate();
  if (train.has_synthetic())
    fail(ErrorKind::Provenance, "expected_composition needs an originals-only training corpus");
  AugmentedPlan plan;
  plan.tolerance = tolerance;
  auto base = composition(train);
  for (Label l : kLabels) {
    const auto c = base.at(l, Provenance::Original);
    plan.expected.at(l, Provenance::Original) = c;
    plan.expected.at(l, Provenance::Synthetic) = policy.targets(l) ? c * static_cast<std::size_t>(policy.k) : 0;
  }
  return plan;
}

inline json to_json(const Composition& c) {
  json j = json::object();
  for (Label l : kLabels)
    j[std::string(name(l))] = {{"original", c.at(l, Provenance::Original)},
                               {"synthetic", c.at(l, Provenance::Synthetic)},
                               {"total", c.label_total(l)}};
  j["total"] = c.total();
  return j;
}

inline json to_json(const AugmentPolicy& p) {
  json targets = json::array();
  for (Label l : p.target_classes) targets.push_back(name(l));
  json j{{"target_classes", targets},
         {"k", p.k},
         {"strategy", select::name(p.selection.strategy)},
         {"prompting_mode", prompting::name(p.prompting_mode)}};
  j["min_similarity"] = p.selection.min_similarity ? json(*p.selection.min_similarity) : json(nullptr);
  return j;
}

struct BuildResult {
  Corpus corpus;
  Composition expected;
  Composition actual;
  json manifest;
};

inline std::string synthetic_id(const std::string& parent, std::size_t ordinal) {
  return parent + "#aug" + std::to_string(ordinal);
}

/// Originals in train order, then one synthetic per chosen candidate,
/// grouped by parent in train order.
inline BuildResult build_augmented(const Corpus& train, const std::vector<select::SelectedSet>& selected,
                                   const AugmentPolicy& policy, std::size_t tolerance = 0,
                                   const std::unordered_set<std::string>* test_ids = nullptr) {
  auto plan = expected_composition(train, policy, tolerance);

  std::unordered_map<std::string, const select::SelectedSet*> by_source;
  for (const auto& s : selected) {
    if (test_ids && test_ids->count(s.source_id))
      fail(ErrorKind::Integrity, "test-set article " + s.source_id + " cannot seed augmentation",
           {s.source_id});
    const Article* parent = train.find(s.source_id);
    if (!parent) fail(ErrorKind::Integrity, "selected set references unknown source " + s.source_id, {s.source_id});
    if (!policy.targets(parent->label))
      fail(ErrorKind::Integrity, "source " + s.source_id + " is not in a targeted class", {s.source_id});
    if (s.chosen.size() > static_cast<std::size_t>(policy.k))
      fail(ErrorKind::Integrity, "selected set for " + s.source_id + " holds more than k candidates",
           {s.source_id});
    if (!by_source.emplace(s.source_id, &s).second)
      fail(ErrorKind::Integrity, "duplicate selected set for " + s.source_id, {s.source_id});
  }

  std::map<Label, std::size_t> deficit;
  std::vector<std::string> short_sources;
  std::size_t total_short = 0;
  json shortfalls = json::array();
  for (const auto& s : selected) {
    if (s.shortfall <= 0) continue;
    const Article* parent = train.find(s.source_id);
    deficit[parent->label] += static_cast<std::size_t>(s.shortfall);
    total_short += static_cast<std::size_t>(s.shortfall);
    short_sources.push_back(s.source_id);
    shortfalls.push_back({{"source_id", s.source_id}, {"shortfall", s.shortfall},
                          {"cause", select::name(s.cause)}});
  }
  if (total_short > tolerance) {
    std::string report;
    for (auto& [label, d] : deficit)
      report += std::string(report.empty() ? "" : "; ") + std::string(name(label)) + " short by " +
                std::to_string(d);
    fail(ErrorKind::Plan,
         report + " (tolerance " + std::to_string(tolerance) + "); sources: " + join(short_sources),
         short_sources);
  }

  std::vector<Article> articles(train.articles());
  for (const auto& parent : train) {
    auto it = by_source.find(parent.id);
    if (it == by_source.end()) continue;
    std::size_t ordinal = 0;
    for (const auto& c : it->second->chosen) {
      Article a;
      a.id = synthetic_id(parent.id, ++ordinal);
      a.headline = parent.headline;
      a.content = c.text;
      a.category = parent.category;
      a.label = parent.label;
      a.provenance = Provenance::Synthetic;
      a.parent_id = parent.id;
      articles.push_back(std::move(a));
    }
  }

  BuildResult out;
  out.corpus = Corpus(train.name() + "+aug", std::move(articles));
  out.expected = plan.expected;
  out.actual = composition(out.corpus);
  out.manifest = json{{"policy", to_json(policy)},
                      {"expected", to_json(out.expected)},
                      {"actual", to_json(out.actual)},
                      {"tolerance", tolerance},
                      {"shortfalls", shortfalls}};
  return out;
}

}  // namespace augkit::plan
