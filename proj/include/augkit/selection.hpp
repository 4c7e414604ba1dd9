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

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "augkit/embedsim.hpp"
#include "augkit/error.hpp"
#include "augkit/hash.hpp"
#include "augkit/prompting.hpp"

namespace augkit::select {

using json = nlohmann::json;

enum class Strategy { Random, Similarity };

inline std::string_view name(Strategy s) { return s == Strategy::Random ? "random" : "similarity"; }
inline std::string_view short_name(Strategy s) { return s == Strategy::Random ? "R" : "S"; }

inline std::optional<Strategy> parse_strategy(std::string_view s) {
  if (s == "random" || s == "R") return Strategy::Random;
  if (s == "similarity" || s == "S") return Strategy::Similarity;
  return std::nullopt;
}

/// cos >= 0.7 floor; off unless requested.
inline constexpr double kTightQualityFloor = 0.7;

struct SelectionPolicy {
  Strategy strategy = Strategy::Random;
  int k = 1;
  std::uint64_t seed = 0;
  std::optional<double> min_similarity;

  void validate() const {
    if (k < 1) fail(ErrorKind::Parameter, "selection k must be >= 1");
    if (min_similarity && !(*min_similarity >= -1.0 && *min_similarity <= 1.0))
      fail(ErrorKind::Parameter, "min_similarity must lie in [-1, 1]");
  }

  bool needs_scores() const { return strategy == Strategy::Similarity || min_similarity.has_value(); }
};

enum class ShortfallCause { None, ParseFailed, SmallPool, BelowFloor };

inline std::string_view name(ShortfallCause c) {
  switch (c) {
    case ShortfallCause::None: return "none";
    case ShortfallCause::ParseFailed: return "parse_failed";
    case ShortfallCause::SmallPool: return "small_pool";
    case ShortfallCause::BelowFloor: return "below_floor";
  }
  return "none";
}

struct Chosen {
  std::string text;
  std::optional<double> similarity;
  std::size_t index = 0;  // position in the candidate pool

  bool operator==(const Chosen&) const = default;
};

struct SelectedSet {
  std::string source_id;
  Strategy strategy = Strategy::Random;
  int k = 0;
  std::vector<Chosen> chosen;
  int shortfall = 0;
  ShortfallCause cause = ShortfallCause::None;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<std::size_t> eligible(std::size_t pool, std::span<const double> scores,
                                         const SelectionPolicy& policy) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < pool; ++i)
    if (!policy.min_similarity || scores[i] >= *policy.min_similarity) idx.push_back(i);
  return idx;
}

inline void finish(SelectedSet& set, std::size_t pool, std::size_t eligible_count) {
  set.shortfall = set.k - static_cast<int>(set.chosen.size());
  if (set.shortfall == 0) return;
  if (pool == 0) {
    set.cause = ShortfallCause::ParseFailed;
    set.warnings.push_back("empty candidate pool for " + set.source_id);
  } else {
    set.cause = eligible_count < pool ? ShortfallCause::BelowFloor : ShortfallCause::SmallPool;
  }
  if (eligible_count == 0 && pool > 0)
    set.warnings.push_back("no candidate of " + set.source_id + " clears the similarity floor");
}

inline void check_scores(std::size_t pool, std::span<const double> scores,
                         const SelectionPolicy& policy) {
  if (policy.needs_scores() && scores.size() != pool)
    fail(ErrorKind::Parameter, "similarity scores required for every candidate");
}

}  // namespace detail

/// Uniform K-subset without replacement (partial Fisher-Yates) over the
/// floor-filtered pool; reported in pool order.
inline SelectedSet select_random(std::string source_id, std::span<const std::string> candidates,
                                 const SelectionPolicy& policy, std::span<const double> scores = {}) {
  policy.validate();
  if (policy.strategy != Strategy::Random) fail(ErrorKind::Parameter, "select_random needs Random strategy");
  detail::check_scores(candidates.size(), scores, policy);
  SelectedSet set{std::move(source_id), Strategy::Random, policy.k, {}, 0, {}, {}};
  auto pool = detail::eligible(candidates.size(), scores, policy);
  std::mt19937_64 rng(policy.seed);
  const std::size_t take = std::min(pool.size(), static_cast<std::size_t>(policy.k));
  for (std::size_t i = 0; i < take; ++i) {
    auto j = i + static_cast<std::size_t>(uniform_below(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<std::size_t> picked(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(picked.begin(), picked.end());
  for (auto i : picked)
    set.chosen.push_back({candidates[i],
                          policy.min_similarity ? std::optional<double>(scores[i]) : std::nullopt, i});
  detail::finish(set, candidates.size(), detail::eligible(candidates.size(), scores, policy).size());
  return set;
}

/// Top-K by score, descending; ties keep pool order.
inline SelectedSet select_top_k(std::string source_id, std::span<const std::string> candidates,
                                std::span<const double> scores, const SelectionPolicy& policy) {
  policy.validate();
  if (policy.strategy != Strategy::Similarity)
    fail(ErrorKind::Parameter, "select_top_k needs Similarity strategy");
  detail::check_scores(candidates.size(), scores, policy);
  SelectedSet set{std::move(source_id), Strategy::Similarity, policy.k, {}, 0, {}, {}};
  auto pool = detail::eligible(candidates.size(), scores, policy);
  const std::size_t eligible_count = pool.size();
  std::stable_sort(pool.begin(), pool.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  pool.resize(std::min(pool.size(), static_cast<std::size_t>(policy.k)));
  for (auto i : pool) set.chosen.push_back({candidates[i], scores[i], i});
  detail::finish(set, candidates.size(), eligible_count);
  return set;
}

/// Cosine of each candidate against the source, via one embed() call.
inline std::vector<double> similarity_scores(const std::string& source,
                                             std::span<const std::string> candidates,
                                             embed::EmbedProvider& provider,
                                             embed::EmbedCache* cache = nullptr) {
  std::vector<std::string> texts{source};
  texts.insert(texts.end(), candidates.begin(), candidates.end());
  auto vecs = embed::embed(texts, provider, cache);
  std::vector<double> out;
  for (std::size_t i = 1; i < vecs.size(); ++i) out.push_back(embed::cosine(vecs[0], vecs[i]));
  return out;
}

inline SelectedSet select_similar(std::string source_id, std::span<const std::string> candidates,
                                  const std::string& source_text, const SelectionPolicy& policy,
                                  embed::EmbedProvider& provider, embed::EmbedCache* cache = nullptr) {
  auto scores = similarity_scores(source_text, candidates, provider, cache);
  return select_top_k(std::move(source_id), candidates, scores, policy);
}

struct ApplySummary {
  std::size_t total_chosen = 0;
  std::size_t total_shortfall = 0;
  std::map<std::string, std::size_t> shortfall_by_cause;
  std::vector<std::string> warnings;
};

struct ApplyResult {
  std::vector<SelectedSet> sets;  // source order
  ApplySummary summary;
};

/// Per-article selection with seed = derive_seed(policy.seed, source_id).
/// `source_text` maps source ids to the text candidates are compared with.
inline ApplyResult apply_policy(const std::vector<prompting::CandidateSet>& pools,
                                const SelectionPolicy& policy,
                                const std::unordered_map<std::string, std::string>& source_text = {},
                                embed::EmbedProvider* provider = nullptr,
                                embed::EmbedCache* cache = nullptr, int max_inflight = 1) {
  policy.validate();
  std::vector<std::vector<double>> scores(pools.size());
  if (policy.needs_scores()) {
    if (!provider) fail(ErrorKind::Parameter, "similarity selection needs an embedding provider");
    std::vector<std::string> texts;
    for (const auto& p : pools) {
      if (p.candidates.empty()) continue;
      auto it = source_text.find(p.source_id);
      if (it == source_text.end())
        fail(ErrorKind::Parameter, "no source text for " + p.source_id, {p.source_id});
      texts.push_back(it->second);
      texts.insert(texts.end(), p.candidates.begin(), p.candidates.end());
    }
    auto vecs = embed::embed(texts, *provider, cache, max_inflight);
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < pools.size(); ++i) {
      if (pools[i].candidates.empty()) continue;
      const auto& src = vecs[cursor++];
      for (std::size_t c = 0; c < pools[i].candidates.size(); ++c)
        scores[i].push_back(embed::cosine(src, vecs[cursor++]));
    }
  }

  ApplyResult result;
  for (std::size_t i = 0; i < pools.size(); ++i) {
    auto local = policy;
    local.seed = derive_seed(policy.seed, pools[i].source_id);
    auto set = policy.strategy == Strategy::Random
                   ? select_random(pools[i].source_id, pools[i].candidates, local, scores[i])
                   : select_top_k(pools[i].source_id, pools[i].candidates, scores[i], local);
    result.summary.total_chosen += set.chosen.size();
    result.summary.total_shortfall += static_cast<std::size_t>(set.shortfall);
    if (set.shortfall) result.summary.shortfall_by_cause[std::string(name(set.cause))] += set.shortfall;
    for (const auto& w : set.warnings) result.summary.warnings.push_back(w);
    result.sets.push_back(std::move(set));
  }
  return result;
}

inline json to_json(const SelectedSet& s) {
  json chosen = json::array();
  for (const auto& c : s.chosen) {
    json e{{"text", c.text}, {"index", c.index}};
    if (c.similarity) e["similarity"] = *c.similarity;
    chosen.push_back(std::move(e));
  }
  return json{{"source_id", s.source_id},
              {"strategy", name(s.strategy)},
              {"k", s.k},
              {"chosen", std::move(chosen)},
              {"shortfall", s.shortfall},
              {"cause", name(s.cause)}};
}

inline SelectedSet selected_from_json(const json& j) {
  SelectedSet s;
  s.source_id = j.at("source_id").get<std::string>();
  auto strat = parse_strategy(j.at("strategy").get<std::string>());
  if (!strat) fail(ErrorKind::Schema, "unknown strategy in selected set " + s.source_id);
  s.strategy = *strat;
  s.k = j.at("k").get<int>();
  s.shortfall = j.at("shortfall").get<int>();
  const auto cause = j.value("cause", std::string("none"));
  for (auto c : {ShortfallCause::None, ShortfallCause::ParseFailed, ShortfallCause::SmallPool, ShortfallCause::BelowFloor})
    if (name(c) == cause) s.cause = c;
  std::size_t i = 0;
  for (const auto& c : j.at("chosen")) {
    Chosen ch{c.at("text").get<std::string>(), std::nullopt, c.value("index", i)};
    ++i;
    if (c.contains("similarity")) ch.similarity = c["similarity"].get<double>();
    s.chosen.push_back(std::move(ch));
  }
  return s;
}

}  // namespace augkit::select
