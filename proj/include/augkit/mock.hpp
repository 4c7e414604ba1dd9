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

#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "augkit/error.hpp"
#include "augkit/hash.hpp"
#include "augkit/prompting.hpp"
#include "augkit/text.hpp"

namespace augkit::mock {

namespace detail {

// Mutual-synonym groups; English plus common Bangla news vocabulary.
inline const std::vector<std::vector<std::string>>& synonym_groups() {
  static const std::vector<std::vector<std::string>> kGroups{
      {"said", "stated", "reported", "announced"},
      {"big", "large", "huge", "major"},
      {"small", "minor", "little"},
      {"government", "administration", "authorities"},
      {"people", "citizens", "residents", "public"},
      {"new", "recent", "latest"},
      {"city", "town", "municipality"},
      {"country", "nation", "state"},
      {"important", "significant", "crucial"},
      {"increase", "rise", "growth"},
      {"decrease", "decline", "drop"},
      {"quickly", "rapidly", "swiftly"},
      {"many", "numerous", "several"},
      {"show", "reveal", "indicate"},
      {"claim", "allege", "assert"},
      {"news", "report", "story"},
      {"official", "spokesperson", "representative"},
      {"attack", "assault", "strike"},
      {"help", "assist", "support"},
      {"began", "started", "commenced"},
      {"বলেন", "জানান", "উল্লেখ করেন"},
      {"সরকার", "প্রশাসন", "কর্তৃপক্ষ"},
      {"মানুষ", "জনগণ", "লোকজন"},
      {"বড়", "বিশাল", "বৃহৎ"},
      {"নতুন", "সাম্প্রতিক", "সদ্য"},
      {"দেশ", "রাষ্ট্র", "জাতি"},
      {"খবর", "সংবাদ", "প্রতিবেদন"},
      {"গুরুত্বপূর্ণ", "তাৎপর্যপূর্ণ", "উল্লেখযোগ্য"},
      {"শহর", "নগর", "পৌরসভা"},
      {"দ্রুত", "তাড়াতাড়ি", "শীঘ্রই"},
  };
  return kGroups;
}

inline const std::unordered_map<std::string, std::size_t>& synonym_index() {
  static const auto kIndex = [] {
    std::unordered_map<std::string, std::size_t> idx;
    const auto& groups = synonym_groups();
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (const auto& w : groups[g]) idx.emplace(w, g);
    return idx;
  }();
  return kIndex;
}

inline const std::vector<std::string>& fillers() {
  static const std::vector<std::string> kFillers{
      "Reportedly,", "According to sources,", "Notably,", "In a recent development,",
      "As reported,", "Meanwhile,", "It is learned that", "Sources said that",
  };
  return kFillers;
}

inline bool is_terminator(char32_t c) {
  return c == U'.' || c == U'!' || c == U'?' || c == U'।' || c == U'॥';
}

inline bool is_trailing_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
}

inline std::string fixed_point_normalize(std::string s) {
  for (;;) {
    auto n = prompting::normalize_candidate(s);
    if (n == s) return s;
    s = std::move(n);
  }
}

}  // namespace detail

/// Sentences with their terminators; pieces that are only punctuation or
/// whitespace are dropped.
inline std::vector<std::string> split_sentences(std::string_view content) {
  auto cps = text::decode_utf8(content);
  std::vector<std::string> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    bool substantive = false;
    for (std::size_t i = start; i < end; ++i) {
      char32_t c = cps[i];
      if (!detail::is_terminator(c) && !(c < 0x80 && text::is_space(static_cast<char>(c)))) {
        substantive = true;
        break;
      }
    }
    if (substantive) out.emplace_back(text::trim(text::encode_utf8(cps, start, end)));
    start = end;
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (!detail::is_terminator(cps[i])) continue;
    std::size_t j = i + 1;
    while (j < cps.size() && detail::is_terminator(cps[j])) ++j;
    flush(j);
    i = j - 1;
  }
  flush(cps.size());
  return out;
}

inline std::string substitute_synonyms(std::string_view sentence, std::mt19937_64& rng) {
  const auto& groups = detail::synonym_groups();
  const auto& index = detail::synonym_index();
  auto tokens = text::split_whitespace(sentence);
  std::string out;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    std::string tok = tokens[t];
    std::size_t core_end = tok.size();
    while (core_end > 0 && detail::is_trailing_punct(tok[core_end - 1])) --core_end;
    std::string core = tok.substr(0, core_end);
    std::string tail = tok.substr(core_end);
    if (tail.empty() && core.size() >= 3 && core.compare(core.size() - 3, 3, "\xE0\xA5\xA4") == 0) {
      tail = core.substr(core.size() - 3);
      core.resize(core.size() - 3);
    }
    auto it = index.find(text::lower_ascii(core));
    if (it != index.end() && uniform_below(rng, 2) == 1) {
      const auto& group = groups[it->second];
      std::string repl = group[uniform_below(rng, group.size())];
      if (!core.empty() && core[0] >= 'A' && core[0] <= 'Z' && repl[0] >= 'a' && repl[0] <= 'z')
        repl[0] = static_cast<char>(repl[0] - 'a' + 'A');
      tok = repl + tail;
    }
    if (t) out.push_back(' ');
    out += tok;
  }
  return out;
}

/// n pairwise-distinct deterministic rewrites: sentence-order rotation plus
/// seeded synonym substitution; collisions get a distinct lead-in phrase.
inline std::vector<std::string> paraphrase(std::string_view content, int n, std::uint64_t seed) {
  if (n < 1) fail(ErrorKind::Parameter, "mock generation needs n >= 1");
  auto sanitized = prompting::sanitize(content);
  auto sentences = split_sentences(sanitized);
  if (sentences.empty()) fail(ErrorKind::Parameter, "mock generation needs at least one sentence");

  std::set<std::string> seen{detail::fixed_point_normalize(std::string(text::trim(sanitized)))};
  std::vector<std::string> variants;
  std::size_t filler_cursor = 0;
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng(derive_seed(seed, "variant:" + std::to_string(i)));
    const std::size_t rot = static_cast<std::size_t>(i) % sentences.size();
    std::string body;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      if (s) body.push_back(' ');
      body += substitute_synonyms(sentences[(s + rot) % sentences.size()], rng);
    }
    std::string candidate = detail::fixed_point_normalize(body);
    const auto& fill = detail::fillers();
    for (std::size_t attempt = 0; candidate.empty() || seen.count(candidate); ++attempt) {
      std::string lead = filler_cursor < fill.size()
                             ? fill[filler_cursor]
                             : "(variant " + std::to_string(filler_cursor + 1) + ")";
      ++filler_cursor;
      candidate = detail::fixed_point_normalize(lead + " " + body);
    }
    seen.insert(candidate);
    variants.push_back(std::move(candidate));
  }
  return variants;
}

/// Offline stand-in for an LLM: always Complete.
inline prompting::CandidateSet mock_generate(const Article& article, int n, std::uint64_t seed) {
  auto raw = prompting::wrap_candidates(paraphrase(article.content, n, seed));
  return prompting::parse_candidates(article.id, std::move(raw), n);
}

}  // namespace augkit::mock
