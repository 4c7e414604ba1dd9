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
#include <array>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "augkit/corpus.hpp"
#include "augkit/error.hpp"
#include "augkit/hash.hpp"
#include "augkit/text.hpp"

namespace augkit::prompting {

// Wire-level delimiters. Bit-exact ASCII; never localize.
inline constexpr std::string_view kBeginTag = "[BEGINARTICLE]";
inline constexpr std::string_view kEndTag = "[ENDARTICLE]";
inline constexpr std::string_view kFence = "```";
inline constexpr std::string_view kOutputHeader = "NUMBERED GENERATED ARTICLES:";

enum class Mode { ZeroShot, FewShot };

inline std::string_view name(Mode m) { return m == Mode::ZeroShot ? "zero_shot" : "few_shot"; }
inline std::string_view short_name(Mode m) { return m == Mode::ZeroShot ? "ZS" : "FS"; }

struct PromptRequest {
  Article source;
  int n_variants = 5;
  Mode mode = Mode::ZeroShot;
  std::vector<Article> exemplars;
};

struct Prompt {
  std::string text;
  std::vector<std::string> warnings;
};

/// Breaks delimiter look-alikes by inserting spaces: backquote runs never
/// reach three, no leading/trailing backquote can fuse with a fence, and the
/// article tags are split.
inline std::string sanitize(std::string_view body, std::vector<std::string>* warnings = nullptr) {
  std::string out;
  out.reserve(body.size() + 8);
  bool touched = false;
  int run = 0;
  for (char c : body) {
    if (c == '`') {
      if (run == 2) {
        out.push_back(' ');
        run = 0;
        touched = true;
      }
      ++run;
    } else {
      run = 0;
    }
    out.push_back(c);
  }
  if (!out.empty() && out.front() == '`') {
    out.insert(out.begin(), ' ');
    touched = true;
  }
  if (!out.empty() && out.back() == '`') {
    out.push_back(' ');
    touched = true;
  }
  if (out.find(kBeginTag) != std::string::npos || out.find(kEndTag) != std::string::npos) {
    out = text::replace_all(out, kBeginTag, "[BEGIN ARTICLE]");
    out = text::replace_all(out, kEndTag, "[END ARTICLE]");
    touched = true;
  }
  if (touched && warnings) warnings->push_back("delimiter-like sequences escaped in article text");
  return out;
}

namespace detail {

inline std::string zero_shot_body(std::string_view sanitized_content, int n) {
  std::string s;
  s += "Paraphrase the following news article delimited by triple backquotes in ";
  s += std::to_string(n);
  s += " different ways. The generated articles must retain the exact same meaning, facts, "
       "and label (real/fake) as the original article. Maintain the article format and length. "
       "Only return the articles and no extra explanation. Enclose each paraphrased article "
       "within ";
  s += kBeginTag;
  s += " and ";
  s += kEndTag;
  s += " tags.\n\n";
  s += kFence;
  s += sanitized_content;
  s += kFence;
  s += "\n\n";
  s += kOutputHeader;
  return s;
}

inline void check_common(const PromptRequest& req) {
  if (req.n_variants < 1) fail(ErrorKind::Parameter, "n_variants must be >= 1");
  if (text::trim(req.source.content).empty())
    fail(ErrorKind::Parameter, "source article " + req.source.id + " has empty content",
         {req.source.id});
}

}  // namespace detail

inline Prompt build_zero_shot(const PromptRequest& req) {
  if (req.mode != Mode::ZeroShot) fail(ErrorKind::Parameter, "build_zero_shot needs ZeroShot mode");
  detail::check_common(req);
  Prompt p;
  p.text = detail::zero_shot_body(sanitize(req.source.content, &p.warnings), req.n_variants);
  return p;
}

/// Input-only exemplar blocks under an EXAMPLES: header, then the zero-shot body.
inline Prompt build_few_shot(const PromptRequest& req) {
  if (req.mode != Mode::FewShot) fail(ErrorKind::Parameter, "build_few_shot needs FewShot mode");
  detail::check_common(req);
  if (req.exemplars.empty()) fail(ErrorKind::Parameter, "few-shot prompt needs at least one exemplar");
  Prompt p;
  p.text = "EXAMPLES:\n\n";
  for (std::size_t i = 0; i < req.exemplars.size(); ++i) {
    const auto& ex = req.exemplars[i];
    if (ex.label != req.source.label)
      fail(ErrorKind::Parameter, "exemplar " + ex.id + " label differs from source " + req.source.id,
           {ex.id});
    if (text::trim(ex.content).empty())
      fail(ErrorKind::Parameter, "exemplar " + ex.id + " has empty content", {ex.id});
    p.text += "Example " + std::to_string(i + 1) + ":\n";
    p.text += kFence;
    p.text += sanitize(ex.content, &p.warnings);
    p.text += kFence;
    p.text += "\n\n";
  }
  p.text += detail::zero_shot_body(sanitize(req.source.content, &p.warnings), req.n_variants);
  return p;
}

inline Prompt build(const PromptRequest& req) {
  return req.mode == Mode::ZeroShot ? build_zero_shot(req) : build_few_shot(req);
}

enum class ParseStatus { Complete, Partial, Failed };

inline std::string_view name(ParseStatus s) {
  switch (s) {
    case ParseStatus::Complete: return "complete";
    case ParseStatus::Partial: return "partial";
    case ParseStatus::Failed: return "failed";
  }
  return "failed";
}

inline std::optional<ParseStatus> parse_status_from(std::string_view s) {
  if (s == "complete") return ParseStatus::Complete;
  if (s == "partial") return ParseStatus::Partial;
  if (s == "failed") return ParseStatus::Failed;
  return std::nullopt;
}

struct CandidateSet {
  std::string source_id;
  std::string raw_response;
  std::vector<std::string> candidates;
  ParseStatus status = ParseStatus::Failed;
  int requested_n = 0;
  /// Tag pairs beyond requested_n; kept in candidates.
  int surplus = 0;

  bool operator==(const CandidateSet&) const = default;
};

namespace detail {

// Returns byte length of a digit at s[i] (ASCII or Bangla U+09E6..U+09EF), 0 otherwise.
inline std::size_t digit_len(std::string_view s, std::size_t i) {
  if (i < s.size() && s[i] >= '0' && s[i] <= '9') return 1;
  if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE0 &&
      static_cast<unsigned char>(s[i + 1]) == 0xA7) {
    auto c = static_cast<unsigned char>(s[i + 2]);
    if (c >= 0xA6 && c <= 0xAF) return 3;
  }
  return 0;
}

inline std::size_t marker_len(std::string_view s, std::size_t i) {
  if (i < s.size() && (s[i] == '.' || s[i] == ')' || s[i] == ':')) return 1;
  if (s.substr(i, 3) == "\xE0\xA5\xA4") return 3;  // U+0964 danda
  return 0;
}

}  // namespace detail

/// Trims and removes one leading enumeration marker ("1.", "1)", "১।").
inline std::string normalize_candidate(std::string_view raw) {
  auto s = text::trim(raw);
  std::size_t i = 0;
  int digits = 0;
  while (digits < 4) {
    auto len = detail::digit_len(s, i);
    if (!len) break;
    i += len;
    ++digits;
  }
  if (digits >= 1 && digits <= 3) {
    if (auto m = detail::marker_len(s, i); m && (i + m == s.size() || text::is_space(s[i + m])))
      s = text::trim(s.substr(i + m));
  }
  return std::string(s);
}

/// Well-paired tag extraction: each end tag closes the nearest preceding
/// begin tag; unclosed or stray tags are ignored.
inline CandidateSet parse_candidates(std::string source_id, std::string raw, int requested_n) {
  CandidateSet set;
  set.source_id = std::move(source_id);
  set.requested_n = requested_n;
  std::string_view view(raw);
  std::size_t pos = 0;
  while (true) {
    auto b = view.find(kBeginTag, pos);
    if (b == std::string_view::npos) break;
    auto e = view.find(kEndTag, b + kBeginTag.size());
    if (e == std::string_view::npos) break;
    b = view.rfind(kBeginTag, e);
    auto body = view.substr(b + kBeginTag.size(), e - b - kBeginTag.size());
    auto cleaned = normalize_candidate(body);
    if (!cleaned.empty()) set.candidates.push_back(std::move(cleaned));
    pos = e + kEndTag.size();
  }
  const int got = static_cast<int>(set.candidates.size());
  set.status = got == 0 ? ParseStatus::Failed
               : got < requested_n ? ParseStatus::Partial
                                   : ParseStatus::Complete;
  set.surplus = std::max(0, got - requested_n);
  set.raw_response = std::move(raw);
  return set;
}

/// Canonical tagged rendering, as the mock backend and tests produce it.
inline std::string wrap_candidates(const std::vector<std::string>& texts) {
  std::string out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out += std::to_string(i + 1) + ". ";
    out += kBeginTag;
    out += texts[i];
    out += kEndTag;
    out += "\n";
  }
  return out;
}

/// Few-shot exemplars fixed per run: per label, a seeded draw of count+1
/// training originals; an article never serves as its own exemplar.
class ExemplarBank {
 public:
  ExemplarBank() = default;

  ExemplarBank(const Corpus& train, std::size_t count, std::uint64_t seed) : count_(count) {
    for (Label label : kLabels) {
      std::vector<const Article*> pool;
      for (const auto& a : train)
        if (a.label == label && a.provenance == Provenance::Original) pool.push_back(&a);
      std::mt19937_64 rng(derive_seed(seed, "exemplars:" + std::string(name(label))));
      seeded_shuffle(pool, rng);
      auto& dst = drawn_[code(label)];
      for (std::size_t i = 0; i < pool.size() && i < count + 1; ++i) dst.push_back(*pool[i]);
    }
  }

  std::vector<Article> for_source(const Article& source) const {
    std::vector<Article> out;
    for (const auto& a : drawn_[code(source.label)]) {
      if (out.size() == count_) break;
      if (a.id != source.id) out.push_back(a);
    }
    return out;
  }

  std::size_t count() const { return count_; }

 private:
  std::size_t count_ = 0;
  std::array<std::vector<Article>, 2> drawn_;
};

}  // namespace augkit::prompting
