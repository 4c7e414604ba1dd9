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

#include <random>

#include "augkit/prompting.hpp"
#include "support.hpp"

using namespace augkit;
using namespace augkit::prompting;
using augkit::testing::article;
using augkit::testing::toy_corpus;

namespace {

const char* kZeroShotGolden =
    "Paraphrase the following news article delimited by triple backquotes in 5 different ways. "
    "The generated articles must retain the exact same meaning, facts, and label (real/fake) as the "
    "original article. Maintain the article format and length. Only return the articles and no extra "
    "explanation. Enclose each paraphrased article within [BEGINARTICLE] and [ENDARTICLE] tags.\n\n"
    "```ঢাকায় বৃষ্টি হয়েছে।```\n\nNUMBERED GENERATED ARTICLES:";

}  // namespace

TEST(Prompt, ZeroShotMatchesTemplateByteForByte) {
  PromptRequest req{article("a", Label::Fake, "ঢাকায় বৃষ্টি হয়েছে।"), 5, Mode::ZeroShot, {}};
  auto p = build(req);
  EXPECT_EQ(p.text, kZeroShotGolden);
  EXPECT_TRUE(p.warnings.empty());
}

TEST(Prompt, VariantCountIsInterpolated) {
  PromptRequest req{article("a", Label::Fake, "x"), 3, Mode::ZeroShot, {}};
  EXPECT_NE(build(req).text.find("in 3 different ways"), std::string::npos);
  req.n_variants = 0;
  EXPECT_THROW(build(req), Error);
}

TEST(Prompt, FewShotPrependsExemplarsAndKeepsBody) {
  auto src = article("s", Label::Fake, "ঢাকায় বৃষ্টি হয়েছে।");
  PromptRequest req{src, 5, Mode::FewShot,
                    {article("e1", Label::Fake, "first example"), article("e2", Label::Fake, "second example")}};
  auto p = build(req);
  const std::string head = "EXAMPLES:\n\nExample 1:\n```first example```\n\nExample 2:\n```second example```\n\n";
  ASSERT_EQ(p.text.substr(0, head.size()), head);
  EXPECT_EQ(p.text.substr(head.size()), kZeroShotGolden);
}

TEST(Prompt, FewShotRejectsMismatchedOrMissingExemplars) {
  PromptRequest req{article("s", Label::Fake, "x"), 5, Mode::FewShot, {article("e", Label::Real, "y")}};
  EXPECT_THROW(build(req), Error);
  req.exemplars.clear();
  EXPECT_THROW(build(req), Error);
}

TEST(Prompt, EmptySourceRejected) {
  PromptRequest req{article("s", Label::Fake, "   "), 5, Mode::ZeroShot, {}};
  EXPECT_THROW(build(req), Error);
}

TEST(Sanitize, BreaksFencesAndTags) {
  std::vector<std::string> w;
  auto s = sanitize("code ```x``` and [BEGINARTICLE]y[ENDARTICLE]`", &w);
  EXPECT_EQ(s.find("```"), std::string::npos);
  EXPECT_EQ(s.find(kBeginTag), std::string::npos);
  EXPECT_EQ(s.find(kEndTag), std::string::npos);
  EXPECT_NE(s.back(), '`');
  EXPECT_EQ(w.size(), 1u);
  w.clear();
  EXPECT_EQ(sanitize("plain text", &w), "plain text");
  EXPECT_TRUE(w.empty());
}

TEST(Sanitize, PromptAlwaysHasExactlyTwoFencesForAnyInput) {
  std::mt19937_64 rng(3);
  const std::string alphabet = "`ab [].\n";
  for (int trial = 0; trial < 2000; ++trial) {
    std::string body;
    auto len = 1 + rng() % 20;
    for (std::size_t i = 0; i < len; ++i) body.push_back(alphabet[rng() % alphabet.size()]);
    if (text::trim(body).empty()) body += "z";
    PromptRequest req{article("a", Label::Fake, body), 5, Mode::ZeroShot, {}};
    auto p = build(req);
    EXPECT_EQ(text::count_occurrences(p.text, "```"), 2u) << body;
  }
}

TEST(Parser, CompleteSetInOrder) {
  auto raw = wrap_candidates({"one", "two", "three"});
  auto set = parse_candidates("a", raw, 3);
  EXPECT_EQ(set.status, ParseStatus::Complete);
  EXPECT_EQ(set.candidates, (std::vector<std::string>{"one", "two", "three"}));
  EXPECT_EQ(set.raw_response, raw);
  EXPECT_EQ(set.surplus, 0);
}

TEST(Parser, PartialFailedAndSurplus) {
  EXPECT_EQ(parse_candidates("a", wrap_candidates({"x", "y"}), 5).status, ParseStatus::Partial);
  EXPECT_EQ(parse_candidates("a", "no tags here", 5).status, ParseStatus::Failed);
  EXPECT_EQ(parse_candidates("a", "", 5).status, ParseStatus::Failed);
  auto s = parse_candidates("a", wrap_candidates({"1", "2", "3"}), 2);
  EXPECT_EQ(s.status, ParseStatus::Complete);
  EXPECT_EQ(s.surplus, 1);
  EXPECT_EQ(s.candidates.size(), 3u);
}

TEST(Parser, MismatchedTagsPairInnermost) {
  auto s = parse_candidates("a", "[BEGINARTICLE]lost [BEGINARTICLE]kept[ENDARTICLE][ENDARTICLE] [BEGINARTICLE]open", 5);
  ASSERT_EQ(s.candidates.size(), 1u);
  EXPECT_EQ(s.candidates[0], "kept");
  EXPECT_EQ(s.status, ParseStatus::Partial);
}

TEST(Parser, EmptyBodiesAreSkipped) {
  auto s = parse_candidates("a", "[BEGINARTICLE]  [ENDARTICLE][BEGINARTICLE]real[ENDARTICLE]", 2);
  EXPECT_EQ(s.candidates, std::vector<std::string>{"real"});
}

TEST(Normalize, StripsOneEnumerationMarker) {
  EXPECT_EQ(normalize_candidate("  1. text "), "text");
  EXPECT_EQ(normalize_candidate("12) text"), "text");
  EXPECT_EQ(normalize_candidate("৩। লেখা"), "লেখা");
  EXPECT_EQ(normalize_candidate("2: a"), "a");
  EXPECT_EQ(normalize_candidate("1. 2. nested"), "2. nested");
  EXPECT_EQ(normalize_candidate("1.5 million people"), "1.5 million people");
  EXPECT_EQ(normalize_candidate("1234. long"), "1234. long");
  EXPECT_EQ(normalize_candidate("2024 was a year"), "2024 was a year");
}

TEST(Exemplars, FixedPerRunAndNeverSelf) {
  auto train = toy_corpus(10, 10);
  ExemplarBank bank(train, 5, 1), again(train, 5, 1);
  for (const auto& a : train) {
    auto ex = bank.for_source(a);
    ASSERT_EQ(ex.size(), 5u);
    for (const auto& e : ex) {
      EXPECT_NE(e.id, a.id);
      EXPECT_EQ(e.label, a.label);
    }
    EXPECT_EQ(ex, again.for_source(a));
  }
}

TEST(Exemplars, SmallPoolYieldsFewer) {
  auto train = toy_corpus(2, 10);
  ExemplarBank bank(train, 5, 1);
  EXPECT_EQ(bank.for_source(train.articles()[0]).size(), 1u);
}
