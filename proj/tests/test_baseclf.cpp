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

#include "augkit/baseclf.hpp"
#include "support.hpp"

using namespace augkit;
using namespace augkit::clf;
using augkit::testing::article;

namespace {

/// Two classes with disjoint vocabularies plus shared filler.
Corpus separable(std::size_t n_fake, std::size_t n_real, std::uint64_t seed) {
  static const std::vector<std::string> kFake{"shocking", "secret", "viral", "hoax", "miracle", "exposed"};
  static const std::vector<std::string> kReal{"ministry", "budget", "council", "quarterly", "report", "official"};
  static const std::vector<std::string> kShared{"the", "city", "today", "people", "said", "news"};
  std::mt19937_64 rng(seed);
  std::vector<Article> v;
  for (std::size_t i = 0; i < n_fake + n_real; ++i) {
    const bool fake = i < n_fake;
    const auto& own = fake ? kFake : kReal;
    std::string body;
    for (int w = 0; w < 12; ++w) {
      const auto& pool = rng() % 3 == 0 ? own : kShared;
      body += pool[rng() % pool.size()] + " ";
    }
    v.push_back(article("d" + std::to_string(i), fake ? Label::Fake : Label::Real, body));
  }
  return Corpus("sep", std::move(v));
}

}  // namespace

TEST(NGrams, CountsCodePointGramsAfterAsciiLowercase) {
  auto g = char_ngrams("AbAb", 3, 3);
  EXPECT_EQ(g.size(), 2u);
  EXPECT_EQ(g.at("aba"), 1);
  EXPECT_EQ(g.at("bab"), 1);
  auto b = char_ngrams("সংবাদ", 3, 5);
  EXPECT_EQ(b.size(), 3u + 2u + 1u);
  EXPECT_TRUE(char_ngrams("ab", 3, 5).empty());
}

TEST(Vocab, SmoothedIdfAndCap) {
  std::vector<std::unordered_map<std::string, int>> docs{{{"aaa", 5}, {"bbb", 1}}, {{"aaa", 1}, {"ccc", 2}}};
  auto v = build_vocab(docs, 10);
  ASSERT_EQ(v.terms, (std::vector<std::string>{"aaa", "bbb", "ccc"}));
  EXPECT_DOUBLE_EQ(v.idf[0], std::log(3.0 / 3.0) + 1.0);
  EXPECT_DOUBLE_EQ(v.idf[1], std::log(3.0 / 2.0) + 1.0);
  auto capped = build_vocab(docs, 2);
  EXPECT_EQ(capped.terms, (std::vector<std::string>{"aaa", "ccc"}));
}

TEST(Featurize, UnitNormAndSorted) {
  std::vector<std::unordered_map<std::string, int>> docs{char_ngrams("hello world", 3, 5)};
  auto v = build_vocab(docs, 1000);
  v.min_n = 3;
  v.max_n = 5;
  auto x = featurize(v, "hello there");
  double n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    n += x[i].second * x[i].second;
    if (i) EXPECT_LT(x[i - 1].first, x[i].first);
  }
  EXPECT_NEAR(n, 1.0, 1e-12);
  EXPECT_TRUE(featurize(v, "zzzz").empty());
}

TEST(Logistic, StableAtExtremes) {
  EXPECT_DOUBLE_EQ(logistic(0), 0.5);
  EXPECT_GT(logistic(800), 0.999);
  EXPECT_LT(logistic(-800), 1e-300 + 1e-12);
  EXPECT_FALSE(std::isnan(log_loss(800, 0)));
  EXPECT_NEAR(log_loss(800, 1), 0.0, 1e-12);
  EXPECT_NEAR(log_loss(0, 1), std::log(2.0), 1e-12);
}

TEST(Fit, LearnsSeparableData) {
  auto train = separable(60, 140, 1), test = separable(40, 80, 2);
  auto model = fit(train);
  auto cm = metrics::confusion(predict(model, test));
  auto r = metrics::evaluate(cm);
  EXPECT_GT(r.fake.f1, 0.9);
  EXPECT_GT(r.accuracy, 0.9);
}

TEST(Fit, LossDecreasesAcrossEpochs) {
  auto train = separable(50, 150, 3);
  Hyper h;
  h.epochs = 8;
  auto model = fit(train, h);
  ASSERT_EQ(model.loss_history.size(), 8u);
  EXPECT_LT(model.loss_history.back(), model.loss_history.front());
  for (std::size_t i = 1; i < model.loss_history.size(); ++i)
    EXPECT_LE(model.loss_history[i], model.loss_history[i - 1] + 1e-3) << "epoch " << i;
  EXPECT_LT(model.loss_history.front(), std::log(2.0));
}

TEST(Fit, DeterministicForSeed) {
  auto train = separable(30, 70, 4);
  Hyper h;
  h.seed = 11;
  auto a = fit(train, h), b = fit(train, h);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.bias, b.bias);
  h.seed = 12;
  EXPECT_NE(fit(train, h).weights, a.weights);
}

TEST(Fit, RejectsSingleClassAndBadHyper) {
  try {
    fit(separable(0, 10, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Training);
  }
  Hyper h;
  h.epochs = 0;
  EXPECT_THROW(fit(separable(5, 5, 1), h), Error);
}

TEST(Predict, ScoresAreProbabilitiesWithHalfThreshold) {
  auto train = separable(30, 70, 5);
  auto model = fit(train);
  for (const auto& p : predict(model, separable(10, 10, 6))) {
    ASSERT_TRUE(p.score);
    EXPECT_GE(*p.score, 0.0);
    EXPECT_LE(*p.score, 1.0);
    EXPECT_EQ(p.pred_label, *p.score >= 0.5 ? Label::Real : Label::Fake);
  }
}

TEST(ModelJson, RoundTripPreservesPredictions) {
  auto train = separable(20, 40, 7);
  auto model = fit(train);
  auto back = model_from_json(to_json(model));
  auto test = separable(10, 10, 8);
  EXPECT_EQ(predict(model, test), predict(back, test));
  auto j = to_json(model);
  j["weights"].push_back(1.0);
  EXPECT_THROW(model_from_json(j), Error);
}
