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
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "augkit/corpus.hpp"
#include "augkit/error.hpp"
#include "augkit/hash.hpp"
#include "augkit/metrics.hpp"
#include "augkit/text.hpp"

namespace augkit::clf {

using json = nlohmann::json;

struct NGramVocab {
  int min_n = 3;
  int max_n = 5;
  std::vector<std::string> terms;  // index order
  std::vector<double> idf;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t size() const { return terms.size(); }

  void rebuild_index() {
    index.clear();
    index.reserve(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) index.emplace(terms[i], i);
  }
};

using SparseVector = std::vector<std::pair<std::size_t, double>>;

/// Raw counts of code-point n-grams of the ASCII-lowercased text.
inline std::unordered_map<std::string, int> char_ngrams(const std::string& text, int min_n, int max_n) {
  std::unordered_map<std::string, int> counts;
  auto cps = text::decode_utf8(text::lower_ascii(text));
  for (int n = min_n; n <= max_n; ++n)
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= cps.size(); ++i)
      ++counts[text::encode_utf8(cps, i, i + static_cast<std::size_t>(n))];
  return counts;
}

/// L2-normalized tf-idf over the vocabulary; unseen grams are dropped.
inline SparseVector featurize(const NGramVocab& vocab, const std::string& text) {
  SparseVector x;
  for (const auto& [gram, count] : char_ngrams(text, vocab.min_n, vocab.max_n)) {
    auto it = vocab.index.find(gram);
    if (it != vocab.index.end()) x.emplace_back(it->second, count * vocab.idf[it->second]);
  }
  std::sort(x.begin(), x.end());
  double norm = 0;
  for (auto& [i, v] : x) norm += v * v;
  if (norm > 0) {
    norm = std::sqrt(norm);
    for (auto& [i, v] : x) v /= norm;
  }
  return x;
}

struct Hyper {
  int epochs = 10;
  double learning_rate = 8.0;
  double l2 = 1e-6;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t max_features = 200'000;
};

struct LinearModel {
  NGramVocab vocab;
  std::vector<double> weights;
  double bias = 0;
  std::vector<double> loss_history;  // regularized mean log-loss after each epoch

  double margin(const SparseVector& x) const {
    double z = bias;
    for (const auto& [i, v] : x) z += weights[i] * v;
    return z;
  }
};

inline double logistic(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

inline double log_loss(double z, double y) {
  // log(1 + e^z) - y z, computed stably.
  double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return softplus - y * z;
}

inline NGramVocab build_vocab(const std::vector<std::unordered_map<std::string, int>>& doc_counts,
                              std::size_t max_features) {
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> stats;  // df, total
  for (const auto& doc : doc_counts)
    for (const auto& [g, c] : doc) {
      auto& s = stats[g];
      ++s.first;
      s.second += static_cast<std::size_t>(c);
    }
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> ranked(stats.begin(), stats.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.second != b.second.second) return a.second.second > b.second.second;
    return a.first < b.first;
  });
  if (ranked.size() > max_features) ranked.resize(max_features);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  NGramVocab vocab;
  const double docs = static_cast<double>(doc_counts.size());
  for (const auto& [g, s] : ranked) {
    vocab.terms.push_back(g);
    vocab.idf.push_back(std::log((1.0 + docs) / (1.0 + static_cast<double>(s.first))) + 1.0);
  }
  vocab.rebuild_index();
  return vocab;
}

/// Logistic regression (target = Real) by seeded mini-batch SGD with step
/// learning_rate / (1 + epoch). Deterministic for a given seed.
inline LinearModel fit(const Corpus& train, const Hyper& hyper = {}) {
  auto comp = composition(train);
  if (comp.label_total(Label::Fake) == 0 || comp.label_total(Label::Real) == 0)
    fail(ErrorKind::Training, "training corpus must contain both classes");
  if (hyper.epochs < 1 || hyper.batch_size < 1 || !(hyper.learning_rate > 0) || hyper.l2 < 0)
    fail(ErrorKind::Parameter, "invalid classifier hyperparameters");

  LinearModel model;
  std::vector<std::unordered_map<std::string, int>> counts;
  counts.reserve(train.size());
  for (const auto& a : train) counts.push_back(char_ngrams(a.content, model.vocab.min_n, model.vocab.max_n));
  model.vocab = build_vocab(counts, hyper.max_features);
  counts.clear();

  std::vector<SparseVector> xs;
  std::vector<double> ys;
  for (const auto& a : train) {
    xs.push_back(featurize(model.vocab, a.content));
    ys.push_back(a.label == Label::Real ? 1.0 : 0.0);
  }

  // w = scale * v keeps the per-step L2 shrink O(1).
  std::vector<double> v(model.vocab.size(), 0.0);
  double scale = 1.0;
  double bias = 0.0;
  std::mt19937_64 rng(hyper.seed);
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::unordered_map<std::size_t, double> grad;

  auto objective = [&] {
    double loss = 0, sq = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double z = bias;
      for (const auto& [j, x] : xs[i]) z += scale * v[j] * x;
      loss += log_loss(z, ys[i]);
    }
    for (double w : v) sq += w * w;
    return loss / static_cast<double>(xs.size()) + 0.5 * hyper.l2 * scale * scale * sq;
  };

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    const double lr = hyper.learning_rate / (1.0 + epoch);
    seeded_shuffle(order, rng);
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      grad.clear();
      double gbias = 0;
      for (std::size_t b = start; b < end; ++b) {
        const auto& x = xs[order[b]];
        double z = bias;
        for (const auto& [j, val] : x) z += scale * v[j] * val;
        const double err = (logistic(z) - ys[order[b]]) * inv;
        gbias += err;
        for (const auto& [j, val] : x) grad[j] += err * val;
      }
      scale *= (1.0 - lr * hyper.l2);
      for (const auto& [j, g] : grad) v[j] -= lr * g / scale;
      bias -= lr * gbias;
      if (scale < 1e-9) {
        for (double& w : v) w *= scale;
        scale = 1.0;
      }
    }
    model.loss_history.push_back(objective());
  }
  model.weights.resize(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) model.weights[j] = scale * v[j];
  model.bias = bias;
  return model;
}

/// score = P(Real); pred is Real iff score >= 0.5.
inline std::vector<metrics::PredictionRecord> predict(const LinearModel& model, const Corpus& test) {
  std::vector<metrics::PredictionRecord> out;
  out.reserve(test.size());
  for (const auto& a : test) {
    const double score = logistic(model.margin(featurize(model.vocab, a.content)));
    out.push_back({a.id, a.label, score >= 0.5 ? Label::Real : Label::Fake, score});
  }
  return out;
}

inline json to_json(const LinearModel& m) {
  return json{{"gram_range", {m.vocab.min_n, m.vocab.max_n}},
              {"terms", m.vocab.terms},
              {"idf", m.vocab.idf},
              {"weights", m.weights},
              {"bias", m.bias}};
}

inline LinearModel model_from_json(const json& j) {
  LinearModel m;
  m.vocab.min_n = j.at("gram_range").at(0).get<int>();
  m.vocab.max_n = j.at("gram_range").at(1).get<int>();
  m.vocab.terms = j.at("terms").get<std::vector<std::string>>();
  m.vocab.idf = j.at("idf").get<std::vector<double>>();
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  if (m.weights.size() != m.vocab.terms.size() || m.vocab.idf.size() != m.vocab.terms.size())
    fail(ErrorKind::Schema, "model terms, idf and weights differ in length");
  m.vocab.rebuild_index();
  return m;
}

}  // namespace augkit::clf
