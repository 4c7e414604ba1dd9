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

// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "augkit/runner.hpp"
#include "support.hpp"

using namespace augkit;
using augkit::testing::TempDir;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void check(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

int g_failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (out.ok && secs > budget_s) {
    out.ok = false;
    out.detail = "over runtime budget";
  }
  if (!out.ok) ++g_failures;
  std::printf("%s  %-34s %8.2fs / %6.0fs  %s\n", out.ok ? "PASS" : "FAIL", name.c_str(), secs, budget_s,
              out.detail.c_str());
  std::fflush(stdout);
}

Article make(std::string id, Label l, std::string content, std::string category = "news") {
  return augkit::testing::article(std::move(id), l, std::move(content), std::move(category));
}

std::vector<Article> label_block(const std::string& prefix, Label l, std::size_t n) {
  std::vector<Article> v;
  v.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    v.push_back(make(prefix + std::to_string(i), l,
                     "সংবাদ " + std::to_string(i) + " প্রকাশিত হয়েছে। মানুষ খবরটি দেখেছে। সরকার সাহায্য করবে।"));
  return v;
}

plan::AugmentPolicy fake_only(int k, select::Strategy s = select::Strategy::Random) {
  plan::AugmentPolicy p;
  p.k = k;
  p.selection.k = k;
  p.selection.strategy = s;
  return p;
}

gen::GenConfig mock_gen_config(int inflight = 4) {
  gen::GenConfig g;
  g.model_id = "mock-paraphraser/seed=1";
  g.max_inflight = inflight;
  g.max_retries = 0;
  g.backoff_base = std::chrono::milliseconds(0);
  return g;
}

gen::GenerateOptions mock_options() {
  gen::GenerateOptions o;
  o.clock = gen::epoch_clock();
  o.sleep = [](std::chrono::milliseconds) {};
  return o;
}

// ---------------------------------------------------------------------------

Outcome training_set_composition() {
  Outcome out;
  auto v = label_block("r", Label::Real, 5041);
  auto f = label_block("f", Label::Fake, 909);
  v.insert(v.end(), f.begin(), f.end());
  Corpus train("train", std::move(v));
  const std::vector<std::pair<int, std::pair<std::size_t, std::size_t>>> rows{
      {5, {10495, 5454}}, {3, {8677, 3636}}, {2, {7768, 2727}}, {1, {6859, 1818}}};
  for (const auto& [k, want] : rows) {
    auto policy = fake_only(k);
    auto expected = plan::expected_composition(train, policy).expected;
    out.check(expected.total() == want.first && expected.label_total(Label::Fake) == want.second &&
                  expected.label_total(Label::Real) == 5041,
              "expected composition wrong at K=" + std::to_string(k));
    std::vector<select::SelectedSet> sets;
    for (const auto& a : train) {
      if (a.label != Label::Fake) continue;
      select::SelectedSet s{a.id, select::Strategy::Random, k, {}, 0, {}, {}};
      for (int i = 0; i < k; ++i) s.chosen.push_back({a.content + " v" + std::to_string(i), std::nullopt,
                                                      static_cast<std::size_t>(i)});
      sets.push_back(std::move(s));
    }
    auto built = plan::build_augmented(train, sets, policy);
    out.check(built.actual == built.expected && built.corpus.size() == want.first,
              "built corpus disagrees with expected composition at K=" + std::to_string(k));
  }
  return out;
}

Outcome synthetic_pool_size() {
  Outcome out;
  TempDir dir;
  auto fakes = label_block("f", Label::Fake, 909);
  gen::MockChatBackend backend(1);
  gen::GenCache cache(dir / "cache.jsonl");
  gen::RequestTemplate tmpl;
  auto res = gen::generate(fakes, tmpl, mock_gen_config(), backend, cache, mock_options());
  std::size_t total = 0;
  for (const auto& r : res.records) total += r.candidate_set.candidates.size();
  out.check(res.records.size() == 909, "record count " + std::to_string(res.records.size()));
  out.check(total == 4545, "candidate count " + std::to_string(total));
  out.check(res.stats.candidates == 4545 && res.stats.complete == 909, "stats disagree with records");
  return out;
}

// Printed rows: Fake P,R,F1; Real P,R,F1; Combined F1; Acc.
struct PrintedRow {
  const char* tag;
  double v[8];
};

const std::vector<PrintedRow>& printed_rows() {
  static const std::vector<PrintedRow> rows{
      {"Baseline", {0.9104, 0.8077, 0.8560, 0.9660, 0.9857, 0.9757, 0.9574, 0.9584}},
      {"ZS K=5", {0.8857, 0.8744, 0.8800, 0.9774, 0.9796, 0.9785, 0.9634, 0.9635}},
      {"ZS R, K=3", {0.8579, 0.8667, 0.8622, 0.9759, 0.9741, 0.9750, 0.9578, 0.9577}},
      {"ZS S, K=1", {0.8904, 0.8128, 0.8499, 0.9667, 0.9820, 0.9743, 0.9553, 0.9561}},
      {"ZS S, K=2", {0.7422, 0.9154, 0.8197, 0.9841, 0.9426, 0.9629, 0.9410, 0.9385}},
      {"ZS S, K=3", {0.9104, 0.8077, 0.8560, 0.9660, 0.9857, 0.9757, 0.9574, 0.9584}},
      {"FS K=5", {0.8024, 0.8538, 0.8273, 0.9733, 0.9621, 0.9677, 0.9462, 0.9455}},
      {"FS R, K=3", {0.7968, 0.9051, 0.8475, 0.9824, 0.9584, 0.9703, 0.9515, 0.9502}},
      {"FS S, K=1", {0.9342, 0.7282, 0.8184, 0.9528, 0.9907, 0.9714, 0.9480, 0.9506}},
      {"FS S, K=2", {0.7797, 0.9077, 0.8389, 0.9828, 0.9537, 0.9681, 0.9483, 0.9467}},
      {"FS S, K=3", {0.9664, 0.7385, 0.8372, 0.9547, 0.9954, 0.9746, 0.9536, 0.9561}},
  };
  return rows;
}

constexpr std::size_t kFakeSupport = 390;
constexpr std::size_t kRealSupport = 2161;

metrics::ConfusionMatrix invert(double fake_p, double fake_r) {
  metrics::ConfusionMatrix best{};
  double best_dev = 1e9;
  for (std::size_t tp = 0; tp <= kFakeSupport; ++tp)
    for (std::size_t fp = 0; fp <= kRealSupport; ++fp) {
      if (tp + fp == 0) continue;
      const double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
      const double r = static_cast<double>(tp) / static_cast<double>(kFakeSupport);
      const double dev = std::max(std::abs(p - fake_p), std::abs(r - fake_r));
      if (dev < best_dev) {
        best_dev = dev;
        best = {tp, fp, kFakeSupport - tp, kRealSupport - fp};
      }
    }
  return best;
}

bool matches(double computed, double printed) {
  return std::abs(std::stod(metrics::format4(computed)) - printed) <= 5e-5 + 1e-12;
}

std::vector<metrics::EvalReport> inverted_reports() {
  std::vector<metrics::EvalReport> out;
  for (const auto& row : printed_rows()) out.push_back(metrics::evaluate(invert(row.v[0], row.v[1]), row.tag));
  return out;
}

Outcome metric_replication() {
  Outcome out;
  auto reports = inverted_reports();
  out.check(reports[0].cm.tp == 315 && reports[0].cm.fp == 31, "first row does not invert to (315, 31)");
  out.check(reports[1].cm.tp == 341 && reports[1].cm.fp == 44, "second row does not invert to (341, 44)");
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const auto& p = printed_rows()[i].v;
    const double got[8] = {r.fake.precision, r.fake.recall, r.fake.f1,      r.real.precision,
                           r.real.recall,    r.real.f1,     r.combined_f1, r.accuracy};
    for (int c = 0; c < 8; ++c)
      out.check(matches(got[c], p[c]), std::string(printed_rows()[i].tag) + " column " + std::to_string(c) +
                                           ": " + metrics::format4(got[c]));
  }
  return out;
}

Outcome combined_f1_disambiguation() {
  Outcome out;
  auto reports = inverted_reports();
  int weighted_ok = 0, macro_fail = 0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const double printed = printed_rows()[i].v[6];
    if (matches(reports[i].combined_f1, printed)) ++weighted_ok;
    if (!matches((reports[i].fake.f1 + reports[i].real.f1) / 2.0, printed)) ++macro_fail;
  }
  out.check(weighted_ok == 11, "weighted F1 matched " + std::to_string(weighted_ok) + "/11");
  out.check(macro_fail >= 10, "macro F1 failed only " + std::to_string(macro_fail) + "/11");
  if (out.ok) out.detail = "weighted 11/11, macro fails " + std::to_string(macro_fail) + "/11";
  return out;
}

Outcome split_invariants() {
  Outcome out;
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000 && out.ok; ++trial) {
    const std::size_t n = 10 + uniform_below(rng, 400);
    const std::size_t n_cat = 1 + uniform_below(rng, 4);
    const double fake_share = 0.05 + 0.6 * uniform_unit(rng);
    std::vector<Article> v;
    for (std::size_t i = 0; i < n; ++i)
      v.push_back(make("a" + std::to_string(i), uniform_unit(rng) < fake_share ? Label::Fake : Label::Real,
                       "body " + std::to_string(i), "c" + std::to_string(uniform_below(rng, n_cat))));
    Corpus c("c", v);
    SplitSpec spec;
    spec.train_fraction = Fraction::from_double(0.5 + 0.4 * uniform_unit(rng));
    spec.seed = rng();
    const double f = spec.train_fraction.value();
    auto s = stratified_split(c, spec);
    const std::string at = "trial " + std::to_string(trial);

    std::set<std::string> train_ids, test_ids;
    for (const auto& a : s.train) train_ids.insert(a.id);
    for (const auto& a : s.test) test_ids.insert(a.id);
    bool disjoint = std::none_of(train_ids.begin(), train_ids.end(), [&](auto& id) { return test_ids.count(id); });
    out.check(disjoint && train_ids.size() + test_ids.size() == n, at + ": not a partition");

    std::map<std::string, std::pair<std::size_t, std::size_t>> strata;  // members, in train
    for (const auto& a : c) ++strata[std::string(name(a.label)) + "/" + a.category].first;
    for (const auto& a : s.train) ++strata[std::string(name(a.label)) + "/" + a.category].second;
    for (const auto& [key, counts] : strata)
      out.check(std::abs(static_cast<double>(counts.second) - f * static_cast<double>(counts.first)) < 1.0,
                at + ": stratum " + key + " off by more than one");

    auto again = stratified_split(c, spec);
    out.check(corpus_digest(again.train) == corpus_digest(s.train) &&
                  corpus_digest(again.test) == corpus_digest(s.test),
              at + ": not deterministic");
    out.check(!s.test.has_synthetic() && !s.train.has_synthetic(), at + ": synthetic article in split");
  }

  auto v = label_block("r", Label::Real, 7202);
  auto fk = label_block("f", Label::Fake, 1299);
  v.insert(v.end(), fk.begin(), fk.end());
  Corpus full("full", v);
  SplitSpec spec;
  spec.strata = {"label"};
  spec.seed = 42;
  auto s = stratified_split(full, spec);
  auto tr = composition(s.train), te = composition(s.test);
  out.check(tr.label_total(Label::Real) == 5041 && tr.label_total(Label::Fake) == 909 &&
                te.label_total(Label::Real) == 2161 && te.label_total(Label::Fake) == 390,
            "dataset histogram does not split to 5041/909/2161/390");

  bool rejected = false;
  try {
    std::vector<Article> with_syn{make("o", Label::Fake, "x"), make("s", Label::Fake, "y")};
    with_syn[1].provenance = Provenance::Synthetic;
    with_syn[1].parent_id = "o";
    stratified_split(Corpus("syn", with_syn), SplitSpec{});
  } catch (const Error& e) {
    rejected = e.kind() == ErrorKind::Provenance;
  }
  out.check(rejected, "split accepted a corpus with synthetic articles");
  return out;
}

Outcome selection_properties() {
  Outcome out;
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 2000 && out.ok; ++trial) {
    const std::size_t n = 1 + uniform_below(rng, 8);
    std::vector<std::string> cands;
    std::vector<double> scores;
    for (std::size_t i = 0; i < n; ++i) {
      cands.push_back("c" + std::to_string(i));
      scores.push_back(std::round((2.0 * uniform_unit(rng) - 1.0) * 20.0) / 20.0);
    }
    const int k = 1 + static_cast<int>(uniform_below(rng, n));
    select::SelectionPolicy sim{select::Strategy::Similarity, k, rng(), std::nullopt};
    auto top = select::select_top_k("a", cands, scores, sim);
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    bool ordered = top.chosen.size() == static_cast<std::size_t>(k);
    for (std::size_t i = 0; ordered && i < top.chosen.size(); ++i)
      ordered = *top.chosen[i].similarity == sorted[i] && (i == 0 || *top.chosen[i - 1].similarity >= sorted[i]);
    out.check(ordered, "top-K not ordered by descending similarity");

    select::SelectionPolicy full_sim{select::Strategy::Similarity, static_cast<int>(n), 1, std::nullopt};
    select::SelectionPolicy full_rnd{select::Strategy::Random, static_cast<int>(n), rng(), std::nullopt};
    std::set<std::string> a, b;
    for (const auto& c : select::select_top_k("a", cands, scores, full_sim).chosen) a.insert(c.text);
    for (const auto& c : select::select_random("a", cands, full_rnd).chosen) b.insert(c.text);
    out.check(a == b && a.size() == n, "K=N random and similarity sets differ");

    std::size_t prev = n + 1;
    for (double floor = -1.0; floor <= 1.0; floor += 0.1) {
      auto p = sim;
      p.min_similarity = floor;
      auto s = select::select_top_k("a", cands, scores, p);
      out.check(s.chosen.size() <= prev, "raising the floor increased the selection");
      for (const auto& c : s.chosen) out.check(*c.similarity >= floor, "chosen candidate below floor");
      prev = s.chosen.size();
    }

    select::SelectionPolicy rnd{select::Strategy::Random, k, rng(), std::nullopt};
    out.check(select::select_random("a", cands, rnd).chosen == select::select_random("a", cands, rnd).chosen,
              "random selection not reproducible for a fixed seed");
  }

  const std::vector<std::string> five{"a", "b", "c", "d", "e"};
  std::array<int, 5> hits{};
  constexpr int kSeeds = 10000;
  for (int s = 0; s < kSeeds; ++s) {
    select::SelectionPolicy p{select::Strategy::Random, 2, derive_seed(99, "src" + std::to_string(s)),
                              std::nullopt};
    for (const auto& c : select::select_random("x", five, p).chosen) ++hits[c.index];
  }
  std::ostringstream freq;
  for (int i = 0; i < 5; ++i) {
    const double f = static_cast<double>(hits[i]) / kSeeds;
    freq << (i ? " " : "") << metrics::format4(f);
    out.check(std::abs(f - 0.4) <= 0.02, "inclusion frequency out of range");
  }
  if (out.ok) out.detail = "inclusion " + freq.str();
  return out;
}

Outcome parser_fuzz() {
  Outcome out;
  static const std::vector<std::string> kWords{"সরকার", "নির্বাচন", "খবর", "ঢাকা", "market", "news",
                                               "২০২৪", "১২৩", "মানুষ", "বলেছে", "x1.", "(বিশেষ)", "গুজব"};
  static const std::vector<std::string> kGlue{"\n", "\n\n", " ", "\nএখানে লেখা হলো\n", "\n---\n"};
  std::mt19937_64 rng(31337);
  auto pick = [&](const auto& v) -> const std::string& { return v[uniform_below(rng, v.size())]; };
  auto random_text = [&] {
    std::string t = "লেখা";
    const auto words = 1 + uniform_below(rng, 25);
    for (std::size_t w = 0; w < words; ++w) t += (uniform_below(rng, 6) == 0 ? "\n" : " ") + pick(kWords);
    return t;
  };
  auto render = [&](const std::vector<std::string>& texts, std::vector<std::pair<std::size_t, std::size_t>>& spans) {
    std::string doc = uniform_below(rng, 2) ? std::string(prompting::kOutputHeader) + "\n" : "";
    for (std::size_t i = 0; i < texts.size(); ++i) {
      switch (uniform_below(rng, 4)) {
        case 0: doc += std::to_string(i + 1) + ". "; break;
        case 1: doc += "১। "; break;
        case 2: doc += "- "; break;
        default: break;
      }
      const std::size_t begin = doc.size();
      doc += std::string(prompting::kBeginTag) + (uniform_below(rng, 2) ? " " : "\n") + texts[i] +
             (uniform_below(rng, 2) ? "\n" : "") + std::string(prompting::kEndTag);
      spans.emplace_back(begin, doc.size());
      doc += pick(kGlue);
    }
    return doc;
  };
  auto expect_status = [](std::size_t got, int requested) {
    return got == 0 ? prompting::ParseStatus::Failed
           : static_cast<int>(got) < requested ? prompting::ParseStatus::Partial
                                               : prompting::ParseStatus::Complete;
  };

  for (int trial = 0; trial < 10000 && out.ok; ++trial) {
    const std::size_t n = uniform_below(rng, 9);
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < n; ++i) texts.push_back(random_text());
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    const std::string doc = render(texts, spans);
    const int requested = 1 + static_cast<int>(uniform_below(rng, 8));
    const std::string at = "document " + std::to_string(trial);

    auto set = prompting::parse_candidates("s", doc, requested);
    out.check(set.candidates == texts, at + ": round trip mismatch");
    out.check(set.status == expect_status(n, requested), at + ": wrong status");
    out.check(set.surplus == std::max(0, static_cast<int>(n) - requested), at + ": wrong surplus");

    if (n == 0) continue;
    const std::size_t victim = uniform_below(rng, n);
    auto expected_without = texts;
    expected_without.erase(expected_without.begin() + static_cast<std::ptrdiff_t>(victim));
    for (auto tag : {prompting::kBeginTag, prompting::kEndTag}) {
      std::string broken = doc;
      const auto [b, e] = spans[victim];
      if (tag == prompting::kBeginTag)
        broken.erase(b, tag.size());
      else
        broken.erase(e - tag.size(), tag.size());
      auto m = prompting::parse_candidates("s", broken, static_cast<int>(n));
      out.check(m.candidates == expected_without, at + ": dropped tag not isolated");
      out.check(m.status == expect_status(n - 1, static_cast<int>(n)), at + ": dropped tag misclassified");
    }

    const std::size_t cut = uniform_below(rng, doc.size() + 1);
    std::vector<std::string> survivors;
    for (std::size_t i = 0; i < n; ++i)
      if (spans[i].second <= cut) survivors.push_back(texts[i]);
    auto t = prompting::parse_candidates("s", doc.substr(0, cut), static_cast<int>(n));
    out.check(t.candidates == survivors, at + ": truncation kept a torn candidate");
    out.check(t.status == expect_status(survivors.size(), static_cast<int>(n)), at + ": truncation misclassified");

    std::string noise = doc;
    for (int j = 0; j < 8; ++j) noise[uniform_below(rng, noise.size())] = static_cast<char>(rng());
    auto z = prompting::parse_candidates("s", noise, static_cast<int>(n));
    out.check(z.status == expect_status(z.candidates.size(), static_cast<int>(n)), at + ": noise misclassified");
  }
  return out;
}

// Two classes drawn from overlapping word distributions with class-specific tails.
Corpus imbalanced_corpus(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> shared, fake_only, real_only;
  for (int i = 0; i < 300; ++i) shared.push_back("w" + std::to_string(i));
  for (int i = 0; i < 40; ++i) fake_only.push_back("gujob" + std::to_string(i));
  for (int i = 0; i < 40; ++i) real_only.push_back("sotto" + std::to_string(i));
  auto doc = [&](Label l) {
    const auto& own = l == Label::Fake ? fake_only : real_only;
    const auto& other = l == Label::Fake ? real_only : fake_only;
    std::string body;
    for (int w = 0; w < 30; ++w) {
      const double u = uniform_unit(rng);
      const auto& src = u < 0.85 ? shared : u < 0.95 ? own : other;
      body += (w ? " " : "") + src[uniform_below(rng, src.size())];
      if (w % 10 == 9) body += ".";
    }
    return body;
  };
  std::vector<Article> v;
  for (int i = 0; i < 5000; ++i) v.push_back(make("r" + std::to_string(i), Label::Real, doc(Label::Real)));
  for (int i = 0; i < 900; ++i) v.push_back(make("f" + std::to_string(i), Label::Fake, doc(Label::Fake)));
  return Corpus("imbalanced", std::move(v));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() % 2 ? v[v.size() / 2] : (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2.0;
}

Outcome direction_of_effect() {
  Outcome out;
  TempDir dir;
  std::vector<double> base_f1, aug_f1;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto csv = dir / ("corpus" + std::to_string(seed) + ".csv");
    write_csv(csv.string(), imbalanced_corpus(seed));
    json j{{"dataset", {{"path", csv.string()}}},
           {"split", {{"strata", {"label"}}}},
           {"k_values", {5}},
           {"strategies", {"random"}},
           {"generation", {{"backend", "mock"}, {"mock_seed", seed}}},
           {"run_seed", seed},
           {"output_dir", (dir / "out").string()}};
    run::Runner runner(run::parse_config(j));
    auto summary = runner.run();
    out.check(summary.rows.size() == 2, "expected baseline plus one configuration");
    for (const auto& r : summary.rows) out.check(r.status == "ok" && r.report, r.tag + ": " + r.error);
    if (!out.ok) return out;
    base_f1.push_back(summary.rows[0].report->fake.f1);
    aug_f1.push_back(summary.rows[1].report->fake.f1);
  }
  const double b = median(base_f1), a = median(aug_f1);
  out.check(a >= b, "augmented median minority F1 below baseline");
  out.detail = "median minority F1 baseline " + metrics::format4(b) + " augmented " + metrics::format4(a);
  return out;
}

std::vector<std::string> sorted_lines(const fs::path& p) {
  std::vector<std::string> lines;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  std::sort(lines.begin(), lines.end());
  return lines;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  return static_cast<std::size_t>(std::count(std::istreambuf_iterator<char>(in), {}, '\n'));
}

std::string records_text(const gen::GenerateResult& r) {
  std::string s;
  for (const auto& rec : r.records) s += gen::to_json(rec).dump() + "\n";
  return s;
}

Outcome cache_resumability() {
  Outcome out;
  TempDir dir;
  auto toy = augkit::testing::toy_corpus(300, 0);
  const std::vector<Article> articles(toy.begin(), toy.end());
  const gen::RequestTemplate tmpl;
  const auto cfg = mock_gen_config(4);

  std::string reference;
  {
    gen::MockChatBackend backend(1);
    gen::GenCache cache(dir / "reference.jsonl");
    reference = records_text(gen::generate(articles, tmpl, cfg, backend, cache, mock_options()));
  }

  const auto victim = dir / "victim.jsonl";
  std::fflush(stdout);
  const pid_t pid = ::fork();
  if (pid < 0) fail(ErrorKind::Io, "fork failed");
  if (pid == 0) {
    try {
      gen::MockChatBackend backend(1);
      backend.set_latency(std::chrono::milliseconds(5));
      gen::GenCache cache(victim);
      gen::generate(articles, tmpl, cfg, backend, cache, mock_options());
    } catch (...) {
    }
    ::_exit(0);
  }
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(30);
  while (line_count(victim) < articles.size() / 3 && std::chrono::steady_clock::now() < deadline)
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  ::kill(pid, SIGKILL);
  int status = 0;
  ::waitpid(pid, &status, 0);
  const std::size_t at_kill = line_count(victim);
  out.check(WIFSIGNALED(status), "child finished before it could be killed");
  out.check(at_kill > 0 && at_kill < articles.size(), "kill point outside the run");
  std::ofstream(victim, std::ios::app) << R"({"source_id":"torn)";

  gen::MockChatBackend backend(1);
  gen::GenerateResult resumed;
  {
    gen::GenCache cache(victim);
    out.check(cache.discarded_on_load() == 1, "torn tail not discarded");
    resumed = gen::generate(articles, tmpl, cfg, backend, cache, mock_options());
  }
  out.check(resumed.stats.cache_hits == at_kill, "cached prefix not reused");
  out.check(backend.calls() == articles.size() - at_kill, "resume regenerated cached prompts");
  out.check(records_text(resumed) == reference, "resumed records differ from uninterrupted run");
  out.check(sorted_lines(victim) == sorted_lines(dir / "reference.jsonl"), "cache files differ");
  if (out.ok) out.detail = "killed after " + std::to_string(at_kill) + "/" + std::to_string(articles.size());
  return out;
}

}  // namespace

int main() {
  criterion("training-set-composition", 1, training_set_composition);
  criterion("synthetic-pool-size", 30, synthetic_pool_size);
  criterion("metric-replication", 5, metric_replication);
  criterion("combined-f1-disambiguation", 5, combined_f1_disambiguation);
  criterion("split-invariants", 60, split_invariants);
  criterion("selection-properties", 60, selection_properties);
  criterion("parser-roundtrip-fuzz", 30, parser_fuzz);
  criterion("end-to-end-direction-of-effect", 300, direction_of_effect);
  criterion("cache-resumability", 60, cache_resumability);
  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
