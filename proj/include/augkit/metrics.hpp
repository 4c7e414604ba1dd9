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
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "augkit/corpus.hpp"
#include "augkit/csv.hpp"
#include "augkit/error.hpp"

namespace augkit::metrics {

using json = nlohmann::json;

struct PredictionRecord {
  std::string id;
  Label true_label = Label::Real;
  Label pred_label = Label::Real;
  std::optional<double> score;  // P(Real)

  bool operator==(const PredictionRecord&) const = default;
};

inline std::vector<PredictionRecord> parse_predictions(std::string_view data) {
  auto table = csv::parse(data);
  auto col = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
      if (required) fail(ErrorKind::Schema, "predictions file missing column '" + name + "'", {name});
      return std::nullopt;
    }
    return static_cast<std::size_t>(it - table.header.begin());
  };
  auto c_id = *col("id", true), c_true = *col("true_label", true), c_pred = *col("pred_label", true);
  auto c_score = col("score", false);
  std::vector<PredictionRecord> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = "predictions row " + std::to_string(r + 1);
    if (row.size() != table.header.size()) fail(ErrorKind::Row, where + ": wrong field count", {std::to_string(r + 1)});
    auto t = parse_label(row[c_true]);
    auto p = parse_label(row[c_pred]);
    if (!t || !p) fail(ErrorKind::Row, where + ": invalid label", {std::to_string(r + 1)});
    PredictionRecord rec{row[c_id], *t, *p, std::nullopt};
    if (c_score && !text::trim(row[*c_score]).empty()) {
      try {
        rec.score = std::stod(row[*c_score]);
      } catch (const std::exception&) {
        fail(ErrorKind::Row, where + ": invalid score", {std::to_string(r + 1)});
      }
      if (!(*rec.score >= 0.0 && *rec.score <= 1.0))
        fail(ErrorKind::Row, where + ": score outside [0,1]", {std::to_string(r + 1)});
    }
    out.push_back(std::move(rec));
  }
  return out;
}

inline std::vector<PredictionRecord> read_predictions(const std::string& path) {
  return parse_predictions(csv::read_file(path));
}

inline void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& preds) {
  csv::write_row(out, {"id", "true_label", "pred_label", "score"});
  for (const auto& p : preds) {
    std::string score;
    if (p.score) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", *p.score);
      score = buf;
    }
    csv::write_row(out, {p.id, std::to_string(code(p.true_label)), std::to_string(code(p.pred_label)), score});
  }
}

inline void write_predictions(const std::string& path, const std::vector<PredictionRecord>& preds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path, {path});
  write_predictions(out, preds);
}

/// Fake (0) is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t fake_support() const { return tp + fn; }
  std::size_t real_support() const { return fp + tn; }
  std::size_t total() const { return tp + fp + fn + tn; }
  /// Real as the positive class.
  ConfusionMatrix swapped() const { return {tn, fn, fp, tp}; }

  bool operator==(const ConfusionMatrix&) const = default;
};

/// Exact tallies. With a test corpus, requires every test id predicted
/// exactly once and true labels matching the corpus.
inline ConfusionMatrix confusion(const std::vector<PredictionRecord>& preds,
                                 const Corpus* test = nullptr) {
  std::unordered_map<std::string, std::size_t> seen;
  std::vector<std::string> dups;
  for (const auto& p : preds)
    if (++seen[p.id] == 2) dups.push_back(p.id);
  if (!dups.empty()) fail(ErrorKind::Coverage, "duplicate prediction ids: " + join(dups), dups);
  if (test) {
    if (test->has_synthetic())
      fail(ErrorKind::Integrity, "evaluation corpus contains synthetic articles");
    std::vector<std::string> missing, unknown, mismatched;
    for (const auto& a : *test)
      if (!seen.count(a.id)) missing.push_back(a.id);
    for (const auto& p : preds) {
      const Article* a = test->find(p.id);
      if (!a) unknown.push_back(p.id);
      else if (a->label != p.true_label) mismatched.push_back(p.id);
    }
    if (!missing.empty() || !unknown.empty()) {
      std::string msg;
      if (!missing.empty()) msg += "missing predictions for: " + join(missing);
      if (!unknown.empty()) msg += std::string(msg.empty() ? "" : "; ") + "ids not in test set: " + join(unknown);
      auto offenders = missing;
      offenders.insert(offenders.end(), unknown.begin(), unknown.end());
      fail(ErrorKind::Coverage, msg, offenders);
    }
    if (!mismatched.empty())
      fail(ErrorKind::Integrity, "true_label disagrees with test corpus for: " + join(mismatched), mismatched);
  }
  ConfusionMatrix cm;
  for (const auto& p : preds) {
    const bool truth_fake = p.true_label == Label::Fake;
    const bool pred_fake = p.pred_label == Label::Fake;
    if (truth_fake && pred_fake) ++cm.tp;
    else if (!truth_fake && pred_fake) ++cm.fp;
    else if (truth_fake) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

struct ClassMetrics {
  double precision = 0, recall = 0, f1 = 0;
  std::size_t support = 0;
};

struct EvalReport {
  std::string config_tag;
  bool baseline = false;
  ClassMetrics fake, real;
  double combined_f1 = 0;  // support-weighted
  double accuracy = 0;
  ConfusionMatrix cm;
  std::vector<std::string> degenerate;  // metrics defined as 0 by convention
  std::optional<std::string> failure;   // set when the configuration did not finish

  const ClassMetrics& of(Label l) const { return l == Label::Fake ? fake : real; }
};

namespace detail {

inline double ratio(std::size_t num, std::size_t den, const std::string& what,
                    std::vector<std::string>& flags) {
  if (den == 0) {
    flags.push_back(what);
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

inline ClassMetrics positive_class(const ConfusionMatrix& cm, const std::string& label,
                                   std::vector<std::string>& flags) {
  ClassMetrics m;
  m.precision = ratio(cm.tp, cm.tp + cm.fp, label + ".precision", flags);
  m.recall = ratio(cm.tp, cm.tp + cm.fn, label + ".recall", flags);
  if (m.precision + m.recall == 0.0) {
    flags.push_back(label + ".f1");
    m.f1 = 0.0;
  } else {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  m.support = cm.tp + cm.fn;
  return m;
}

}  // namespace detail

inline EvalReport evaluate(const ConfusionMatrix& cm, std::string config_tag = {}, bool baseline = false) {
  EvalReport r;
  r.config_tag = std::move(config_tag);
  r.baseline = baseline;
  r.cm = cm;
  r.fake = detail::positive_class(cm, "fake", r.degenerate);
  r.real = detail::positive_class(cm.swapped(), "real", r.degenerate);
  const std::size_t total = cm.total();
  if (total == 0) {
    r.degenerate.push_back("combined_f1");
    r.degenerate.push_back("accuracy");
    return r;
  }
  r.combined_f1 = (static_cast<double>(r.fake.support) * r.fake.f1 +
                   static_cast<double>(r.real.support) * r.real.f1) /
                  static_cast<double>(total);
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);
  return r;
}

inline EvalReport failed_report(std::string config_tag, std::string reason, bool baseline = false) {
  EvalReport r;
  r.config_tag = std::move(config_tag);
  r.baseline = baseline;
  r.failure = std::move(reason);
  return r;
}

/// Fixed 4-dp text; glibc rounds the exact binary value, ties to even.
inline std::string format4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

inline json to_json(const EvalReport& r) {
  auto cls = [](const ClassMetrics& m) {
    return json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
  };
  json j{{"config_tag", r.config_tag}, {"baseline", r.baseline}};
  if (r.failure) {
    j["status"] = "failed";
    j["error"] = *r.failure;
    return j;
  }
  j["status"] = "ok";
  j["classes"] = {{"fake", cls(r.fake)}, {"real", cls(r.real)}};
  j["combined_f1"] = r.combined_f1;
  j["accuracy"] = r.accuracy;
  j["confusion"] = {{"tp", r.cm.tp}, {"fp", r.cm.fp}, {"fn", r.cm.fn}, {"tn", r.cm.tn}};
  j["degenerate"] = r.degenerate;
  return j;
}

inline EvalReport report_from_json(const json& j) {
  EvalReport r;
  r.config_tag = j.at("config_tag").get<std::string>();
  r.baseline = j.value("baseline", false);
  if (j.value("status", "ok") != "ok") {
    r.failure = j.value("error", "failed");
    return r;
  }
  const auto& c = j.at("confusion");
  ConfusionMatrix cm{c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                     c.at("fn").get<std::size_t>(), c.at("tn").get<std::size_t>()};
  auto out = evaluate(cm, r.config_tag, r.baseline);
  return out;
}

/// Two rows per configuration (Fake, Real); combined F1 and accuracy on the
/// first. Baseline rows come first, otherwise input order is kept.
inline std::string report_table(std::vector<EvalReport> reports) {
  if (reports.empty()) fail(ErrorKind::Parameter, "report_table needs at least one report");
  std::stable_partition(reports.begin(), reports.end(), [](const EvalReport& r) { return r.baseline; });

  std::size_t tag_w = std::string("Configuration").size();
  for (const auto& r : reports) tag_w = std::max(tag_w, r.config_tag.size());
  std::ostringstream out;
  auto cell = [&](const std::string& s, std::size_t w) { out << std::left << std::setw(static_cast<int>(w)) << s; };
  auto header = [&] {
    cell("Configuration", tag_w + 2);
    cell("Class", 10);
    cell("P", 8);
    cell("R", 8);
    cell("F1", 8);
    cell("Combined F1", 13);
    out << "Acc.\n";
  };
  header();
  out << std::string(tag_w + 2 + 10 + 8 * 3 + 13 + 6, '-') << '\n';
  for (const auto& r : reports) {
    if (r.failure) {
      cell(r.config_tag, tag_w + 2);
      std::string why = *r.failure;
      std::replace(why.begin(), why.end(), '\n', ' ');
      out << (why == "AWAITING_PREDICTIONS" ? why : "FAILED: " + why) << '\n';
      continue;
    }
    for (Label l : kLabels) {
      const auto& m = r.of(l);
      cell(l == Label::Fake ? r.config_tag : "", tag_w + 2);
      cell(display(l), 10);
      cell(format4(m.precision), 8);
      cell(format4(m.recall), 8);
      if (l == Label::Fake) {
        cell(format4(m.f1), 8);
        cell(format4(r.combined_f1), 13);
        out << format4(r.accuracy) << '\n';
      } else {
        out << format4(m.f1) << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace augkit::metrics
