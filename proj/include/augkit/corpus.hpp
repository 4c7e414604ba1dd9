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
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "augkit/csv.hpp"
#include "augkit/error.hpp"
#include "augkit/hash.hpp"
#include "augkit/text.hpp"

namespace augkit {

// Integer codes are part of every file format; never renumber.
enum class Label : int { Fake = 0, Real = 1 };

inline constexpr std::array<Label, 2> kLabels{Label::Fake, Label::Real};

inline int code(Label l) { return static_cast<int>(l); }

inline std::string_view name(Label l) { return l == Label::Fake ? "fake" : "real"; }

inline std::string display(Label l) { return l == Label::Fake ? "Fake (0)" : "Real (1)"; }

inline std::optional<Label> parse_label(std::string_view raw) {
  auto v = text::lower_ascii(text::trim(raw));
  if (v == "0" || v == "fake") return Label::Fake;
  if (v == "1" || v == "real") return Label::Real;
  return std::nullopt;
}

enum class Provenance { Original, Synthetic };

inline std::string_view name(Provenance p) {
  return p == Provenance::Original ? "original" : "synthetic";
}

inline std::optional<Provenance> parse_provenance(std::string_view raw) {
  auto v = text::lower_ascii(text::trim(raw));
  if (v.empty() || v == "original") return Provenance::Original;
  if (v == "synthetic") return Provenance::Synthetic;
  return std::nullopt;
}

struct Article {
  std::string id;
  std::string headline;
  std::string content;
  std::string category;
  Label label = Label::Real;
  Provenance provenance = Provenance::Original;
  std::optional<std::string> parent_id;
  std::vector<std::pair<std::string, std::string>> extras;

  bool operator==(const Article&) const = default;
};

/// Per-(label, provenance) tallies.
struct Composition {
  std::array<std::array<std::size_t, 2>, 2> counts{};

  std::size_t& at(Label l, Provenance p) {
    return counts[code(l)][p == Provenance::Original ? 0 : 1];
  }
  std::size_t at(Label l, Provenance p) const {
    return counts[code(l)][p == Provenance::Original ? 0 : 1];
  }
  std::size_t label_total(Label l) const {
    return at(l, Provenance::Original) + at(l, Provenance::Synthetic);
  }
  std::size_t total() const { return label_total(Label::Fake) + label_total(Label::Real); }

  bool operator==(const Composition&) const = default;
};

class Corpus {
 public:
  Corpus() = default;

  /// Validates id uniqueness and the synthetic parent-link invariant.
  Corpus(std::string name, std::vector<Article> articles)
      : name_(std::move(name)), articles_(std::move(articles)) {
    std::vector<std::string> dups;
    std::set<std::string> dup_set;
    for (std::size_t i = 0; i < articles_.size(); ++i) {
      auto [it, inserted] = index_.emplace(articles_[i].id, i);
      if (!inserted && dup_set.insert(articles_[i].id).second) dups.push_back(articles_[i].id);
    }
    if (!dups.empty()) fail(ErrorKind::Validation, "duplicate article ids: " + join(dups), dups);

    for (const auto& a : articles_) {
      if (a.content.empty()) fail(ErrorKind::Validation, "article " + a.id + " has empty content", {a.id});
      if (a.provenance == Provenance::Original) {
        if (a.parent_id) fail(ErrorKind::Provenance, "original article " + a.id + " has a parent_id", {a.id});
        continue;
      }
      if (!a.parent_id)
        fail(ErrorKind::Provenance, "synthetic article " + a.id + " lacks parent_id", {a.id});
      const Article* parent = find(*a.parent_id);
      if (!parent || parent->provenance != Provenance::Original)
        fail(ErrorKind::Provenance,
             "synthetic article " + a.id + " references unknown original " + *a.parent_id, {a.id});
      if (parent->label != a.label)
        fail(ErrorKind::Provenance, "synthetic article " + a.id + " label differs from parent", {a.id});
    }
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<Article>& articles() const noexcept { return articles_; }
  std::size_t size() const noexcept { return articles_.size(); }
  bool empty() const noexcept { return articles_.empty(); }
  auto begin() const { return articles_.begin(); }
  auto end() const { return articles_.end(); }

  const Article* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &articles_[it->second];
  }
  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  bool has_synthetic() const {
    return std::any_of(articles_.begin(), articles_.end(),
                       [](const Article& a) { return a.provenance == Provenance::Synthetic; });
  }

 private:
  std::string name_;
  std::vector<Article> articles_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline Composition composition(const Corpus& c) {
  Composition comp;
  for (const auto& a : c) ++comp.at(a.label, a.provenance);
  return comp;
}

/// Maps canonical fields onto input CSV column names.
struct ColumnMapping {
  std::string id = "id";
  std::string headline = "headline";
  std::string content = "content";
  std::string category = "category";
  std::string label = "label";
  // Optional; recognized when present so corpora written by write_csv load back unchanged.
  std::string provenance = "provenance";
  std::string parent_id = "parent_id";
};

inline Corpus parse_csv(std::string_view data, const ColumnMapping& schema = {},
                        std::string name = "corpus") {
  auto table = csv::parse(data);
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < table.header.size(); ++i) col.emplace(table.header[i], i);

  auto require = [&](const std::string& column) {
    auto it = col.find(column);
    if (it == col.end()) fail(ErrorKind::Schema, "missing column '" + column + "'", {column});
    return it->second;
  };
  const std::size_t c_id = require(schema.id), c_head = require(schema.headline),
                    c_content = require(schema.content), c_cat = require(schema.category),
                    c_label = require(schema.label);
  std::optional<std::size_t> c_prov, c_parent;
  if (auto it = col.find(schema.provenance); it != col.end()) c_prov = it->second;
  if (auto it = col.find(schema.parent_id); it != col.end()) c_parent = it->second;

  std::set<std::size_t> mapped{c_id, c_head, c_content, c_cat, c_label};
  if (c_prov) mapped.insert(*c_prov);
  if (c_parent) mapped.insert(*c_parent);

  std::vector<Article> articles;
  articles.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    auto& row = table.rows[r];
    const std::string where =
        "row " + std::to_string(r + 1) + " (line " + std::to_string(table.line_numbers[r]) + ")";
    if (row.size() != table.header.size())
      fail(ErrorKind::Row, where + ": expected " + std::to_string(table.header.size()) +
                               " fields, got " + std::to_string(row.size()),
           {std::to_string(r + 1)});
    Article a;
    a.id = row[c_id];
    a.headline = row[c_head];
    a.content = row[c_content];
    a.category = row[c_cat];
    auto label = parse_label(row[c_label]);
    if (!label)
      fail(ErrorKind::Row, where + ": unparseable label '" + row[c_label] + "'",
           {std::to_string(r + 1)});
    a.label = *label;
    if (a.id.empty()) fail(ErrorKind::Row, where + ": empty id", {std::to_string(r + 1)});
    if (text::trim(a.content).empty())
      fail(ErrorKind::Row, where + ": empty content", {std::to_string(r + 1)});
    if (c_prov) {
      auto p = parse_provenance(row[*c_prov]);
      if (!p)
        fail(ErrorKind::Row, where + ": unparseable provenance '" + row[*c_prov] + "'",
             {std::to_string(r + 1)});
      a.provenance = *p;
    }
    if (c_parent && !row[*c_parent].empty()) a.parent_id = row[*c_parent];
    for (std::size_t i = 0; i < row.size(); ++i)
      if (!mapped.count(i)) a.extras.emplace_back(table.header[i], row[i]);
    articles.push_back(std::move(a));
  }
  return Corpus(std::move(name), std::move(articles));
}

inline Corpus load_csv(const std::string& path, const ColumnMapping& schema = {},
                       std::string name = {}) {
  return parse_csv(csv::read_file(path), schema, name.empty() ? path : std::move(name));
}

inline void write_csv(std::ostream& out, const Corpus& c) {
  std::vector<std::string> extra_keys;
  std::set<std::string> seen;
  for (const auto& a : c)
    for (const auto& [k, v] : a.extras)
      if (seen.insert(k).second) extra_keys.push_back(k);

  csv::Row header{"id", "headline", "content", "category", "label", "provenance", "parent_id"};
  header.insert(header.end(), extra_keys.begin(), extra_keys.end());
  csv::write_row(out, header);
  for (const auto& a : c) {
    csv::Row row{a.id,
                 a.headline,
                 a.content,
                 a.category,
                 std::to_string(code(a.label)),
                 std::string(name(a.provenance)),
                 a.parent_id.value_or("")};
    for (const auto& key : extra_keys) {
      auto it = std::find_if(a.extras.begin(), a.extras.end(),
                             [&](const auto& kv) { return kv.first == key; });
      row.push_back(it == a.extras.end() ? std::string() : it->second);
    }
    csv::write_row(out, row);
  }
}

inline std::string to_csv_string(const Corpus& c) {
  std::ostringstream ss;
  write_csv(ss, c);
  return ss.str();
}

inline void write_csv(const std::string& path, const Corpus& c) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path, {path});
  write_csv(out, c);
  if (!out) fail(ErrorKind::Io, "write failed for " + path, {path});
}

/// SHA-256 of the canonical CSV serialization.
inline std::string corpus_digest(const Corpus& c) { return sha256_hex(to_csv_string(c)); }

/// Exact rational in (0, 1).
struct Fraction {
  std::uint64_t num = 7;
  std::uint64_t den = 10;

  static Fraction from_double(double f) {
    if (!(f > 0.0 && f < 1.0)) fail(ErrorKind::Parameter, "train_fraction must lie in (0,1)");
    constexpr std::uint64_t kDen = 1'000'000'000;
    auto n = static_cast<std::uint64_t>(std::llround(f * static_cast<double>(kDen)));
    auto g = std::gcd(n, kDen);
    return {n / g, kDen / g};
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct SplitSpec {
  Fraction train_fraction{};
  std::vector<std::string> strata{"label", "category"};
  std::uint64_t seed = 0;
};

struct Split {
  Corpus train;
  Corpus test;
};

inline std::string field_value(const Article& a, const std::string& field) {
  if (field == "label") return std::to_string(code(a.label));
  if (field == "category") return a.category;
  if (field == "headline") return a.headline;
  if (field == "provenance") return std::string(name(a.provenance));
  for (const auto& [k, v] : a.extras)
    if (k == field) return v;
  return {};
}

/// Per-stratum quota floor(size*f) topped up by largest remainder until the
/// global train size reaches floor(total*f). Ties go to the lexicographically
/// smaller stratum key.
inline Split stratified_split(const Corpus& c, const SplitSpec& spec) {
  const auto [num, den] = spec.train_fraction;
  if (den == 0 || num == 0 || num >= den)
    fail(ErrorKind::Parameter, "train_fraction must lie strictly between 0 and 1");
  if (spec.strata.empty()) fail(ErrorKind::Parameter, "strata must be non-empty");
  for (const auto& a : c)
    if (a.provenance != Provenance::Original)
      fail(ErrorKind::Provenance, "cannot split a corpus containing synthetic article " + a.id,
           {a.id});
  for (const auto& s : spec.strata) {
    static const std::set<std::string> kBuiltin{"label", "category", "headline", "provenance"};
    if (kBuiltin.count(s)) continue;
    bool known = std::any_of(c.begin(), c.end(), [&](const Article& a) {
      return std::any_of(a.extras.begin(), a.extras.end(),
                         [&](const auto& kv) { return kv.first == s; });
    });
    if (!known && !c.empty()) fail(ErrorKind::Parameter, "unknown stratum field '" + s + "'", {s});
  }

  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::string key;
    for (std::size_t f = 0; f < spec.strata.size(); ++f) {
      if (f) key.push_back('\x1f');
      key += field_value(c.articles()[i], spec.strata[f]);
    }
    strata[key].push_back(i);
  }

  struct Quota {
    const std::string* key;
    std::uint64_t floor;
    std::uint64_t remainder;
    std::uint64_t take;
  };
  std::vector<Quota> quotas;
  std::uint64_t assigned = 0;
  for (const auto& [key, members] : strata) {
    std::uint64_t scaled = members.size() * num;
    quotas.push_back({&key, scaled / den, scaled % den, scaled / den});
    assigned += scaled / den;
  }
  const std::uint64_t target = static_cast<std::uint64_t>(c.size()) * num / den;
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quotas[a].remainder > quotas[b].remainder;
  });
  for (std::size_t i = 0; assigned < target && i < order.size(); ++i) {
    if (quotas[order[i]].remainder == 0) break;
    ++quotas[order[i]].take;
    ++assigned;
  }

  std::vector<bool> in_train(c.size(), false);
  std::size_t qi = 0;
  for (const auto& [key, members] : strata) {
    std::mt19937_64 rng(derive_seed(spec.seed, key));
    auto shuffled = members;
    seeded_shuffle(shuffled, rng);
    for (std::uint64_t j = 0; j < quotas[qi].take; ++j) in_train[shuffled[j]] = true;
    ++qi;
  }

  std::vector<Article> train, test;
  for (std::size_t i = 0; i < c.size(); ++i)
    (in_train[i] ? train : test).push_back(c.articles()[i]);
  return {Corpus(c.name() + "/train", std::move(train)),
          Corpus(c.name() + "/test", std::move(test))};
}

}  // namespace augkit
