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
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "augkit/csv.hpp"
#include "augkit/error.hpp"
#include "augkit/hash.hpp"
#include "augkit/http.hpp"
#include "augkit/text.hpp"

namespace augkit::embed {

using json = nlohmann::json;

class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) fail(ErrorKind::Parameter, "embedding must have dim >= 1");
    for (double v : values_)
      if (!std::isfinite(v)) fail(ErrorKind::Parameter, "embedding has a non-finite entry");
  }

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }

  EmbeddingVector scaled(double factor) const {
    auto v = values_;
    for (auto& x : v) x *= factor;
    return EmbeddingVector(std::move(v));
  }

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

/// Cosine similarity clamped to [-1, 1].
inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim())
    fail(ErrorKind::Parameter, "dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                                   std::to_string(b.dim()));
  double dot = 0, na = 0, nb = 0;
  auto x = a.values(), y = b.values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    na += x[i] * x[i];
    nb += y[i] * y[i];
  }
  if (na == 0.0 || nb == 0.0) fail(ErrorKind::Degenerate, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

class EmbedProvider {
 public:
  virtual ~EmbedProvider() = default;
  /// Identifies the vector space; used to namespace caches.
  virtual std::string id() const = 0;
  virtual std::size_t batch_size() const { return 64; }
  virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;
};

/// Code-point 3-grams of " text ", FNV-1a hashed into `dim` buckets, L2-normalized.
class HashingEmbedder : public EmbedProvider {
 public:
  explicit HashingEmbedder(std::size_t dim = 1024) : dim_(dim) {
    if (dim_ == 0) fail(ErrorKind::Parameter, "hashing embedder dim must be >= 1");
  }

  std::string id() const override { return "hashing-3gram-" + std::to_string(dim_); }

  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override {
    calls_.fetch_add(1);
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
  }

  EmbeddingVector embed_one(const std::string& t) const {
    std::vector<double> v(dim_, 0.0);
    auto cps = text::decode_utf8(" " + t + " ");
    for (std::size_t i = 0; i + 3 <= cps.size(); ++i)
      v[fnv1a64(text::encode_utf8(cps, i, i + 3)) % dim_] += 1.0;
    double norm = 0;
    for (double x : v) norm += x * x;
    if (norm > 0) {
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
    }
    return EmbeddingVector(std::move(v));
  }

  std::size_t calls() const { return calls_.load(); }

 private:
  std::size_t dim_;
  std::atomic<std::size_t> calls_{0};
};

inline json vector_line(const std::string& digest, const EmbeddingVector& v) {
  return json{{"text_sha256", digest},
              {"dim", v.dim()},
              {"values", std::vector<double>(v.values().begin(), v.values().end())}};
}

/// Reads the {text_sha256, dim, values} JSON-lines format. A torn final line
/// is ignored; malformed interior lines are schema errors.
inline std::unordered_map<std::string, EmbeddingVector> read_vector_file(
    const std::filesystem::path& path, std::size_t* valid_bytes = nullptr) {
  std::unordered_map<std::string, EmbeddingVector> out;
  auto data = csv::read_file(path.string());
  std::size_t pos = 0, line_no = 0;
  while (pos < data.size()) {
    auto nl = data.find('\n', pos);
    ++line_no;
    std::string_view line(data.data() + pos, (nl == std::string::npos ? data.size() : nl) - pos);
    auto j = json::parse(line, nullptr, false);
    bool ok = !j.is_discarded() && j.is_object() && j.contains("text_sha256") &&
              j.contains("values") && j.contains("dim");
    if (!ok) {
      if (nl == std::string::npos || text::trim(line).empty()) break;
      fail(ErrorKind::Schema, path.string() + ": malformed vector on line " + std::to_string(line_no));
    }
    auto values = j["values"].get<std::vector<double>>();
    if (values.size() != j["dim"].get<std::size_t>())
      fail(ErrorKind::Schema, path.string() + ": dim disagrees with values on line " +
                                  std::to_string(line_no));
    out.insert_or_assign(j["text_sha256"].get<std::string>(), EmbeddingVector(std::move(values)));
    if (nl == std::string::npos) {
      pos = data.size();
      break;
    }
    pos = nl + 1;
  }
  if (valid_bytes) *valid_bytes = pos;
  return out;
}

/// Vectors computed elsewhere, looked up by SHA-256 of the text.
class PrecomputedProvider : public EmbedProvider {
 public:
  explicit PrecomputedProvider(const std::filesystem::path& path)
      : path_(path), vectors_(read_vector_file(path)) {}

  std::string id() const override { return "precomputed:" + path_.filename().string(); }
  std::size_t batch_size() const override { return 1 << 20; }

  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override {
    std::vector<EmbeddingVector> out;
    std::vector<std::string> missing;
    for (const auto& t : texts) {
      auto d = sha256_hex(t);
      auto it = vectors_.find(d);
      if (it == vectors_.end()) {
        missing.push_back(d);
        continue;
      }
      out.push_back(it->second);
    }
    if (!missing.empty())
      fail(ErrorKind::Provider, "precomputed vectors missing for: " + join(missing), missing);
    return out;
  }

 private:
  std::filesystem::path path_;
  std::unordered_map<std::string, EmbeddingVector> vectors_;
};

struct HttpEmbedConfig {
  std::string url = "http://localhost:8000/v1";
  std::string model = "all-MiniLM-L6-v2";
  std::string api_key_env = "AUGKIT_API_KEY";
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{2'000};
  std::size_t batch_size = 32;
};

/// POST {url}/embeddings with {model, input}; vectors taken in input order.
class HttpEmbedProvider : public EmbedProvider {
 public:
  explicit HttpEmbedProvider(HttpEmbedConfig cfg) : cfg_(std::move(cfg)) {
    http::parse_endpoint(cfg_.url);
  }

  std::string id() const override { return "http:" + cfg_.model; }
  std::size_t batch_size() const override { return cfg_.batch_size; }

  static std::vector<EmbeddingVector> parse_response(const std::string& body, std::size_t expected) {
    auto j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.contains("data") || !j["data"].is_array())
      fail(ErrorKind::Provider, "embeddings response lacks a data array");
    std::vector<std::pair<std::size_t, EmbeddingVector>> items;
    for (std::size_t i = 0; i < j["data"].size(); ++i) {
      const auto& e = j["data"][i];
      items.emplace_back(e.value("index", i), EmbeddingVector(e.at("embedding").get<std::vector<double>>()));
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (items.size() != expected)
      fail(ErrorKind::Provider, "embeddings response has " + std::to_string(items.size()) +
                                    " vectors for " + std::to_string(expected) + " inputs");
    std::vector<EmbeddingVector> out;
    for (auto& [idx, v] : items) out.push_back(std::move(v));
    return out;
  }

  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override {
    const std::string body = json{{"model", cfg_.model}, {"input", texts}}.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      if (attempt)
        std::this_thread::sleep_for(cfg_.backoff_base * (1 << std::min(attempt - 1, 10)));
      auto res = http::post_json(cfg_.url, "/embeddings", body, http::env_secret(cfg_.api_key_env),
                                 cfg_.timeout);
      if (res.status >= 200 && res.status < 300) return parse_response(res.body, texts.size());
      last_error = res.status ? "HTTP " + std::to_string(res.status) : res.error;
      if (res.status >= 400 && res.status < 500 && res.status != 429) break;
    }
    fail(ErrorKind::Provider, "embeddings request failed: " + last_error);
  }

 private:
  HttpEmbedConfig cfg_;
};

/// Append-only cache in the precomputed-file format.
class EmbedCache {
 public:
  explicit EmbedCache(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::error_code ec;
    if (std::filesystem::exists(path_, ec)) {
      std::size_t valid = 0;
      vectors_ = read_vector_file(path_, &valid);
      if (valid < std::filesystem::file_size(path_)) std::filesystem::resize_file(path_, valid);
    }
  }

  const EmbeddingVector* find(const std::string& digest) const {
    auto it = vectors_.find(digest);
    return it == vectors_.end() ? nullptr : &it->second;
  }

  void put(const std::string& digest, const EmbeddingVector& v) {
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << vector_line(digest, v).dump() << '\n';
    out.flush();
    if (!out) fail(ErrorKind::Io, "cannot append to " + path_.string(), {path_.string()});
    vectors_.insert_or_assign(digest, v);
  }

  std::size_t size() const { return vectors_.size(); }

 private:
  std::filesystem::path path_;
  std::unordered_map<std::string, EmbeddingVector> vectors_;
};

struct EmbedStats {
  std::size_t cache_hits = 0;
  std::size_t provider_calls = 0;
};

/// One vector per text, in order. Unique uncached texts go to the provider
/// in batches, at most `max_inflight` batches at a time.
inline std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                          EmbedProvider& provider, EmbedCache* cache = nullptr,
                                          int max_inflight = 1, EmbedStats* stats = nullptr) {
  std::vector<std::string> digests(texts.size());
  std::unordered_map<std::string, EmbeddingVector> resolved;
  std::vector<std::string> pending_texts, pending_digests;
  std::set<std::string> queued;
  EmbedStats local;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    digests[i] = sha256_hex(texts[i]);
    if (resolved.count(digests[i]) || queued.count(digests[i])) continue;
    if (cache)
      if (const auto* v = cache->find(digests[i])) {
        resolved.emplace(digests[i], *v);
        ++local.cache_hits;
        continue;
      }
    queued.insert(digests[i]);
    pending_texts.push_back(texts[i]);
    pending_digests.push_back(digests[i]);
  }

  const std::size_t bs = std::max<std::size_t>(1, provider.batch_size());
  std::vector<std::pair<std::size_t, std::size_t>> batches;
  for (std::size_t b = 0; b < pending_texts.size(); b += bs)
    batches.emplace_back(b, std::min(pending_texts.size(), b + bs));

  std::vector<std::string> uncovered;
  std::string first_error;
  std::optional<std::size_t> dim;
  if (!resolved.empty()) dim = resolved.begin()->second.dim();
  for (std::size_t w = 0; w < batches.size(); w += static_cast<std::size_t>(std::max(1, max_inflight))) {
    std::vector<std::future<std::vector<EmbeddingVector>>> wave;
    const std::size_t wave_end = std::min(batches.size(), w + static_cast<std::size_t>(std::max(1, max_inflight)));
    for (std::size_t b = w; b < wave_end; ++b) {
      auto [lo, hi] = batches[b];
      std::vector<std::string> chunk(pending_texts.begin() + static_cast<std::ptrdiff_t>(lo),
                                     pending_texts.begin() + static_cast<std::ptrdiff_t>(hi));
      wave.push_back(std::async(wave_end - w > 1 ? std::launch::async : std::launch::deferred,
                                [&provider, chunk = std::move(chunk)] { return provider.embed_batch(chunk); }));
      ++local.provider_calls;
    }
    for (std::size_t b = w; b < wave_end; ++b) {
      auto [lo, hi] = batches[b];
      std::vector<EmbeddingVector> vectors;
      try {
        vectors = wave[b - w].get();
        if (vectors.size() != hi - lo)
          fail(ErrorKind::Provider, "provider returned the wrong number of vectors");
      } catch (const Error& e) {
        if (first_error.empty()) first_error = e.what();
        if (!e.subjects().empty()) {
          uncovered.insert(uncovered.end(), e.subjects().begin(), e.subjects().end());
        } else {
          for (std::size_t k = lo; k < hi; ++k) uncovered.push_back(pending_digests[k]);
        }
        continue;
      } catch (const std::exception& e) {
        if (first_error.empty()) first_error = e.what();
        for (std::size_t k = lo; k < hi; ++k) uncovered.push_back(pending_digests[k]);
        continue;
      }
      for (std::size_t k = 0; k < vectors.size(); ++k) {
        if (!dim) dim = vectors[k].dim();
        if (vectors[k].dim() != *dim)
          fail(ErrorKind::Provider, "embedding dimension drift: " + std::to_string(*dim) + " vs " +
                                        std::to_string(vectors[k].dim()));
        if (cache) cache->put(pending_digests[lo + k], vectors[k]);
        resolved.emplace(pending_digests[lo + k], std::move(vectors[k]));
      }
    }
  }
  if (!uncovered.empty())
    fail(ErrorKind::Provider,
         "no embedding for " + std::to_string(uncovered.size()) + " text(s) [" + join(uncovered) +
             "]: " + first_error,
         uncovered);

  if (stats) *stats = local;
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& d : digests) out.push_back(resolved.at(d));
  return out;
}

}  // namespace augkit::embed
