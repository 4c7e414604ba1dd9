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

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <ctime>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "augkit/corpus.hpp"
#include "augkit/error.hpp"
#include "augkit/hash.hpp"
#include "augkit/http.hpp"
#include "augkit/mock.hpp"
#include "augkit/prompting.hpp"

namespace augkit::gen {

using json = nlohmann::json;
using prompting::CandidateSet;
using prompting::ParseStatus;

struct GenConfig {
  std::string endpoint_url = "http://localhost:8000/v1";
  std::string model_id = "gemma-3-27b-it";
  double temperature = 1.0;
  int max_inflight = 4;
  int max_retries = 3;
  std::chrono::milliseconds timeout{120'000};
  std::string api_key_env = "AUGKIT_API_KEY";
  std::chrono::milliseconds backoff_base{2'000};
  double jitter = 0.5;  // +-50%

  void validate() const {
    if (max_inflight < 1) fail(ErrorKind::Parameter, "max_inflight must be >= 1");
    if (!std::isfinite(temperature) || temperature < 0)
      fail(ErrorKind::Parameter, "temperature must be finite and >= 0");
    if (max_retries < 0) fail(ErrorKind::Parameter, "max_retries must be >= 0");
  }
};

struct GenRecord {
  std::string source_id;
  std::string prompt_hash;  // hex SHA-256
  CandidateSet candidate_set;
  std::string timestamp;    // ISO-8601 UTC
  int attempt_count = 0;

  bool operator==(const GenRecord&) const = default;
};

inline std::string format_temperature(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", t);
  return buf;
}

inline std::string prompt_hash(const std::string& prompt, const std::string& model_id,
                               double temperature) {
  std::string material = prompt;
  material.push_back('\0');
  material += model_id;
  material.push_back('\0');
  material += format_temperature(temperature);
  return sha256_hex(material);
}

inline json to_json(const GenRecord& r) {
  return json{{"source_id", r.source_id},
              {"prompt_hash", r.prompt_hash},
              {"raw_response", r.candidate_set.raw_response},
              {"candidates", r.candidate_set.candidates},
              {"parse_status", prompting::name(r.candidate_set.status)},
              {"requested_n", r.candidate_set.requested_n},
              {"timestamp", r.timestamp},
              {"attempt_count", r.attempt_count}};
}

inline GenRecord record_from_json(const json& j) {
  GenRecord r;
  r.source_id = j.at("source_id").get<std::string>();
  r.prompt_hash = j.at("prompt_hash").get<std::string>();
  r.timestamp = j.at("timestamp").get<std::string>();
  r.attempt_count = j.at("attempt_count").get<int>();
  auto& cs = r.candidate_set;
  cs.source_id = r.source_id;
  cs.raw_response = j.at("raw_response").get<std::string>();
  cs.candidates = j.at("candidates").get<std::vector<std::string>>();
  cs.requested_n = j.at("requested_n").get<int>();
  auto status = prompting::parse_status_from(j.at("parse_status").get<std::string>());
  if (!status) fail(ErrorKind::Schema, "unknown parse_status in generation record");
  cs.status = *status;
  cs.surplus = std::max(0, static_cast<int>(cs.candidates.size()) - cs.requested_n);
  return r;
}

inline std::string iso8601_utc(std::chrono::system_clock::time_point tp) {
  std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

using Clock = std::function<std::string()>;

inline Clock system_clock() {
  return [] { return iso8601_utc(std::chrono::system_clock::now()); };
}

/// Fixed epoch; keeps mock caches byte-reproducible.
inline Clock epoch_clock() {
  return [] { return std::string("1970-01-01T00:00:00Z"); };
}

// ---------------------------------------------------------------------------
// Backends

struct ChatRequest {
  std::string model;
  double temperature = 1.0;
  std::string prompt;
};

struct ChatResponse {
  int status = 0;  // HTTP status; 0 = transport failure or timeout
  std::string content;
  std::string error;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Chat-completions JSON over HTTP; one user turn per request.
class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(GenConfig cfg) : cfg_(std::move(cfg)) {
    http::parse_endpoint(cfg_.endpoint_url);
  }

  static json request_body(const ChatRequest& req) {
    return json{{"model", req.model},
                {"temperature", req.temperature},
                {"messages", json::array({json{{"role", "user"}, {"content", req.prompt}}})}};
  }

  ChatResponse complete(const ChatRequest& req) override {
    auto res = http::post_json(cfg_.endpoint_url, "/chat/completions", request_body(req).dump(),
                               http::env_secret(cfg_.api_key_env), cfg_.timeout);
    ChatResponse out{res.status, {}, res.error};
    if (res.status >= 200 && res.status < 300) {
      auto body = json::parse(res.body, nullptr, false);
      if (!body.is_discarded() && body.contains("choices") && body["choices"].is_array() &&
          !body["choices"].empty()) {
        const auto& msg = body["choices"][0].value("message", json::object());
        if (msg.contains("content") && msg["content"].is_string())
          out.content = msg["content"].get<std::string>();
      }
    }
    return out;
  }

 private:
  GenConfig cfg_;
};

/// Deterministic offline backend. Recovers the article and N from the
/// rendered prompt, so it exercises the same path as a live endpoint.
class MockChatBackend : public ChatBackend {
 public:
  using FaultHook = std::function<std::optional<ChatResponse>(const ChatRequest&, std::size_t call)>;

  explicit MockChatBackend(std::uint64_t seed = 0) : seed_(seed) {}

  void set_latency(std::chrono::milliseconds latency) { latency_ = latency; }
  void set_fault_hook(FaultHook hook) { fault_ = std::move(hook); }

  ChatResponse complete(const ChatRequest& req) override {
    const std::size_t call = calls_.fetch_add(1);
    const int now = inflight_.fetch_add(1) + 1;
    int prev = max_seen_.load();
    while (now > prev && !max_seen_.compare_exchange_weak(prev, now)) {
    }
    struct Leave {
      std::atomic<int>& n;
      ~Leave() { n.fetch_sub(1); }
    } leave{inflight_};

    if (latency_.count() > 0) std::this_thread::sleep_for(latency_);
    if (fault_)
      if (auto injected = fault_(req, call)) return *injected;

    auto source = extract_source(req.prompt);
    auto n = extract_n(req.prompt);
    if (!source || !n) return {400, {}, "mock: prompt does not follow the paraphrase template"};
    auto variants = mock::paraphrase(*source, *n, derive_seed(seed_, sha256_hex(req.prompt)));
    return {200, prompting::wrap_candidates(variants), {}};
  }

  static std::optional<std::string> extract_source(const std::string& prompt) {
    auto header = prompt.rfind(prompting::kOutputHeader);
    if (header == std::string::npos) return std::nullopt;
    auto close = prompt.rfind(prompting::kFence, header);
    if (close == std::string::npos || close < prompting::kFence.size()) return std::nullopt;
    auto open = prompt.rfind(prompting::kFence, close - 1);
    if (open == std::string::npos || open + prompting::kFence.size() > close) return std::nullopt;
    return prompt.substr(open + prompting::kFence.size(), close - open - prompting::kFence.size());
  }

  static std::optional<int> extract_n(const std::string& prompt) {
    static const std::regex kWays(R"(in (\d+) different ways)");
    std::smatch m;
    if (!std::regex_search(prompt, m, kWays)) return std::nullopt;
    return std::stoi(m[1].str());
  }

  std::size_t calls() const { return calls_.load(); }
  int max_inflight_seen() const { return max_seen_.load(); }

 private:
  std::uint64_t seed_;
  std::chrono::milliseconds latency_{0};
  FaultHook fault_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<int> inflight_{0};
  std::atomic<int> max_seen_{0};
};

// ---------------------------------------------------------------------------
// Cache

/// JSON-lines store of GenRecords keyed by prompt hash. Holds an advisory
/// lock for its lifetime; a torn trailing line is cut off on open.
class GenCache {
 public:
  explicit GenCache(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    auto lock_path = path_.string() + ".lock";
    lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (lock_fd_ < 0) fail(ErrorKind::Io, "cannot open cache lock " + lock_path, {lock_path});
    if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(lock_fd_);
      fail(ErrorKind::Io, "cache " + path_.string() + " is in use by another run",
           {path_.string()});
    }
    load();
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) fail(ErrorKind::Io, "cannot open cache " + path_.string(), {path_.string()});
  }

  GenCache(const GenCache&) = delete;
  GenCache& operator=(const GenCache&) = delete;

  ~GenCache() {
    if (fd_ >= 0) ::close(fd_);
    if (lock_fd_ >= 0) {
      ::flock(lock_fd_, LOCK_UN);
      ::close(lock_fd_);
    }
  }

  const GenRecord* find(const std::string& hash) const {
    auto it = records_.find(hash);
    return it == records_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return records_.size(); }
  std::size_t discarded_on_load() const { return discarded_; }

  /// One line, one write(2), then fsync.
  void append(const GenRecord& r) {
    std::string line = to_json(r).dump() + "\n";
    const char* p = line.data();
    std::size_t left = line.size();
    while (left) {
      auto w = ::write(fd_, p, left);
      if (w < 0) {
        if (errno == EINTR) continue;
        fail(ErrorKind::Io, "cache write failed for " + path_.string(), {path_.string()});
      }
      p += w;
      left -= static_cast<std::size_t>(w);
    }
    ::fsync(fd_);
    records_.insert_or_assign(r.prompt_hash, r);
  }

 private:
  void load() {
    std::error_code ec;
    if (!std::filesystem::exists(path_, ec)) return;
    auto data = csv::read_file(path_.string());
    std::size_t pos = 0, good_end = 0;
    while (pos < data.size()) {
      auto nl = data.find('\n', pos);
      if (nl == std::string::npos) {
        ++discarded_;
        break;
      }
      auto parsed = json::parse(data.begin() + static_cast<std::ptrdiff_t>(pos),
                                data.begin() + static_cast<std::ptrdiff_t>(nl), nullptr, false);
      if (parsed.is_discarded()) {
        ++discarded_;
        break;
      }
      try {
        auto rec = record_from_json(parsed);
        records_.insert_or_assign(rec.prompt_hash, std::move(rec));
      } catch (const std::exception&) {
        ++discarded_;
        break;
      }
      pos = nl + 1;
      good_end = pos;
    }
    if (good_end < data.size()) std::filesystem::resize_file(path_, good_end);
  }

  std::filesystem::path path_;
  int fd_ = -1;
  int lock_fd_ = -1;
  std::size_t discarded_ = 0;
  std::unordered_map<std::string, GenRecord> records_;
};

// ---------------------------------------------------------------------------
// Driver

struct RequestTemplate {
  int n_variants = 5;
  prompting::Mode mode = prompting::Mode::ZeroShot;
  prompting::ExemplarBank exemplars;

  prompting::PromptRequest for_article(const Article& a) const {
    prompting::PromptRequest req{a, n_variants, mode, {}};
    if (mode == prompting::Mode::FewShot) req.exemplars = exemplars.for_source(a);
    return req;
  }
};

struct GenerateOptions {
  Clock clock = system_clock();
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
  /// Ignore cached Failed records and try them again.
  bool retry_failed = false;
  /// Stop dispatching after this many new cache appends (testing aid); 0 = unlimited.
  std::size_t stop_after = 0;
};

struct GenerateStats {
  std::size_t cache_hits = 0;
  std::size_t network_requests = 0;
  std::size_t complete = 0;
  std::size_t partial = 0;
  std::size_t failed = 0;
  std::size_t candidates = 0;
  std::vector<std::string> warnings;
};

struct GenerateResult {
  std::vector<GenRecord> records;  // input order
  GenerateStats stats;
};

namespace detail {

struct Job {
  std::string hash;
  std::string source_id;
  std::string prompt;
};

struct Outcome {
  GenRecord record;
  bool cacheable = false;
  std::size_t requests = 0;
};

inline bool transient(int status) { return status == 0 || status == 429 || status >= 500; }

inline Outcome run_job(const Job& job, int n, const GenConfig& cfg, ChatBackend& backend,
                       const GenerateOptions& opts) {
  ChatRequest req{cfg.model_id, cfg.temperature, job.prompt};
  std::mt19937_64 jitter_rng(derive_seed(0, job.hash));
  Outcome out;
  out.record.source_id = job.source_id;
  out.record.prompt_hash = job.hash;
  for (int attempt = 0;; ++attempt) {
    ++out.requests;
    auto res = backend.complete(req);
    out.record.attempt_count = attempt + 1;
    out.record.timestamp = opts.clock();
    const bool last = attempt >= cfg.max_retries;
    if (res.status >= 200 && res.status < 300) {
      out.record.candidate_set = prompting::parse_candidates(job.source_id, res.content, n);
      out.cacheable = true;
      if (out.record.candidate_set.status != ParseStatus::Failed || last) return out;
      continue;
    }
    out.cacheable = false;
    out.record.candidate_set = prompting::parse_candidates(job.source_id, "", n);
    if (!transient(res.status) || last) return out;
    double factor = std::ldexp(1.0, attempt) *
                    (1.0 - cfg.jitter + 2.0 * cfg.jitter * uniform_unit(jitter_rng));
    opts.sleep(std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(cfg.backoff_base.count()) * factor)));
  }
}

}  // namespace detail

/// One record per input article, in input order. Cached prompt hashes are
/// served without network traffic; identical prompts within a run share one
/// exchange. Requests run on at most cfg.max_inflight worker threads while the
/// calling thread is the sole cache writer.
inline GenerateResult generate(const std::vector<Article>& articles, const RequestTemplate& tmpl,
                               const GenConfig& cfg, ChatBackend& backend, GenCache& cache,
                               const GenerateOptions& opts = {}) {
  cfg.validate();
  GenerateResult result;
  std::vector<std::string> hashes(articles.size());
  std::vector<detail::Job> jobs;
  std::unordered_map<std::string, std::size_t> job_of;
  for (std::size_t i = 0; i < articles.size(); ++i) {
    auto prompt = prompting::build(tmpl.for_article(articles[i]));
    for (auto& w : prompt.warnings) result.stats.warnings.push_back(articles[i].id + ": " + w);
    hashes[i] = prompt_hash(prompt.text, cfg.model_id, cfg.temperature);
    const GenRecord* hit = cache.find(hashes[i]);
    if (hit && !(opts.retry_failed && hit->candidate_set.status == ParseStatus::Failed)) continue;
    if (job_of.count(hashes[i])) continue;
    job_of.emplace(hashes[i], jobs.size());
    jobs.push_back({hashes[i], articles[i].id, std::move(prompt.text)});
  }

  std::unordered_map<std::string, GenRecord> fresh;
  if (!jobs.empty()) {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<detail::Outcome> done;
    std::size_t next = 0;
    bool stop = false;
    const int workers = std::min<int>(cfg.max_inflight, static_cast<int>(jobs.size()));
    int live = workers;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t idx;
          {
            std::lock_guard lk(mu);
            if (stop || next >= jobs.size()) {
              --live;
              cv.notify_all();
              return;
            }
            idx = next++;
          }
          detail::Outcome outcome;
          try {
            outcome = detail::run_job(jobs[idx], tmpl.n_variants, cfg, backend, opts);
          } catch (const std::exception&) {
            outcome.record.source_id = jobs[idx].source_id;
            outcome.record.prompt_hash = jobs[idx].hash;
            outcome.record.timestamp = opts.clock();
            outcome.record.candidate_set = prompting::parse_candidates(jobs[idx].source_id, "", tmpl.n_variants);
            outcome.requests = 1;
          }
          {
            std::lock_guard lk(mu);
            done.push_back(std::move(outcome));
          }
          cv.notify_all();
        }
      });
    }
    std::size_t appended = 0;
    std::exception_ptr error;
    for (;;) {
      std::unique_lock lk(mu);
      cv.wait(lk, [&] { return !done.empty() || live == 0; });
      if (done.empty()) break;
      auto outcome = std::move(done.front());
      done.pop_front();
      lk.unlock();
      if (opts.stop_after && appended >= opts.stop_after) continue;  // drained, not recorded
      result.stats.network_requests += outcome.requests;
      if (outcome.cacheable && !error) {
        try {
          cache.append(outcome.record);
          ++appended;
        } catch (...) {
          error = std::current_exception();
        }
      }
      if (error || (opts.stop_after && appended >= opts.stop_after)) {
        std::lock_guard relock(mu);
        stop = true;
      }
      fresh.insert_or_assign(outcome.record.prompt_hash, std::move(outcome.record));
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  result.records.reserve(articles.size());
  for (std::size_t i = 0; i < articles.size(); ++i) {
    GenRecord rec;
    if (auto it = fresh.find(hashes[i]); it != fresh.end()) {
      rec = it->second;
    } else if (const GenRecord* hit = cache.find(hashes[i])) {
      rec = *hit;
      ++result.stats.cache_hits;
    } else {
      continue;  // only reachable with stop_after
    }
    rec.source_id = articles[i].id;
    rec.candidate_set.source_id = articles[i].id;
    switch (rec.candidate_set.status) {
      case ParseStatus::Complete: ++result.stats.complete; break;
      case ParseStatus::Partial: ++result.stats.partial; break;
      case ParseStatus::Failed: ++result.stats.failed; break;
    }
    result.stats.candidates += rec.candidate_set.candidates.size();
    result.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace augkit::gen
