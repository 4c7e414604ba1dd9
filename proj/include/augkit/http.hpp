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

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>

#include "augkit/error.hpp"

namespace augkit::http {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string base_path;
};

/// Splits "https://host:8080/v1" into origin and base path ("/v1").
inline Endpoint parse_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    fail(ErrorKind::Parameter, "endpoint url needs a scheme: " + url, {url});
  auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    fail(ErrorKind::Parameter, "unsupported url scheme '" + scheme + "'", {url});
  auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path_start);
  ep.base_path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
  return ep;
}

struct Response {
  int status = 0;  // 0 = transport failure
  std::string body;
  std::string error;
};

/// Reads a secret from the environment; the value is never logged.
inline std::optional<std::string> env_secret(const std::string& var) {
  if (var.empty()) return std::nullopt;
  const char* v = std::getenv(var.c_str());
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

inline Response post_json(const std::string& url, const std::string& suffix,
                          const std::string& body, const std::optional<std::string>& bearer,
                          std::chrono::milliseconds timeout) {
  auto ep = parse_endpoint(url);
  httplib::Client client(ep.origin);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (bearer) headers.emplace("Authorization", "Bearer " + *bearer);
  auto res = client.Post(ep.base_path + suffix, headers, body, "application/json");
  Response out;
  if (!res) {
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

}  // namespace augkit::http
