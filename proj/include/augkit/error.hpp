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

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace augkit {

// Error categories map onto CLI exit codes (see tools/augkit.cpp).
enum class ErrorKind {
  Parameter,
  Schema,
  Row,
  Validation,
  Provenance,
  Integrity,
  Plan,
  Coverage,
  Degenerate,
  Provider,
  Training,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::Schema: return "schema error";
    case ErrorKind::Row: return "row error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Provenance: return "provenance error";
    case ErrorKind::Integrity: return "integrity error";
    case ErrorKind::Plan: return "plan error";
    case ErrorKind::Coverage: return "coverage error";
    case ErrorKind::Degenerate: return "degenerate input";
    case ErrorKind::Provider: return "provider error";
    case ErrorKind::Training: return "training error";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::vector<std::string> subjects = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        subjects_(std::move(subjects)) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Offending ids, column names, digests... whatever the message refers to.
  const std::vector<std::string>& subjects() const noexcept { return subjects_; }

 private:
  ErrorKind kind_;
  std::vector<std::string> subjects_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message,
                              std::vector<std::string> subjects = {}) {
  throw Error(kind, message, std::move(subjects));
}

inline std::string join(const std::vector<std::string>& items,
                        std::string_view sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace augkit
