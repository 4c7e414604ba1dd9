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

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "augkit/corpus.hpp"

namespace augkit::testing {

namespace fs = std::filesystem;

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "augkit-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  fs::path path_;
};

inline Article article(std::string id, Label label, std::string content, std::string category = "news") {
  Article a;
  a.id = std::move(id);
  a.headline = "headline " + a.id;
  a.content = std::move(content);
  a.category = std::move(category);
  a.label = label;
  return a;
}

/// Corpus with n_fake + n_real originals; each article has three sentences.
inline Corpus toy_corpus(std::size_t n_fake, std::size_t n_real, std::size_t n_categories = 3) {
  static const char* kWords[] = {"river", "market", "council", "festival", "storm", "bridge", "school", "harvest"};
  std::vector<Article> v;
  for (std::size_t i = 0; i < n_fake + n_real; ++i) {
    const Label l = i < n_fake ? Label::Fake : Label::Real;
    const std::string w1 = kWords[i % 8], w2 = kWords[(i / 8) % 8];
    std::string body = "The " + w1 + " report " + std::to_string(i) + " was said to be big. People saw the " + w2 +
                       " today. The government will help the city.";
    v.push_back(article((l == Label::Fake ? "f" : "r") + std::to_string(i), l, body,
                        "cat" + std::to_string(i % n_categories)));
  }
  return Corpus("toy", std::move(v));
}

}  // namespace augkit::testing
