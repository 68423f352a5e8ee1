// Copyright 2026 The repjudge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Pluggable text embedding providers.

#ifndef REPJUDGE_EMBEDDING_HPP_
#define REPJUDGE_EMBEDDING_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace repjudge {

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // Throws kProvider on failure.
  virtual std::vector<float> embed(const std::string& text) = 0;
  // 0 when unknown until the first call.
  virtual std::size_t dimension() const = 0;
};

// Looks vectors up by exact text in a JSON file
// {"dimension": d, "embeddings": {"<text>": [v0, v1, ...], ...}}.
class PrecomputedEmbeddings final : public EmbeddingProvider {
 public:
  static PrecomputedEmbeddings load(const std::filesystem::path& path);
  static PrecomputedEmbeddings from_json(const std::string& text);

  std::vector<float> embed(const std::string& text) override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::size_t dimension_ = 0;
  std::map<std::string, std::vector<float>> table_;
};

// Deterministic bag-of-words embedder for tests: each lower-cased
// alphanumeric token adds +-1 at an FNV-1a-hashed coordinate; the result is
// L2-normalized. Texts without tokens are a provider error.
class HashEmbedder final : public EmbeddingProvider {
 public:
  explicit HashEmbedder(std::size_t dimension = 256, std::uint64_t seed = 0);

  std::vector<float> embed(const std::string& text) override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t seed = 0);

// Client for an OpenAI-style embeddings endpoint:
//   POST <base_url>/v1/embeddings {"model": m, "input": text}
//   -> {"data": [{"embedding": [...]}]}
class HttpEmbeddingClient final : public EmbeddingProvider {
 public:
  struct Options {
    std::string base_url;  // e.g. "http://127.0.0.1:8080"
    std::string model;
    std::string api_key;   // sent as a bearer token when non-empty
    int timeout_seconds = 30;
  };

  explicit HttpEmbeddingClient(Options options);

  std::vector<float> embed(const std::string& text) override;
  std::size_t dimension() const override { return dimension_; }

 private:
  Options options_;
  std::size_t dimension_ = 0;
};

}  // namespace repjudge

#endif  // REPJUDGE_EMBEDDING_HPP_
