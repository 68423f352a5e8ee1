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

// Page-level chunk store with label-filtered cosine retrieval.

#ifndef REPJUDGE_RETRIEVAL_HPP_
#define REPJUDGE_RETRIEVAL_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repjudge/embedding.hpp"

namespace repjudge {

// Source labels: 1 for the IF3 rulebook, 0 for the CrossFit rulebook.
inline constexpr int kLabelCrossFit = 0;
inline constexpr int kLabelIf3 = 1;

// Default similarity cutoff per source label: 0.4 for label 1, 0.6 for
// label 0.
double default_threshold(int label);

struct ChunkMetadata {
  int label = 0;
  std::string source_type;
  std::int64_t page_index = 0;

  friend bool operator==(const ChunkMetadata&, const ChunkMetadata&) = default;
};

struct Chunk {
  std::string text;
  std::vector<float> embedding;
  ChunkMetadata metadata;

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

// q.v / (|q| |v|) clamped to [0, 1]. Throws kShape on a dimension mismatch
// and kUndefinedSimilarity for a zero vector.
double cosine_similarity(std::span<const float> q, std::span<const float> v);

// Immutable once built; concurrent reads are safe.
class ChunkStore {
 public:
  ChunkStore() = default;
  explicit ChunkStore(std::size_t dimension) : dimension_(dimension) {}

  // Throws kShape on a dimension mismatch and kSchema for a label outside
  // {0, 1}. The first chunk fixes the dimension of an empty store.
  void add(Chunk chunk);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return chunks_.size(); }
  const std::vector<Chunk>& chunks() const { return chunks_; }

  // Header line {"format", "version", "dimension", "count"}, then
  // count * dimension little-endian float32 values, then a JSON array of
  // {"text", "label", "sourceType", "pageIndex"}.
  void save(const std::filesystem::path& path) const;
  static ChunkStore load(const std::filesystem::path& path);

  std::string serialize() const;
  static ChunkStore deserialize(const std::string& bytes);

  friend bool operator==(const ChunkStore&, const ChunkStore&) = default;

 private:
  std::size_t dimension_ = 0;
  std::vector<Chunk> chunks_;
};

struct Page {
  std::string text;
  int label = 0;
  std::string source_type;
  std::int64_t page_index = 0;
};

// One chunk per page. Provider failures are rethrown as kProvider naming the
// page index.
ChunkStore ingest(std::span<const Page> pages, EmbeddingProvider& embedder);

// Pages file: JSON array of {"text", "label", "sourceType", "pageIndex"}.
std::vector<Page> load_pages(const std::filesystem::path& path);

struct RetrievalHit {
  std::size_t index = 0;  // position in the store
  double similarity = 0.0;
};

// Top-k chunks of `label` by similarity (ties: lower store index), then
// those below the threshold are dropped.
std::vector<RetrievalHit> retrieve(std::span<const float> query, const ChunkStore& store,
                                   int label, std::size_t k,
                                   std::optional<double> threshold = std::nullopt);

struct LabeledPair {
  std::vector<float> query;
  std::vector<float> chunk;
  bool relevant = false;
};

// {"pairs": [{"query": [...], "chunk": [...], "relevant": bool}]}
std::vector<LabeledPair> load_labeled_pairs(const std::filesystem::path& path);

struct SweepPoint {
  double threshold = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;  // in grid order
  double best_threshold = 0.0;     // first grid point with maximal F1
  double best_f1 = 0.0;
  bool unique_best = true;         // no other grid point reaches best_f1
};

// A pair is a predicted match iff its similarity >= t.
SweepResult sweep_threshold(std::span<const LabeledPair> pairs, std::span<const double> grid);

// Query vector file: a JSON array or whitespace-separated numbers.
std::vector<float> load_vector(const std::filesystem::path& path);

}  // namespace repjudge

#endif  // REPJUDGE_RETRIEVAL_HPP_
