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

#include "repjudge/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "json_util.hpp"

namespace repjudge {

using detail::Json;
using detail::OrderedJson;

namespace {

constexpr const char* kStoreFormat = "repjudge-chunk-store";
constexpr int kStoreVersion = 1;

void append_le(std::string& out, float value) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>(bits & 0xFFu));
    bits >>= 8;
  }
}

float read_le(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) bits = (bits << 8) | p[i];
  return std::bit_cast<float>(bits);
}

}  // namespace

double default_threshold(int label) {
  if (label == kLabelIf3) return 0.4;
  if (label == kLabelCrossFit) return 0.6;
  throw Error(ErrorKind::kDomain, "source label must be 0 or 1");
}

double cosine_similarity(std::span<const float> q, std::span<const float> v) {
  if (q.size() != v.size()) throw Error(ErrorKind::kShape, "cosine: dimensions differ");
  double dot = 0.0;
  double nq = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    dot += static_cast<double>(q[i]) * v[i];
    nq += static_cast<double>(q[i]) * q[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (nq == 0.0 || nv == 0.0) {
    throw Error(ErrorKind::kUndefinedSimilarity, "cosine: zero vector");
  }
  return std::clamp(dot / (std::sqrt(nq) * std::sqrt(nv)), 0.0, 1.0);
}

void ChunkStore::add(Chunk chunk) {
  if (chunk.metadata.label != 0 && chunk.metadata.label != 1) {
    throw Error(ErrorKind::kSchema, "chunk label must be 0 or 1");
  }
  if (chunk.embedding.empty()) throw Error(ErrorKind::kShape, "chunk embedding is empty");
  if (dimension_ == 0) dimension_ = chunk.embedding.size();
  if (chunk.embedding.size() != dimension_) {
    throw Error(ErrorKind::kShape, "chunk embedding has dimension " +
                                       std::to_string(chunk.embedding.size()) + ", store has " +
                                       std::to_string(dimension_));
  }
  chunks_.push_back(std::move(chunk));
}

std::string ChunkStore::serialize() const {
  OrderedJson header;
  header["format"] = kStoreFormat;
  header["version"] = kStoreVersion;
  header["dimension"] = dimension_;
  header["count"] = chunks_.size();
  std::string out = header.dump() + "\n";
  out.reserve(out.size() + chunks_.size() * dimension_ * 4);
  for (const Chunk& c : chunks_) {
    for (float f : c.embedding) append_le(out, f);
  }
  OrderedJson records = OrderedJson::array();
  for (const Chunk& c : chunks_) {
    records.push_back({{"text", c.text},
                       {"label", c.metadata.label},
                       {"sourceType", c.metadata.source_type},
                       {"pageIndex", c.metadata.page_index}});
  }
  out += records.dump();
  out += "\n";
  return out;
}

ChunkStore ChunkStore::deserialize(const std::string& bytes) {
  const std::string ctx = "chunk store";
  const auto newline = bytes.find('\n');
  if (newline == std::string::npos) throw Error(ErrorKind::kParse, ctx + ": missing header line");
  const Json header = detail::parse_json(bytes.substr(0, newline), ctx + " header");
  if (detail::get_field<std::string>(header, "format", ctx) != kStoreFormat) {
    throw Error(ErrorKind::kSchema, ctx + ": unknown format");
  }
  if (detail::get_field<int>(header, "version", ctx) != kStoreVersion) {
    throw Error(ErrorKind::kSchema, ctx + ": unsupported version");
  }
  const auto dimension = detail::get_field<std::size_t>(header, "dimension", ctx);
  const auto count = detail::get_field<std::size_t>(header, "count", ctx);
  const std::size_t block = count * dimension * 4;
  const std::size_t begin = newline + 1;
  if (bytes.size() < begin + block) throw Error(ErrorKind::kParse, ctx + ": truncated vectors");
  const Json records = detail::parse_json(bytes.substr(begin + block), ctx + " records");
  if (!records.is_array() || records.size() != count) {
    throw Error(ErrorKind::kSchema, ctx + ": record count differs from header");
  }
  ChunkStore store(dimension);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + begin);
  for (std::size_t i = 0; i < count; ++i) {
    Chunk c;
    c.embedding.resize(dimension);
    for (std::size_t d = 0; d < dimension; ++d) c.embedding[d] = read_le(p + 4 * (i * dimension + d));
    c.text = detail::get_field<std::string>(records[i], "text", ctx);
    c.metadata.label = detail::get_field<int>(records[i], "label", ctx);
    c.metadata.source_type = detail::get_field<std::string>(records[i], "sourceType", ctx);
    c.metadata.page_index = detail::get_field<std::int64_t>(records[i], "pageIndex", ctx);
    store.add(std::move(c));
  }
  return store;
}

void ChunkStore::save(const std::filesystem::path& path) const {
  detail::write_text_file(path, serialize());
}

ChunkStore ChunkStore::load(const std::filesystem::path& path) {
  return deserialize(detail::read_text_file(path));
}

ChunkStore ingest(std::span<const Page> pages, EmbeddingProvider& embedder) {
  ChunkStore store(embedder.dimension());
  for (const Page& page : pages) {
    Chunk c;
    c.text = page.text;
    c.metadata = {page.label, page.source_type, page.page_index};
    try {
      c.embedding = embedder.embed(page.text);
    } catch (const Error& e) {
      throw Error(ErrorKind::kProvider, "embedding page " + std::to_string(page.page_index) +
                                            " failed: " + e.what());
    }
    store.add(std::move(c));
  }
  return store;
}

std::vector<Page> load_pages(const std::filesystem::path& path) {
  const Json doc = detail::parse_json(detail::read_text_file(path), "pages file");
  const std::string ctx = "pages file";
  if (!doc.is_array()) throw Error(ErrorKind::kSchema, ctx + ": expected an array");
  std::vector<Page> pages;
  for (const Json& item : doc) {
    Page p;
    p.text = detail::get_field<std::string>(item, "text", ctx);
    p.label = detail::get_field<int>(item, "label", ctx);
    p.source_type = detail::get_field_or<std::string>(item, "sourceType", "", ctx);
    p.page_index = detail::get_field<std::int64_t>(item, "pageIndex", ctx);
    pages.push_back(std::move(p));
  }
  return pages;
}

std::vector<RetrievalHit> retrieve(std::span<const float> query, const ChunkStore& store,
                                   int label, std::size_t k, std::optional<double> threshold) {
  if (k < 1) throw Error(ErrorKind::kDomain, "retrieve: k must be >= 1");
  const double cutoff = threshold.value_or(default_threshold(label));
  std::vector<RetrievalHit> hits;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const Chunk& c = store.chunks()[i];
    if (c.metadata.label != label) continue;
    hits.push_back({i, cosine_similarity(query, c.embedding)});
  }
  std::stable_sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
    return a.similarity > b.similarity;
  });
  if (hits.size() > k) hits.resize(k);
  std::erase_if(hits, [&](const RetrievalHit& h) { return h.similarity < cutoff; });
  return hits;
}

std::vector<LabeledPair> load_labeled_pairs(const std::filesystem::path& path) {
  const Json doc = detail::parse_json(detail::read_text_file(path), "labeled pairs");
  const std::string ctx = "labeled pairs";
  std::vector<LabeledPair> out;
  for (const Json& item : detail::get_field<Json>(doc, "pairs", ctx)) {
    LabeledPair p;
    p.query = detail::get_field<std::vector<float>>(item, "query", ctx);
    p.chunk = detail::get_field<std::vector<float>>(item, "chunk", ctx);
    p.relevant = detail::get_field<bool>(item, "relevant", ctx);
    out.push_back(std::move(p));
  }
  return out;
}

SweepResult sweep_threshold(std::span<const LabeledPair> pairs, std::span<const double> grid) {
  if (pairs.empty()) throw Error(ErrorKind::kDomain, "sweep needs at least one pair");
  if (grid.empty()) throw Error(ErrorKind::kConfiguration, "sweep grid is empty");
  std::vector<double> sims;
  sims.reserve(pairs.size());
  for (const LabeledPair& p : pairs) sims.push_back(cosine_similarity(p.query, p.chunk));
  SweepResult result;
  for (double t : grid) {
    SweepPoint pt;
    pt.threshold = t;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const bool match = sims[i] >= t;
      if (match && pairs[i].relevant) ++pt.tp;
      if (match && !pairs[i].relevant) ++pt.fp;
      if (!match && pairs[i].relevant) ++pt.fn;
    }
    pt.precision = pt.tp + pt.fp > 0 ? static_cast<double>(pt.tp) / static_cast<double>(pt.tp + pt.fp) : 0.0;
    pt.recall = pt.tp + pt.fn > 0 ? static_cast<double>(pt.tp) / static_cast<double>(pt.tp + pt.fn) : 0.0;
    pt.f1 = pt.precision + pt.recall > 0.0
                ? 2.0 * pt.precision * pt.recall / (pt.precision + pt.recall)
                : 0.0;
    result.points.push_back(pt);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.points.size(); ++i) {
    if (result.points[i].f1 > result.points[best].f1) best = i;
  }
  result.best_threshold = result.points[best].threshold;
  result.best_f1 = result.points[best].f1;
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    if (i != best && result.points[i].f1 == result.best_f1) result.unique_best = false;
  }
  return result;
}

std::vector<float> load_vector(const std::filesystem::path& path) {
  const std::string text = detail::read_text_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    const Json doc = detail::parse_json(text, "vector file");
    try {
      return doc.get<std::vector<float>>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::kSchema, "vector file must hold a number array");
    }
  }
  std::istringstream in(text);
  std::vector<float> out;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      out.push_back(std::stof(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw Error(ErrorKind::kParse, "vector file: '" + token + "' is not a number");
    }
  }
  if (out.empty()) throw Error(ErrorKind::kParse, "vector file is empty");
  return out;
}

}  // namespace repjudge
