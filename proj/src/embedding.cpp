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

#include "repjudge/embedding.hpp"

#include <cctype>
#include <cmath>

#include "httplib.h"
#include "json_util.hpp"

namespace repjudge {

using detail::Json;

PrecomputedEmbeddings PrecomputedEmbeddings::from_json(const std::string& text) {
  const Json doc = detail::parse_json(text, "embedding file");
  const std::string ctx = "embedding file";
  PrecomputedEmbeddings out;
  out.dimension_ = detail::get_field<std::size_t>(doc, "dimension", ctx);
  const Json table = detail::get_field<Json>(doc, "embeddings", ctx);
  if (!table.is_object()) throw Error(ErrorKind::kSchema, ctx + ": 'embeddings' must be an object");
  for (const auto& [key, value] : table.items()) {
    std::vector<float> v;
    try {
      v = value.get<std::vector<float>>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::kSchema, ctx + ": embedding of '" + key + "' is not a number list");
    }
    if (v.size() != out.dimension_) {
      throw Error(ErrorKind::kShape, ctx + ": embedding of '" + key + "' has dimension " +
                                         std::to_string(v.size()));
    }
    out.table_.emplace(key, std::move(v));
  }
  return out;
}

PrecomputedEmbeddings PrecomputedEmbeddings::load(const std::filesystem::path& path) {
  return from_json(detail::read_text_file(path));
}

std::vector<float> PrecomputedEmbeddings::embed(const std::string& text) {
  auto it = table_.find(text);
  if (it == table_.end()) {
    throw Error(ErrorKind::kProvider, "no precomputed embedding for text '" +
                                          text.substr(0, 40) + "'");
  }
  return it->second;
}

std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ull ^ seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

HashEmbedder::HashEmbedder(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension_ == 0) throw Error(ErrorKind::kConfiguration, "embedding dimension must be > 0");
}

std::vector<float> HashEmbedder::embed(const std::string& text) {
  std::vector<double> acc(dimension_, 0.0);
  std::string token;
  bool any = false;
  auto flush = [&] {
    if (token.empty()) return;
    const std::uint64_t h = fnv1a64(token, seed_);
    acc[h % dimension_] += (h >> 63) != 0 ? -1.0 : 1.0;
    any = true;
    token.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      token.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  double norm = 0.0;
  for (double v : acc) norm += v * v;
  if (!any || norm == 0.0) {
    throw Error(ErrorKind::kProvider, "text has no tokens to embed");
  }
  norm = std::sqrt(norm);
  std::vector<float> out(dimension_);
  for (std::size_t i = 0; i < dimension_; ++i) out[i] = static_cast<float>(acc[i] / norm);
  return out;
}

HttpEmbeddingClient::HttpEmbeddingClient(Options options) : options_(std::move(options)) {
  if (options_.base_url.empty()) {
    throw Error(ErrorKind::kConfiguration, "embedding endpoint URL is empty");
  }
}

std::vector<float> HttpEmbeddingClient::embed(const std::string& text) {
  httplib::Client client(options_.base_url);
  client.set_connection_timeout(options_.timeout_seconds, 0);
  client.set_read_timeout(options_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!options_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.api_key);
  }
  const Json body = {{"model", options_.model}, {"input", text}};
  const auto res = client.Post("/v1/embeddings", headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorKind::kProvider, "embedding request to '" + options_.base_url +
                                          "' failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorKind::kProvider,
                "embedding endpoint returned HTTP " + std::to_string(res->status));
  }
  std::vector<float> v;
  try {
    const Json doc = Json::parse(res->body);
    v = doc.at("data").at(0).at("embedding").get<std::vector<float>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kProvider, std::string("malformed embedding response: ") + e.what());
  }
  if (v.empty()) throw Error(ErrorKind::kProvider, "embedding response is empty");
  if (dimension_ != 0 && v.size() != dimension_) {
    throw Error(ErrorKind::kProvider, "embedding dimension changed between calls");
  }
  dimension_ = v.size();
  return v;
}

}  // namespace repjudge
