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


#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "repjudge/error.hpp"
#include "repjudge/retrieval.hpp"
#include "synthetic.hpp"

namespace repjudge {
namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kIo;
}

std::vector<float> unit(double deg) {
  const double r = deg * M_PI / 180.0;
  return {static_cast<float>(std::cos(r)), static_cast<float>(std::sin(r))};
}

std::vector<float> at_similarity(double s) {
  return {static_cast<float>(s), static_cast<float>(std::sqrt(1.0 - s * s))};
}

Chunk chunk(std::vector<float> v, int label, std::int64_t page = 0) {
  return {"page " + std::to_string(page), std::move(v), {label, "pdf", page}};
}

TEST(Cosine, Examples) {
  const std::vector<float> a{1, 0}, b{0, 1}, c{2, 2}, d{-1, 0};
  EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-12);
  EXPECT_NEAR(cosine_similarity(a, b), 0.0, 1e-12);
  EXPECT_NEAR(cosine_similarity(a, c), std::sqrt(0.5), 1e-7);
  EXPECT_EQ(cosine_similarity(a, d), 0.0);  // clamped
  const std::vector<float> zero{0, 0}, three{1, 2, 3};
  EXPECT_EQ(kind_of([&] { cosine_similarity(a, zero); }), ErrorKind::kUndefinedSimilarity);
  EXPECT_EQ(kind_of([&] { cosine_similarity(a, three); }), ErrorKind::kShape);
}

TEST(Cosine, ScaleInvariantAndBounded) {
  std::mt19937_64 rng(3);
  std::normal_distribution<float> n(0, 1);
  std::uniform_real_distribution<float> scale(0.01f, 100.0f);
  for (int i = 0; i < 300; ++i) {
    std::vector<float> q(8), v(8), qs(8);
    const float k = scale(rng);
    for (int j = 0; j < 8; ++j) {
      q[j] = n(rng);
      v[j] = n(rng);
      qs[j] = q[j] * k;
    }
    const double s = cosine_similarity(q, v);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_NEAR(s, cosine_similarity(qs, v), 1e-5);
    EXPECT_NEAR(s, cosine_similarity(v, q), 1e-12);
  }
}

TEST(Retrieve, DefaultThresholds) {
  EXPECT_EQ(default_threshold(kLabelIf3), 0.4);
  EXPECT_EQ(default_threshold(kLabelCrossFit), 0.6);
}

TEST(Retrieve, TopKThenThreshold) {
  ChunkStore store;
  store.add(chunk(at_similarity(0.3), kLabelIf3, 0));
  store.add(chunk(at_similarity(0.9), kLabelIf3, 1));
  store.add(chunk(at_similarity(0.95), kLabelCrossFit, 2));
  store.add(chunk(at_similarity(0.8), kLabelIf3, 3));
  const std::vector<float> q{1, 0};
  const auto top2 = retrieve(q, store, kLabelIf3, 2);
  ASSERT_EQ(top2.size(), 2u);
  EXPECT_EQ(top2[0].index, 1u);
  EXPECT_EQ(top2[1].index, 3u);
  EXPECT_NEAR(top2[0].similarity, 0.9, 1e-6);
  const auto cut = retrieve(q, store, kLabelIf3, 2, 0.85);
  ASSERT_EQ(cut.size(), 1u);
  EXPECT_EQ(cut[0].index, 1u);
  // Thresholding happens after top-k: k=1 never resurfaces a lower hit.
  EXPECT_EQ(retrieve(q, store, kLabelIf3, 1, 0.95).size(), 0u);
  const auto other = retrieve(q, store, kLabelCrossFit, 5);
  ASSERT_EQ(other.size(), 1u);
  EXPECT_EQ(other[0].index, 2u);
}

TEST(Retrieve, TiesGoToLowerIndex) {
  ChunkStore store;
  for (int i = 0; i < 4; ++i) store.add(chunk(unit(30), kLabelIf3, i));
  const auto hits = retrieve(unit(0), store, kLabelIf3, 3);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].index, 0u);
  EXPECT_EQ(hits[1].index, 1u);
  EXPECT_EQ(hits[2].index, 2u);
}

TEST(ChunkStoreTest, AddValidation) {
  ChunkStore store;
  store.add(chunk({1, 0, 0}, 0));
  EXPECT_EQ(store.dimension(), 3u);
  EXPECT_EQ(kind_of([&] { store.add(chunk({1, 0}, 0)); }), ErrorKind::kShape);
  EXPECT_EQ(kind_of([&] { store.add(chunk({1, 0, 0}, 2)); }), ErrorKind::kSchema);
}

TEST(ChunkStoreTest, SerializeRoundTrip) {
  ChunkStore store;
  store.add({"Hips must open fully", {0.25f, -1.5f, 3.0e-8f}, {1, "pdf", 4}});
  store.add({"quote \" and\nnewline", {1.0f, 2.0f, 3.0f}, {0, "html", 0}});
  const std::string bytes = store.serialize();
  EXPECT_EQ(ChunkStore::deserialize(bytes), store);
  const auto path = std::filesystem::temp_directory_path() / "repjudge_store_test.bin";
  store.save(path);
  EXPECT_EQ(ChunkStore::load(path), store);
  std::filesystem::remove(path);
  EXPECT_EQ(ChunkStore::deserialize(ChunkStore{}.serialize()), ChunkStore{});
}

TEST(ChunkStoreTest, CorruptInputs) {
  ChunkStore store;
  store.add(chunk({1, 2}, 0));
  const std::string bytes = store.serialize();
  EXPECT_THROW(ChunkStore::deserialize(bytes.substr(0, bytes.size() / 2)), Error);
  EXPECT_THROW(ChunkStore::deserialize("garbage"), Error);
  EXPECT_EQ(kind_of([] { ChunkStore::load("/nonexistent/store.bin"); }), ErrorKind::kIo);
}

TEST(HashEmbedderTest, DeterministicAndNormalized) {
  HashEmbedder e(64);
  const auto a = e.embed("Full hip extension at the top");
  EXPECT_EQ(a, e.embed("full HIP extension, at the top!"));
  EXPECT_EQ(a.size(), 64u);
  double norm = 0;
  for (float x : a) norm += static_cast<double>(x) * x;
  EXPECT_NEAR(norm, 1.0, 1e-6);
  EXPECT_NE(a, HashEmbedder(64, 7).embed("Full hip extension at the top"));
  EXPECT_EQ(kind_of([&] { e.embed("  ... "); }), ErrorKind::kProvider);
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Ingest, OneChunkPerPage) {
  const std::vector<Page> pages{{"Hips travel below the knee crease", 1, "pdf", 0},
                                {"Arms locked out overhead at the finish", 1, "pdf", 1},
                                {"Rope passes under the feet twice", 0, "pdf", 7}};
  HashEmbedder e(128);
  const ChunkStore store = ingest(pages, e);
  ASSERT_EQ(store.size(), 3u);
  EXPECT_EQ(store.chunks()[2].metadata, (ChunkMetadata{0, "pdf", 7}));
  const auto q = e.embed("hips below the knee");
  const auto hits = retrieve(q, store, kLabelIf3, 1);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].index, 0u);

  const std::vector<Page> bad{{"fine text", 1, "pdf", 0}, {"!!", 1, "pdf", 5}};
  try {
    ingest(bad, e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::kProvider);
    EXPECT_NE(std::string(err.what()).find('5'), std::string::npos);
  }
}

TEST(Sweep, FourPairs) {
  const std::vector<float> q{1, 0};
  const std::vector<LabeledPair> pairs{{q, at_similarity(0.9), true},
                                       {q, at_similarity(0.6), false},
                                       {q, at_similarity(0.45), true},
                                       {q, at_similarity(0.2), false}};
  const std::vector<double> grid{0.5};
  const SweepResult r = sweep_threshold(pairs, grid);
  ASSERT_EQ(r.points.size(), 1u);
  EXPECT_EQ(r.points[0].tp, 1);
  EXPECT_EQ(r.points[0].fp, 1);
  EXPECT_EQ(r.points[0].fn, 1);
  EXPECT_DOUBLE_EQ(r.points[0].f1, 0.5);
  const std::vector<double> wide{0.1, 0.4, 0.7};
  const SweepResult w = sweep_threshold(pairs, wide);
  EXPECT_EQ(w.best_threshold, 0.4);
  EXPECT_DOUBLE_EQ(w.best_f1, 0.8);
  EXPECT_TRUE(w.unique_best);
}

TEST(Sweep, CommittedPairsHaveUniquePeak) {
  const auto pairs = load_labeled_pairs(testing::fixture_dir() / "retrieval" / "pairs.json");
  const auto gen = testing::retrieval_pairs();
  ASSERT_EQ(pairs.size(), 40u);
  ASSERT_EQ(pairs.size(), gen.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(pairs[i].query, gen[i].query);
    EXPECT_EQ(pairs[i].chunk, gen[i].chunk);
    EXPECT_EQ(pairs[i].relevant, gen[i].relevant);
  }
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(i * 0.05);
  const SweepResult r = sweep_threshold(pairs, grid);
  EXPECT_TRUE(r.unique_best);
  for (const SweepPoint& p : r.points) {
    if (p.threshold != r.best_threshold) EXPECT_LT(p.f1, r.best_f1);
    EXPECT_EQ(p.tp + p.fn, std::count_if(pairs.begin(), pairs.end(),
                                         [](const LabeledPair& l) { return l.relevant; }));
  }
}

TEST(PrecomputedEmbeddingsTest, LookupAndErrors) {
  const auto p = PrecomputedEmbeddings::from_json(
      R"({"dimension": 2, "embeddings": {"a": [1, 0], "b": [0.5, 0.5]}})");
  EXPECT_EQ(p.dimension(), 2u);
  auto copy = p;
  EXPECT_EQ(copy.embed("b"), (std::vector<float>{0.5f, 0.5f}));
  EXPECT_EQ(kind_of([&] { copy.embed("c"); }), ErrorKind::kProvider);
  EXPECT_THROW(PrecomputedEmbeddings::from_json(R"({"dimension": 3, "embeddings": {"a": [1]}})"),
               Error);
}

class LocalEmbeddingServer {
 public:
  LocalEmbeddingServer() {
    server_.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
      last_auth_ = req.get_header_value("Authorization");
      const auto body = nlohmann::json::parse(req.body);
      if (body["input"] == "fail") {
        res.status = 500;
        return;
      }
      const double n = static_cast<double>(body["input"].get<std::string>().size());
      nlohmann::json out = {{"data", {{{"embedding", {n, 1.0, -2.0}}}}}};
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalEmbeddingServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::string last_auth_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpEmbeddingClientTest, TalksToLocalServer) {
  LocalEmbeddingServer server;
  HttpEmbeddingClient client({server.url(), "test-model", "secret", 5});
  EXPECT_EQ(client.embed("abcd"), (std::vector<float>{4.0f, 1.0f, -2.0f}));
  EXPECT_EQ(client.dimension(), 3u);
  EXPECT_EQ(server.last_auth_, "Bearer secret");
  EXPECT_EQ(kind_of([&] { client.embed("fail"); }), ErrorKind::kProvider);
}

TEST(HttpEmbeddingClientTest, UnreachableServer) {
  HttpEmbeddingClient client({"http://127.0.0.1:1", "m", "", 1});
  EXPECT_EQ(kind_of([&] { client.embed("x"); }), ErrorKind::kProvider);
}

}  // namespace
}  // namespace repjudge
