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

#include <algorithm>
#include <functional>
#include <random>

#include "json.hpp"

#include "oracles.hpp"
#include "repjudge/error.hpp"
#include "repjudge/evaluation.hpp"
#include "synthetic.hpp"

namespace repjudge {
namespace {

RepRecord rec(std::int64_t s, std::int64_t e, RepLabel l = RepLabel::kValid) {
  RepRecord r;
  r.t_start = s;
  r.t_end = e;
  r.label = l;
  return r;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kIo;
}

TEST(Tiou, Examples) {
  EXPECT_DOUBLE_EQ(tiou({0, 10}, {5, 15}), 6.0 / 16.0);
  EXPECT_DOUBLE_EQ(tiou({0, 10}, {0, 10}), 1.0);
  EXPECT_DOUBLE_EQ(tiou({0, 4}, {5, 9}), 0.0);
  EXPECT_DOUBLE_EQ(tiou({3, 3}, {3, 3}), 1.0);
  EXPECT_DOUBLE_EQ(tiou({0, 9}, {9, 18}), 1.0 / 19.0);
}

TEST(Tiou, AgreesWithFrameCounting) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> d(0, 40);
  for (int i = 0; i < 500; ++i) {
    int a0 = d(rng), a1 = d(rng), b0 = d(rng), b1 = d(rng);
    if (a0 > a1) std::swap(a0, a1);
    if (b0 > b1) std::swap(b0, b1);
    const double t = tiou({a0, a1}, {b0, b1});
    EXPECT_NEAR(t, testing::frames_tiou(a0, a1, b0, b1), 1e-12);
    EXPECT_EQ(t, tiou({b0, b1}, {a0, a1}));
    EXPECT_GE(t, 0.0);
    EXPECT_LE(t, 1.0);
  }
}

TEST(MatchReps, ClassConsistent) {
  const std::vector<RepRecord> p{rec(0, 10), rec(20, 30, RepLabel::kInvalid)};
  const std::vector<GroundTruthRep> g{{0, 10, RepLabel::kInvalid}, {20, 30, RepLabel::kInvalid}};
  const MatchResult m = match_reps(p, g);
  EXPECT_EQ(m.of(RepLabel::kValid), (ClassCounts{0, 1, 0}));
  EXPECT_EQ(m.of(RepLabel::kInvalid), (ClassCounts{1, 0, 1}));
}

TEST(MatchReps, ThresholdInclusiveAndDefault) {
  EXPECT_DOUBLE_EQ(kDefaultTiouThreshold, 0.2);
  // tIoU exactly 0.2: 2 shared frames over 10.
  const std::vector<RepRecord> p{rec(0, 5)};
  const std::vector<GroundTruthRep> g{{4, 9, RepLabel::kValid}};
  EXPECT_DOUBLE_EQ(tiou({0, 5}, {4, 9}), 0.2);
  EXPECT_EQ(match_reps(p, g).of(RepLabel::kValid).tp, 1);
  EXPECT_EQ(match_reps(p, g, 0.21).of(RepLabel::kValid).tp, 0);
  // A zero-overlap pair never matches, even at threshold 0.
  const std::vector<GroundTruthRep> far{{50, 60, RepLabel::kValid}};
  EXPECT_EQ(match_reps(p, far, 0.0).of(RepLabel::kValid).tp, 0);
}

TEST(MatchReps, GreedyVersusOptimal) {
  const std::vector<RepRecord> p2{rec(0, 10), rec(11, 30)};
  const std::vector<GroundTruthRep> g2{{2, 12, RepLabel::kValid}, {40, 50, RepLabel::kValid}};
  const MatchResult greedy = match_reps(p2, g2, 0.05, MatchMode::kGreedy);
  EXPECT_EQ(greedy.of(RepLabel::kValid).tp, 1);
  EXPECT_EQ(greedy.pairs.size(), 1u);
  EXPECT_EQ(greedy.pairs[0].prediction, 0u);
}

TEST(MatchReps, OptimalFindsMoreMatchesThanGreedy) {
  // p0 overlaps both ground truths, p1 only the first; greedy pairs p0 with
  // g0 (best tIoU) and leaves p1 unmatched.
  const std::vector<RepRecord> p{rec(0, 19), rec(0, 7)};
  const std::vector<GroundTruthRep> g{{0, 15, RepLabel::kValid}, {16, 30, RepLabel::kValid}};
  const MatchResult greedy = match_reps(p, g, 0.1, MatchMode::kGreedy);
  const MatchResult optimal = match_reps(p, g, 0.1, MatchMode::kOptimal);
  EXPECT_EQ(greedy.of(RepLabel::kValid).tp, 1);
  EXPECT_EQ(optimal.of(RepLabel::kValid).tp, 2);
}

TEST(MatchReps, AgreesWithBruteForce) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<RepRecord> p;
    std::vector<GroundTruthRep> g;
    testing::random_match_instance(rng, 4, p, g);
    const double threshold = std::uniform_real_distribution<double>(0.05, 0.6)(rng);
    const testing::BruteMatch best = testing::brute_force_match(p, g, threshold);
    const MatchResult opt = match_reps(p, g, threshold, MatchMode::kOptimal);
    const MatchResult greedy = match_reps(p, g, threshold, MatchMode::kGreedy);
    double total = 0.0;
    for (const auto& pair : opt.pairs) total += pair.tiou;
    for (int c = 0; c < 2; ++c) {
      EXPECT_EQ(opt.counts[c].tp, best.matches[c]);
      EXPECT_LE(greedy.counts[c].tp, best.matches[c]);
      // Every rep is accounted for exactly once.
      for (const MatchResult* m : {&opt, &greedy}) {
        std::int64_t np = 0, ng = 0;
        for (const auto& r : p) np += class_index(r.label) == static_cast<std::size_t>(c);
        for (const auto& r : g) ng += class_index(r.label) == static_cast<std::size_t>(c);
        EXPECT_EQ(m->counts[c].tp + m->counts[c].fp, np);
        EXPECT_EQ(m->counts[c].tp + m->counts[c].fn, ng);
      }
    }
    EXPECT_NEAR(total, best.total_tiou, 1e-9);
    for (const MatchResult* m : {&opt, &greedy}) {
      for (const auto& pair : m->pairs) {
        EXPECT_GE(pair.tiou, threshold);
        EXPECT_EQ(p[pair.prediction].label, g[pair.ground_truth].label);
      }
    }
  }
}

TEST(MatchReps, RejectsBadGroundTruth) {
  const std::vector<RepRecord> p;
  const std::vector<GroundTruthRep> reversed{{10, 5, RepLabel::kValid}};
  const std::vector<GroundTruthRep> overlap{{0, 10, RepLabel::kValid}, {10, 20, RepLabel::kValid}};
  const std::vector<GroundTruthRep> unsorted{{30, 40, RepLabel::kValid}, {0, 10, RepLabel::kValid}};
  for (const auto* g : {&reversed, &overlap, &unsorted}) {
    EXPECT_EQ(kind_of([&] { match_reps(p, *g); }), ErrorKind::kAnnotation);
  }
}

TEST(Prf, Examples) {
  MatchResult m;
  m.counts[0] = {8, 2, 0};
  m.counts[1] = {0, 0, 0};
  const PrfReport r = prf(m);
  EXPECT_DOUBLE_EQ(r.per_class[0].precision, 0.8);
  EXPECT_DOUBLE_EQ(r.per_class[0].recall, 1.0);
  EXPECT_DOUBLE_EQ(r.per_class[0].f1, 8.0 / 9.0);
  EXPECT_DOUBLE_EQ(r.per_class[1].f1, 0.0);
  EXPECT_DOUBLE_EQ(r.macro.f1, 4.0 / 9.0);
  EXPECT_DOUBLE_EQ(r.macro.precision, 0.4);
}

TEST(Prf, AccumulateSums) {
  MatchResult a, b;
  a.counts[0] = {1, 2, 3};
  b.counts[0] = {4, 5, 6};
  b.counts[1] = {1, 0, 0};
  accumulate(a, b);
  EXPECT_EQ(a.counts[0], (ClassCounts{5, 7, 9}));
  EXPECT_EQ(a.counts[1], (ClassCounts{1, 0, 0}));
}

TEST(GroundTruth, RoundTripAndErrors) {
  GroundTruthFile f;
  f.video = "v";
  f.movement = "squat";
  f.view = "side";
  f.reps = {{1, 5, RepLabel::kValid}, {7, 9, RepLabel::kInvalid}};
  const GroundTruthFile back = parse_ground_truth(format_ground_truth(f));
  EXPECT_EQ(back.reps, f.reps);
  EXPECT_EQ(back.view, "side");
  EXPECT_THROW(parse_ground_truth("{\"reps\": [{\"start\": 1, \"end\": 2, \"label\": 3}]}"), Error);
  EXPECT_THROW(parse_ground_truth("not json"), Error);
}

struct GridVideos {
  std::vector<KeypointStream> streams;
  std::vector<EvalVideo> videos;
};

GridVideos grid_videos() {
  GridVideos g;
  const SchemaRegistry reg = SchemaRegistry::builtin();
  for (int i = 0; i < 3; ++i) {
    const auto dir = testing::fixture_dir() / "grid" / ("grid_" + std::to_string(i));
    g.streams.push_back(load_keypoint_stream(dir / "stream.jsonl", reg));
  }
  for (int i = 0; i < 3; ++i) {
    const auto dir = testing::fixture_dir() / "grid" / ("grid_" + std::to_string(i));
    g.videos.push_back({"grid_" + std::to_string(i), &g.streams[i],
                        load_ground_truth(dir / "gt.json").reps});
  }
  return g;
}

ThresholdGrid angle_grid(std::vector<double> angles) {
  ThresholdGrid grid;
  grid.angle_tolerances = std::move(angles);
  grid.position_tolerances = {0.05};
  grid.debounces = {2};
  return grid;
}

TEST(GridSearch, RecoversPlantedTolerance) {
  const GridVideos g = grid_videos();
  const KeypointSchema schema = SchemaRegistry::builtin().at("body17");
  const GridSearchResult r =
      grid_search_thresholds(angle_grid({12, 2, 5}), g.videos, testing::squat_rules(), schema);
  EXPECT_EQ(r.best.angle_tolerance, 5.0);
  EXPECT_DOUBLE_EQ(r.best_f1, 1.0);
  ASSERT_EQ(r.cells.size(), 3u);
  EXPECT_EQ(r.cells[0].config.angle_tolerance, 2.0);
  EXPECT_EQ(r.cells[2].config.angle_tolerance, 12.0);
  EXPECT_LT(r.cells[0].mean_macro_f1, 1.0);
  EXPECT_LT(r.cells[2].mean_macro_f1, 1.0);
}

TEST(GridSearch, OrderAndThreadsDoNotMatter) {
  const GridVideos g = grid_videos();
  const KeypointSchema schema = SchemaRegistry::builtin().at("body17");
  ThresholdGrid grid = angle_grid({2, 5, 12, 5});
  grid.debounces = {1, 2};
  const GridSearchResult a =
      grid_search_thresholds(grid, g.videos, testing::squat_rules(), schema, {}, 0.2,
                             MatchMode::kGreedy, 1);
  std::reverse(grid.angle_tolerances.begin(), grid.angle_tolerances.end());
  std::vector<EvalVideo> rev(g.videos.rbegin(), g.videos.rend());
  const GridSearchResult b =
      grid_search_thresholds(grid, rev, testing::squat_rules(), schema, {}, 0.2,
                             MatchMode::kGreedy, 4);
  EXPECT_EQ(a.best, b.best);
  ASSERT_EQ(a.cells.size(), 6u);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].config, b.cells[i].config);
    EXPECT_NEAR(a.cells[i].mean_macro_f1, b.cells[i].mean_macro_f1, 1e-12);
  }
}

TEST(GridSearch, TiesGoToSmallestCell) {
  const GridVideos g = grid_videos();
  const KeypointSchema schema = SchemaRegistry::builtin().at("body17");
  // Two cells a hair apart score the same; the smaller one wins.
  const GridSearchResult r =
      grid_search_thresholds(angle_grid({5, 5.0000001}), g.videos, testing::squat_rules(), schema);
  EXPECT_EQ(r.best.angle_tolerance, 5.0);
  EXPECT_EQ(r.cells[0].mean_macro_f1, r.cells[1].mean_macro_f1);
}

TEST(GridSearch, SinglePointAndEmptyAxes) {
  const GridVideos g = grid_videos();
  const KeypointSchema schema = SchemaRegistry::builtin().at("body17");
  const GridSearchResult one =
      grid_search_thresholds(angle_grid({12}), g.videos, testing::squat_rules(), schema);
  EXPECT_EQ(one.best.angle_tolerance, 12.0);
  EXPECT_EQ(one.cells.size(), 1u);
  EXPECT_EQ(kind_of([&] {
              grid_search_thresholds(angle_grid({}), g.videos, testing::squat_rules(), schema);
            }),
            ErrorKind::kConfiguration);
  EXPECT_EQ(kind_of([&] {
              grid_search_thresholds(angle_grid({5}), {}, testing::squat_rules(), schema);
            }),
            ErrorKind::kConfiguration);
}

TEST(Report, TableAndJson) {
  MatchResult m;
  m.counts[0] = {8, 2, 0};
  m.counts[1] = {3, 1, 1};
  const std::vector<ReportRow> rows{{"body17", "squat", "side", prf(m)}};
  const std::string table = format_report_table(rows);
  EXPECT_NE(table.find("body17"), std::string::npos);
  EXPECT_NE(table.find("squat"), std::string::npos);
  EXPECT_NE(table.find("0.800"), std::string::npos);
  const auto j = nlohmann::json::parse(format_report_json(rows));
  ASSERT_TRUE(j.is_array());
  EXPECT_EQ(j[0]["model"], "body17");
}

}  // namespace
}  // namespace repjudge
