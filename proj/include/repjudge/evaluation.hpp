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

// Rep-level detection metrics and threshold calibration.

#ifndef REPJUDGE_EVALUATION_HPP_
#define REPJUDGE_EVALUATION_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "repjudge/judge.hpp"

namespace repjudge {

inline constexpr double kDefaultTiouThreshold = 0.2;

struct Segment {
  std::int64_t start = 0;
  std::int64_t end = 0;  // inclusive
};

// Frame-count intersection over union with inclusive endpoints.
double tiou(Segment a, Segment b);

struct GroundTruthRep {
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  RepLabel label = RepLabel::kValid;

  friend bool operator==(const GroundTruthRep&, const GroundTruthRep&) = default;
};

// {"video": id, "movement": m, "view": "front"|"diag"|"side",
//  "reps": [{"start": f, "end": f, "label": 0|1}]}   (0 valid, 1 invalid)
struct GroundTruthFile {
  std::string video;
  std::string movement;
  std::string view;
  std::vector<GroundTruthRep> reps;
};

GroundTruthFile parse_ground_truth(const std::string& text);
GroundTruthFile load_ground_truth(const std::filesystem::path& path);
std::string format_ground_truth(const GroundTruthFile& file);

// Throws kAnnotation for reversed, unsorted or overlapping reps.
void validate_ground_truth(std::span<const GroundTruthRep> reps);

enum class MatchMode {
  kGreedy,   // descending tIoU, one-to-one
  kOptimal,  // maximum number of matches, then maximum total tIoU
};

struct ClassCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

struct MatchedPair {
  std::size_t prediction = 0;
  std::size_t ground_truth = 0;
  double tiou = 0.0;
  RepLabel label = RepLabel::kValid;
};

inline std::size_t class_index(RepLabel label) { return label == RepLabel::kValid ? 0 : 1; }

struct MatchResult {
  std::array<ClassCounts, 2> counts;  // by class_index
  std::vector<MatchedPair> pairs;

  const ClassCounts& of(RepLabel label) const { return counts[class_index(label)]; }
};

// Class-consistent matching: a prediction can only match ground truth of its
// own label, with tIoU >= threshold.
MatchResult match_reps(std::span<const RepRecord> predictions,
                       std::span<const GroundTruthRep> ground_truth,
                       double tiou_threshold = kDefaultTiouThreshold,
                       MatchMode mode = MatchMode::kGreedy);

// Sums per-class counts across videos.
MatchResult& accumulate(MatchResult& total, const MatchResult& part);

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct PrfReport {
  std::array<Metrics, 2> per_class;  // by class_index
  Metrics macro;
};

// Undefined ratios (zero denominators) count as 0.
Metrics metrics_from_counts(const ClassCounts& counts);
PrfReport prf(const MatchResult& result);

// processing / duration. Throws kDomain when duration <= 0.
double rtf(double processing_seconds, double video_seconds);

// ---------------------------------------------------------------------------
// Threshold grid search

struct ThresholdGrid {
  std::vector<double> angle_tolerances = {3.0, 5.0, 8.0, 12.0};
  std::vector<double> position_tolerances = {0.02, 0.05, 0.1};
  std::vector<int> debounces = {1, 2, 3};  // applied to start and end
  ThresholdConfig base;                    // every other field
};

struct EvalVideo {
  std::string video;
  const KeypointStream* stream = nullptr;
  std::vector<GroundTruthRep> ground_truth;
};

struct GridCell {
  ThresholdConfig config;
  double mean_macro_f1 = 0.0;
};

struct GridSearchResult {
  ThresholdConfig best;
  double best_f1 = 0.0;
  std::vector<GridCell> cells;  // sorted by (angle, position, debounce)
};

// Exhaustive search maximizing the mean macro-F1 over `videos`. Grid values
// are sorted and de-duplicated first; ties go to the smallest (angle,
// position, debounce). Cells run on `threads` workers (0: hardware count).
// Throws kConfiguration for an empty grid axis or an empty video set.
GridSearchResult grid_search_thresholds(const ThresholdGrid& grid,
                                        std::span<const EvalVideo> videos,
                                        const MovementRuleSet& rules,
                                        const KeypointSchema& schema,
                                        const JudgeOptions& options = {},
                                        double tiou_threshold = kDefaultTiouThreshold,
                                        MatchMode mode = MatchMode::kGreedy,
                                        unsigned threads = 0);

// ---------------------------------------------------------------------------
// Reports

struct ReportRow {
  std::string model;
  std::string movement;
  std::string view;
  PrfReport report;
};

// Fixed-width table: model, movement, view, then P/R/F1 for each class and
// the macro average.
std::string format_report_table(std::span<const ReportRow> rows);
std::string format_report_json(std::span<const ReportRow> rows);

}  // namespace repjudge

#endif  // REPJUDGE_EVALUATION_HPP_
