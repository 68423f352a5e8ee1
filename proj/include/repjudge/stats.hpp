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

// Rubric score aggregation, rater agreement and human/LLM calibration.

#ifndef REPJUDGE_STATS_HPP_
#define REPJUDGE_STATS_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace repjudge {

struct MwsWeights {
  double faithfulness = 0.4;
  double completeness = 0.4;
  double consistency = 0.2;

  // Throws kDomain unless all weights are >= 0 and sum to 1 within 1e-9.
  void validate() const;
};

// Rubric score in [1, 5] -> (s - 1) / 4. Throws kDomain outside the rubric.
double normalize_score(double score);

// Weighted sum of normalized faithfulness, completeness and consistency.
// Throws kDomain for inputs outside [0, 1].
double mws(double f, double c, double s, const MwsWeights& weights = {});

enum class Dimension { kFaithfulness, kCompleteness, kConsistency };

std::string_view to_string(Dimension d);
// Accepts F/C/S or the full names, case-insensitively.
Dimension parse_dimension(std::string_view text);

struct ScoreRecord {
  std::string rater;
  std::string item;
  Dimension dimension = Dimension::kFaithfulness;
  double score = 0.0;  // rubric 1..5
};

// CSV with header "rater,item,dimension,score". Throws kParse with the line
// number on malformed rows and kDomain for scores outside [1, 5].
std::vector<ScoreRecord> parse_scores_csv(const std::string& text);
std::vector<ScoreRecord> load_scores_csv(const std::filesystem::path& path);

// Raters x items, rectangular.
struct ScoreMatrix {
  std::vector<std::string> raters;
  std::vector<std::string> items;
  std::vector<std::vector<double>> values;  // values[rater][item]

  std::size_t rater_count() const { return raters.size(); }
  std::size_t item_count() const { return items.size(); }

  // Throws kShape when rows differ in length or do not match the labels.
  void validate() const;
};

// Matrix of one dimension's raw scores. Rater and item order follow first
// appearance. Throws kShape when a cell is missing or duplicated.
ScoreMatrix score_matrix(std::span<const ScoreRecord> records, Dimension dimension);

// Matrix of per-rater MWS on normalized scores.
ScoreMatrix mws_matrix(std::span<const ScoreRecord> records, const MwsWeights& weights = {});

// Per-item mean over raters. Throws kDomain for an empty matrix.
std::vector<double> aggregate_human(const ScoreMatrix& m);

// Per-item population standard deviation over raters.
std::vector<double> sd_per_item(const ScoreMatrix& m);

struct AnovaTable {
  double msr = 0.0;  // between items
  double msc = 0.0;  // between raters
  double mse = 0.0;  // residual
};

AnovaTable two_way_anova(const ScoreMatrix& m);

// (MSR - MSE) / (MSR + (MSC - MSE) / n + (k - 1) MSE) with n items and k
// raters. Needs >= 2 items and >= 2 raters; throws kDomain when MSR = 0 or
// the denominator vanishes.
double icc2k(const ScoreMatrix& m);

// Mean absolute difference. Throws kShape on length mismatch or empty input.
double mean_abs_delta(std::span<const double> a, std::span<const double> b);

// Average (1-based) ranks; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> v);

// (n_c - n_d) / C(N, 2); tied pairs count as neither. Throws kDomain for
// N < 2 and kShape on length mismatch.
double kendall_tau(std::span<const double> a, std::span<const double> b);

// 1 - 6 sum d^2 / (N (N^2 - 1)) over average ranks.
double spearman_rho(std::span<const double> a, std::span<const double> b);

// Combined human/LLM report as JSON: per item the human MWS, LLM MWS, human
// SD; overall MWS, mean SD, ICC(2,k), delta, SD of the differences, tau, rho.
std::string rater_report(std::span<const ScoreRecord> human, std::span<const ScoreRecord> llm,
                         const MwsWeights& weights = {});

}  // namespace repjudge

#endif  // REPJUDGE_STATS_HPP_
