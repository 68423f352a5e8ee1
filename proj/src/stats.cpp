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

#include "repjudge/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "json_util.hpp"

namespace repjudge {

using detail::OrderedJson;

void MwsWeights::validate() const {
  if (faithfulness < 0.0 || completeness < 0.0 || consistency < 0.0) {
    throw Error(ErrorKind::kDomain, "MWS weights must be >= 0");
  }
  if (std::abs(faithfulness + completeness + consistency - 1.0) > 1e-9) {
    throw Error(ErrorKind::kDomain, "MWS weights must sum to 1");
  }
}

double normalize_score(double score) {
  if (!(score >= 1.0 && score <= 5.0)) {
    throw Error(ErrorKind::kDomain, "rubric score must lie in [1, 5]");
  }
  return (score - 1.0) / 4.0;
}

double mws(double f, double c, double s, const MwsWeights& weights) {
  weights.validate();
  for (double v : {f, c, s}) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::kDomain, "MWS inputs must lie in [0, 1]");
  }
  return weights.faithfulness * f + weights.completeness * c + weights.consistency * s;
}

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::kFaithfulness: return "F";
    case Dimension::kCompleteness: return "C";
    case Dimension::kConsistency: return "S";
  }
  return "?";
}

Dimension parse_dimension(std::string_view text) {
  std::string t;
  for (char ch : text) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (t == "f" || t == "faithfulness") return Dimension::kFaithfulness;
  if (t == "c" || t == "completeness") return Dimension::kCompleteness;
  if (t == "s" || t == "consistency") return Dimension::kConsistency;
  throw Error(ErrorKind::kParse, "unknown score dimension '" + std::string(text) + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kShape, "score vectors differ in length");
  if (a.size() < 2) throw Error(ErrorKind::kDomain, "rank statistics need at least 2 items");
}

}  // namespace

std::vector<ScoreRecord> parse_scores_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<ScoreRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    const std::string where = "scores line " + std::to_string(line_no);
    if (!header) {
      if (fields != std::vector<std::string>{"rater", "item", "dimension", "score"}) {
        throw Error(ErrorKind::kParse, where + ": header must be rater,item,dimension,score");
      }
      header = true;
      continue;
    }
    if (fields.size() != 4) throw Error(ErrorKind::kParse, where + ": expected 4 fields");
    ScoreRecord r;
    r.rater = fields[0];
    r.item = fields[1];
    r.dimension = parse_dimension(fields[2]);
    try {
      std::size_t used = 0;
      r.score = std::stod(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument(fields[3]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::kParse, where + ": score is not a number");
    }
    if (!(r.score >= 1.0 && r.score <= 5.0)) {
      throw Error(ErrorKind::kDomain, where + ": score outside the 1-5 rubric");
    }
    if (r.rater.empty() || r.item.empty()) {
      throw Error(ErrorKind::kParse, where + ": empty rater or item");
    }
    out.push_back(std::move(r));
  }
  if (!header) throw Error(ErrorKind::kParse, "scores file has no header");
  return out;
}

std::vector<ScoreRecord> load_scores_csv(const std::filesystem::path& path) {
  return parse_scores_csv(detail::read_text_file(path));
}

void ScoreMatrix::validate() const {
  if (values.size() != raters.size()) throw Error(ErrorKind::kShape, "one row per rater expected");
  for (const auto& row : values) {
    if (row.size() != items.size()) throw Error(ErrorKind::kShape, "score matrix is not rectangular");
  }
}

namespace {

// Rater/item order of first appearance, plus a cell lookup.
struct Layout {
  std::vector<std::string> raters;
  std::vector<std::string> items;
  std::map<std::string, std::size_t> rater_index;
  std::map<std::string, std::size_t> item_index;

  explicit Layout(std::span<const ScoreRecord> records) {
    for (const ScoreRecord& r : records) {
      if (rater_index.emplace(r.rater, raters.size()).second) raters.push_back(r.rater);
      if (item_index.emplace(r.item, items.size()).second) items.push_back(r.item);
    }
  }
};

}  // namespace

ScoreMatrix score_matrix(std::span<const ScoreRecord> records, Dimension dimension) {
  const Layout layout(records);
  ScoreMatrix m;
  m.raters = layout.raters;
  m.items = layout.items;
  std::vector<std::vector<std::optional<double>>> cells(
      m.raters.size(), std::vector<std::optional<double>>(m.items.size()));
  for (const ScoreRecord& r : records) {
    if (r.dimension != dimension) continue;
    auto& cell = cells[layout.rater_index.at(r.rater)][layout.item_index.at(r.item)];
    if (cell) {
      throw Error(ErrorKind::kShape, "duplicate score for rater '" + r.rater + "', item '" +
                                         r.item + "', dimension " +
                                         std::string(to_string(dimension)));
    }
    cell = r.score;
  }
  m.values.assign(m.raters.size(), std::vector<double>(m.items.size()));
  for (std::size_t i = 0; i < m.raters.size(); ++i) {
    for (std::size_t j = 0; j < m.items.size(); ++j) {
      if (!cells[i][j]) {
        throw Error(ErrorKind::kShape, "missing score for rater '" + m.raters[i] + "', item '" +
                                           m.items[j] + "', dimension " +
                                           std::string(to_string(dimension)));
      }
      m.values[i][j] = *cells[i][j];
    }
  }
  return m;
}

ScoreMatrix mws_matrix(std::span<const ScoreRecord> records, const MwsWeights& weights) {
  const ScoreMatrix f = score_matrix(records, Dimension::kFaithfulness);
  const ScoreMatrix c = score_matrix(records, Dimension::kCompleteness);
  const ScoreMatrix s = score_matrix(records, Dimension::kConsistency);
  ScoreMatrix out = f;
  for (std::size_t i = 0; i < out.raters.size(); ++i) {
    for (std::size_t j = 0; j < out.items.size(); ++j) {
      out.values[i][j] = mws(normalize_score(f.values[i][j]), normalize_score(c.values[i][j]),
                             normalize_score(s.values[i][j]), weights);
    }
  }
  return out;
}

std::vector<double> aggregate_human(const ScoreMatrix& m) {
  m.validate();
  if (m.rater_count() == 0 || m.item_count() == 0) {
    throw Error(ErrorKind::kDomain, "score matrix is empty");
  }
  std::vector<double> out(m.item_count(), 0.0);
  for (const auto& row : m.values) {
    for (std::size_t j = 0; j < row.size(); ++j) out[j] += row[j];
  }
  for (double& v : out) v /= static_cast<double>(m.rater_count());
  return out;
}

std::vector<double> sd_per_item(const ScoreMatrix& m) {
  const std::vector<double> means = aggregate_human(m);
  std::vector<double> out(m.item_count(), 0.0);
  for (const auto& row : m.values) {
    for (std::size_t j = 0; j < row.size(); ++j) out[j] += (row[j] - means[j]) * (row[j] - means[j]);
  }
  for (double& v : out) v = std::sqrt(v / static_cast<double>(m.rater_count()));
  return out;
}

AnovaTable two_way_anova(const ScoreMatrix& m) {
  m.validate();
  const std::size_t k = m.rater_count();
  const std::size_t n = m.item_count();
  if (k < 2 || n < 2) throw Error(ErrorKind::kDomain, "ANOVA needs >= 2 raters and >= 2 items");
  double grand = 0.0;
  for (const auto& row : m.values) grand += std::accumulate(row.begin(), row.end(), 0.0);
  grand /= static_cast<double>(n * k);
  const std::vector<double> item_means = aggregate_human(m);
  std::vector<double> rater_means;
  for (const auto& row : m.values) rater_means.push_back(mean(row));
  double ssr = 0.0;
  for (double v : item_means) ssr += (v - grand) * (v - grand);
  ssr *= static_cast<double>(k);
  double ssc = 0.0;
  for (double v : rater_means) ssc += (v - grand) * (v - grand);
  ssc *= static_cast<double>(n);
  double sse = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double r = m.values[i][j] - item_means[j] - rater_means[i] + grand;
      sse += r * r;
    }
  }
  AnovaTable t;
  t.msr = ssr / static_cast<double>(n - 1);
  t.msc = ssc / static_cast<double>(k - 1);
  t.mse = sse / static_cast<double>((n - 1) * (k - 1));
  return t;
}

double icc2k(const ScoreMatrix& m) {
  const AnovaTable t = two_way_anova(m);
  const auto n = static_cast<double>(m.item_count());
  const auto k = static_cast<double>(m.rater_count());
  if (t.msr == 0.0) {
    throw Error(ErrorKind::kDomain, "ICC is undefined without between-item variance");
  }
  const double den = t.msr + (t.msc - t.mse) / n + (k - 1.0) * t.mse;
  if (den == 0.0) throw Error(ErrorKind::kDomain, "ICC denominator is zero");
  return (t.msr - t.mse) / den;
}

double mean_abs_delta(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kShape, "delta: lengths differ");
  if (a.empty()) throw Error(ErrorKind::kShape, "delta: no items");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double kendall_tau(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  std::int64_t nc = 0;
  std::int64_t nd = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double s = (a[i] - a[j]) * (b[i] - b[j]);
      if (s > 0.0) ++nc;
      if (s < 0.0) ++nd;
    }
  }
  const auto n = static_cast<double>(a.size());
  return static_cast<double>(nc - nd) / (n * (n - 1.0) / 2.0);
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  double d2 = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  const auto n = static_cast<double>(a.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

std::string rater_report(std::span<const ScoreRecord> human, std::span<const ScoreRecord> llm,
                         const MwsWeights& weights) {
  const ScoreMatrix h = mws_matrix(human, weights);
  const ScoreMatrix l = mws_matrix(llm, weights);
  const std::vector<double> h_mws = aggregate_human(h);
  const std::vector<double> h_sd = sd_per_item(h);
  const std::vector<double> l_all = aggregate_human(l);
  // Align LLM items with the human item order.
  std::vector<double> l_mws;
  for (const std::string& item : h.items) {
    const auto it = std::find(l.items.begin(), l.items.end(), item);
    if (it == l.items.end()) {
      throw Error(ErrorKind::kPairing, "item '" + item + "' has no LLM score");
    }
    l_mws.push_back(l_all[static_cast<std::size_t>(it - l.items.begin())]);
  }
  if (l.items.size() != h.items.size()) {
    throw Error(ErrorKind::kPairing, "LLM scores cover items without human scores");
  }

  OrderedJson items = OrderedJson::array();
  std::vector<double> diffs;
  for (std::size_t j = 0; j < h.items.size(); ++j) {
    items.push_back({{"item", h.items[j]},
                     {"human_mws", h_mws[j]},
                     {"llm_mws", l_mws[j]},
                     {"human_sd", h_sd[j]}});
    diffs.push_back(h_mws[j] - l_mws[j]);
  }
  const double diff_mean = mean(diffs);
  double diff_var = 0.0;
  for (double d : diffs) diff_var += (d - diff_mean) * (d - diff_mean);
  OrderedJson summary;
  summary["items"] = h.items.size();
  summary["raters"] = h.raters.size();
  summary["mws"] = mean(h_mws);
  summary["sd"] = mean(h_sd);
  try {
    summary["icc"] = icc2k(h);
  } catch (const Error&) {
    summary["icc"] = nullptr;
  }
  summary["delta"] = mean_abs_delta(h_mws, l_mws);
  summary["delta_sd"] = std::sqrt(diff_var / static_cast<double>(diffs.size()));
  if (h.items.size() >= 2) {
    summary["kendall_tau"] = kendall_tau(h_mws, l_mws);
    summary["spearman_rho"] = spearman_rho(h_mws, l_mws);
  } else {
    summary["kendall_tau"] = nullptr;
    summary["spearman_rho"] = nullptr;
  }
  OrderedJson doc;
  doc["summary"] = std::move(summary);
  doc["items"] = std::move(items);
  return doc.dump(2) + "\n";
}

}  // namespace repjudge
