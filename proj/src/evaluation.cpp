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

#include "repjudge/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <tuple>

#include "json_util.hpp"

namespace repjudge {

using detail::OrderedJson;

double tiou(Segment a, Segment b) {
  const std::int64_t inter = std::min(a.end, b.end) - std::max(a.start, b.start) + 1;
  if (inter <= 0) return 0.0;
  const std::int64_t uni = std::max(a.end, b.end) - std::min(a.start, b.start) + 1;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

void validate_ground_truth(std::span<const GroundTruthRep> reps) {
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (reps[i].t_end < reps[i].t_start) {
      throw Error(ErrorKind::kAnnotation, "ground-truth rep " + std::to_string(i) +
                                              " ends before it starts");
    }
    if (i > 0 && reps[i].t_start <= reps[i - 1].t_end) {
      throw Error(ErrorKind::kAnnotation, "ground-truth reps " + std::to_string(i - 1) +
                                              " and " + std::to_string(i) +
                                              " overlap or are out of order");
    }
  }
}

GroundTruthFile parse_ground_truth(const std::string& text) {
  const OrderedJson doc = detail::parse_json<OrderedJson>(text, "ground truth");
  const std::string ctx = "ground truth";
  GroundTruthFile out;
  out.video = detail::get_field<std::string>(doc, "video", ctx);
  out.movement = detail::get_field_or<std::string>(doc, "movement", "", ctx);
  out.view = detail::get_field_or<std::string>(doc, "view", "", ctx);
  if (!out.view.empty() && out.view != "front" && out.view != "diag" && out.view != "side") {
    throw Error(ErrorKind::kSchema, ctx + ": view must be front, diag or side");
  }
  for (const OrderedJson& rep : detail::get_field<OrderedJson>(doc, "reps", ctx)) {
    GroundTruthRep r;
    r.t_start = detail::get_field<std::int64_t>(rep, "start", ctx);
    r.t_end = detail::get_field<std::int64_t>(rep, "end", ctx);
    const int label = detail::get_field<int>(rep, "label", ctx);
    if (label != 0 && label != 1) throw Error(ErrorKind::kSchema, ctx + ": label must be 0 or 1");
    r.label = label == 0 ? RepLabel::kValid : RepLabel::kInvalid;
    out.reps.push_back(r);
  }
  validate_ground_truth(out.reps);
  return out;
}

GroundTruthFile load_ground_truth(const std::filesystem::path& path) {
  return parse_ground_truth(detail::read_text_file(path));
}

std::string format_ground_truth(const GroundTruthFile& file) {
  OrderedJson doc;
  doc["video"] = file.video;
  doc["movement"] = file.movement;
  doc["view"] = file.view;
  OrderedJson reps = OrderedJson::array();
  for (const GroundTruthRep& r : file.reps) {
    reps.push_back({{"start", r.t_start},
                    {"end", r.t_end},
                    {"label", r.label == RepLabel::kValid ? 0 : 1}});
  }
  doc["reps"] = std::move(reps);
  return doc.dump(2) + "\n";
}

namespace {

using Edge = std::tuple<double, std::size_t, std::size_t>;  // tIoU, pred, gt

std::vector<std::pair<std::size_t, std::size_t>> greedy_match(std::vector<Edge> edges,
                                                              std::size_t n_pred,
                                                              std::size_t n_gt) {
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
  });
  std::vector<bool> pred_used(n_pred), gt_used(n_gt);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [t, p, g] : edges) {
    if (pred_used[p] || gt_used[g]) continue;
    pred_used[p] = gt_used[g] = true;
    out.emplace_back(p, g);
  }
  return out;
}

// Maximum-weight assignment (Hungarian algorithm on a square cost matrix).
// Returns, per row, the assigned column.
std::vector<std::size_t> hungarian_max(const std::vector<std::vector<double>>& weight) {
  const std::size_t n = weight.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1), v(n + 1);
  std::vector<std::size_t> p(n + 1), way(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weight[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

std::vector<std::pair<std::size_t, std::size_t>> optimal_match(const std::vector<Edge>& edges,
                                                               std::size_t n_pred,
                                                               std::size_t n_gt) {
  const std::size_t n = std::max(n_pred, n_gt);
  if (n == 0 || edges.empty()) return {};
  // Every match is worth more than any achievable tIoU total, so the
  // assignment maximizes the match count first.
  const double big = static_cast<double>(n) + 1.0;
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (const auto& [t, p, g] : edges) w[p][g] = big + t;
  const auto assign = hungarian_max(w);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t p = 0; p < n_pred; ++p) {
    const std::size_t g = assign[p];
    if (g < n_gt && w[p][g] > 0.0) out.emplace_back(p, g);
  }
  return out;
}

}  // namespace

MatchResult match_reps(std::span<const RepRecord> predictions,
                       std::span<const GroundTruthRep> ground_truth, double tiou_threshold,
                       MatchMode mode) {
  validate_ground_truth(ground_truth);
  MatchResult result;
  for (RepLabel label : {RepLabel::kValid, RepLabel::kInvalid}) {
    std::vector<std::size_t> preds, gts;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      if (predictions[i].label == label) preds.push_back(i);
    }
    for (std::size_t i = 0; i < ground_truth.size(); ++i) {
      if (ground_truth[i].label == label) gts.push_back(i);
    }
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < preds.size(); ++a) {
      const RepRecord& p = predictions[preds[a]];
      for (std::size_t b = 0; b < gts.size(); ++b) {
        const GroundTruthRep& g = ground_truth[gts[b]];
        const double t = tiou({p.t_start, p.t_end}, {g.t_start, g.t_end});
        if (t >= tiou_threshold && t > 0.0) edges.emplace_back(t, a, b);
      }
    }
    const auto matched = mode == MatchMode::kGreedy
                             ? greedy_match(edges, preds.size(), gts.size())
                             : optimal_match(edges, preds.size(), gts.size());
    ClassCounts& c = result.counts[class_index(label)];
    c.tp = static_cast<std::int64_t>(matched.size());
    c.fp = static_cast<std::int64_t>(preds.size()) - c.tp;
    c.fn = static_cast<std::int64_t>(gts.size()) - c.tp;
    for (const auto& [a, b] : matched) {
      const RepRecord& p = predictions[preds[a]];
      const GroundTruthRep& g = ground_truth[gts[b]];
      result.pairs.push_back(
          {preds[a], gts[b], tiou({p.t_start, p.t_end}, {g.t_start, g.t_end}), label});
    }
  }
  return result;
}

MatchResult& accumulate(MatchResult& total, const MatchResult& part) {
  for (std::size_t i = 0; i < 2; ++i) {
    total.counts[i].tp += part.counts[i].tp;
    total.counts[i].fp += part.counts[i].fp;
    total.counts[i].fn += part.counts[i].fn;
  }
  total.pairs.insert(total.pairs.end(), part.pairs.begin(), part.pairs.end());
  return total;
}

Metrics metrics_from_counts(const ClassCounts& c) {
  Metrics m;
  const auto ratio = [](std::int64_t num, std::int64_t den) {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
  };
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

PrfReport prf(const MatchResult& result) {
  PrfReport r;
  for (std::size_t i = 0; i < 2; ++i) r.per_class[i] = metrics_from_counts(result.counts[i]);
  r.macro.precision = (r.per_class[0].precision + r.per_class[1].precision) / 2.0;
  r.macro.recall = (r.per_class[0].recall + r.per_class[1].recall) / 2.0;
  r.macro.f1 = (r.per_class[0].f1 + r.per_class[1].f1) / 2.0;
  return r;
}

double rtf(double processing_seconds, double video_seconds) {
  if (!(video_seconds > 0.0)) throw Error(ErrorKind::kDomain, "rtf: video duration must be > 0");
  return processing_seconds / video_seconds;
}

namespace {

template <typename T>
std::vector<T> sorted_unique(std::vector<T> v, const char* axis) {
  if (v.empty()) {
    throw Error(ErrorKind::kConfiguration, std::string("threshold grid axis '") + axis +
                                               "' is empty");
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

GridSearchResult grid_search_thresholds(const ThresholdGrid& grid,
                                        std::span<const EvalVideo> videos,
                                        const MovementRuleSet& rules,
                                        const KeypointSchema& schema,
                                        const JudgeOptions& options, double tiou_threshold,
                                        MatchMode mode, unsigned threads) {
  if (videos.empty()) throw Error(ErrorKind::kConfiguration, "grid search has no videos");
  const auto angles = sorted_unique(grid.angle_tolerances, "angle");
  const auto positions = sorted_unique(grid.position_tolerances, "position");
  const auto debounces = sorted_unique(grid.debounces, "debounce");

  GridSearchResult result;
  for (double a : angles) {
    for (double p : positions) {
      for (int d : debounces) {
        GridCell cell;
        cell.config = grid.base;
        cell.config.angle_tolerance = a;
        cell.config.position_tolerance = p;
        cell.config.start_debounce = d;
        cell.config.end_debounce = d;
        cell.config.validate();
        result.cells.push_back(std::move(cell));
      }
    }
  }

  JudgeOptions run = options;
  run.mode = RunMode::kPrerecorded;
  run.costs = {};
  run.cache.rtc_enabled = false;
  const std::size_t n_tasks = result.cells.size() * videos.size();
  std::vector<double> f1(n_tasks, 0.0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t task = next++; task < n_tasks; task = next++) {
      try {
        const GridCell& cell = result.cells[task / videos.size()];
        const EvalVideo& video = videos[task % videos.size()];
        const JudgeResult judged =
            judge_stream(*video.stream, nullptr, rules, schema, cell.config, run);
        f1[task] = prf(match_reps(judged.records, video.ground_truth, tiou_threshold, mode))
                       .macro.f1;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned n_threads = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_tasks));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  bool have_best = false;
  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    double sum = 0.0;
    for (std::size_t v = 0; v < videos.size(); ++v) sum += f1[c * videos.size() + v];
    result.cells[c].mean_macro_f1 = sum / static_cast<double>(videos.size());
    // Cells are in ascending (angle, position, debounce) order, so a strict
    // improvement is needed to displace an earlier cell.
    if (!have_best || result.cells[c].mean_macro_f1 > result.best_f1) {
      have_best = true;
      result.best = result.cells[c].config;
      result.best_f1 = result.cells[c].mean_macro_f1;
    }
  }
  return result;
}

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

std::string format_report_table(std::span<const ReportRow> rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-14s %-12s %-6s | %-17s | %-17s | %-17s\n", "model",
                "movement", "view", "valid P/R/F1", "invalid P/R/F1", "macro P/R/F1");
  out += line;
  out += std::string(98, '-') + "\n";
  for (const ReportRow& r : rows) {
    auto triple = [](const Metrics& m) {
      return fixed(m.precision) + " " + fixed(m.recall) + " " + fixed(m.f1);
    };
    std::snprintf(line, sizeof(line), "%-14s %-12s %-6s | %-17s | %-17s | %-17s\n",
                  r.model.c_str(), r.movement.c_str(), r.view.c_str(),
                  triple(r.report.per_class[0]).c_str(), triple(r.report.per_class[1]).c_str(),
                  triple(r.report.macro).c_str());
    out += line;
  }
  return out;
}

std::string format_report_json(std::span<const ReportRow> rows) {
  OrderedJson list = OrderedJson::array();
  auto metrics = [](const Metrics& m) {
    return OrderedJson{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
  };
  for (const ReportRow& r : rows) {
    list.push_back({{"model", r.model},
                    {"movement", r.movement},
                    {"view", r.view},
                    {"valid", metrics(r.report.per_class[0])},
                    {"invalid", metrics(r.report.per_class[1])},
                    {"macro", metrics(r.report.macro)}});
  }
  return list.dump(2) + "\n";
}

}  // namespace repjudge
