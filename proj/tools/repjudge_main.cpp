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

// repjudge command-line driver.
//
// Exit codes: 0 success, 1 judging anomaly (no target, unusable keypoints),
// 2 configuration, parse or I/O error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "repjudge/cache.hpp"
#include "repjudge/embedding.hpp"
#include "repjudge/error.hpp"
#include "repjudge/evaluation.hpp"
#include "repjudge/frames.hpp"
#include "repjudge/judge.hpp"
#include "repjudge/retrieval.hpp"
#include "repjudge/rules.hpp"
#include "repjudge/schema.hpp"
#include "repjudge/stats.hpp"
#include "repjudge/stream.hpp"
#include "repjudge/thresholds.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace repjudge;

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNoTarget:
    case ErrorKind::kMissingKeypoint:
    case ErrorKind::kLowConfidence:
    case ErrorKind::kDegenerateGeometry:
    case ErrorKind::kEvaluation:
    case ErrorKind::kUndefinedSimilarity:
    case ErrorKind::kRoi:
      return 1;
    default:
      return 2;
  }
}

// Runs `fn`, prefixing any library error with the file it was reading.
template <typename Fn>
auto with_path(const fs::path& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    std::string body = e.what();
    if (body.find(path.string()) != std::string::npos) throw;
    const std::string prefix = std::string(to_string(e.kind())) + ": ";
    if (body.rfind(prefix, 0) == 0) body.erase(0, prefix.size());
    throw Error(e.kind(), path.string() + ": " + body);
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot write '" + out + "'");
  f << text;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    if (token.empty()) continue;
    try {
      out.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw Error(ErrorKind::kConfiguration, "'" + token + "' is not a number");
    }
  }
  return out;
}

SchemaRegistry registry_from(const std::string& path) {
  if (path.empty()) return SchemaRegistry::builtin();
  return with_path(path, [&] { return SchemaRegistry::load(path); });
}

// Cache, tracker and pacing flags shared by judge, calibrate-tau and bench.
struct RunFlags {
  bool dc = false;
  double dc_offset = 20.0;
  bool rtc = false;
  double rtc_tau = 0.0;
  std::string patch = "32x32";
  bool strict_chaining = false;
  std::string mode = "prerecorded";
  double fps = 30.0;
  std::string tracker;
  double pose_cost_ms = 0.0;
  double detector_cost_ms = 0.0;

  void add_to(CLI::App* app, bool cache_flags = true) {
    if (cache_flags) {
      app->add_flag("--dc", dc, "Reuse the enlarged first detection box");
      app->add_option("--dc-offset", dc_offset, "DC box enlargement in px");
      app->add_flag("--rtc", rtc, "Skip pose inference on near-static ROI frames");
      app->add_option("--rtc-tau", rtc_tau, "RTC skip threshold (mean 8-bit difference)");
    }
    app->add_option("--patch", patch, "RTC patch size WxH");
    app->add_flag("--strict-chaining", strict_chaining,
                  "Compare each ROI with the previous frame instead of the last inferred one");
    app->add_option("--mode", mode, "prerecorded or streamed")
        ->check(CLI::IsMember({"prerecorded", "streamed"}));
    app->add_option("--fps", fps, "Source frame rate");
    app->add_option("--tracker", tracker, "iou or oks (default by pipeline type)")
        ->check(CLI::IsMember({"iou", "oks"}));
    app->add_option("--pose-cost-ms", pose_cost_ms, "Simulated pose inference cost");
    app->add_option("--detector-cost-ms", detector_cost_ms, "Simulated detector cost");
  }

  JudgeOptions options() const {
    JudgeOptions o;
    o.cache.dc_enabled = dc;
    o.cache.dc_offset = dc_offset;
    o.cache.rtc_enabled = rtc;
    o.cache.rtc_tau = rtc_tau;
    o.cache.strict_chaining = strict_chaining;
    const auto x = patch.find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument(patch);
      o.cache.patch_width = std::stoi(patch.substr(0, x));
      o.cache.patch_height = std::stoi(patch.substr(x + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::kConfiguration, "--patch expects WxH, got '" + patch + "'");
    }
    o.cache.validate();
    o.mode = mode == "streamed" ? RunMode::kStreamed : RunMode::kPrerecorded;
    if (!(fps > 0.0)) throw Error(ErrorKind::kConfiguration, "--fps must be > 0");
    o.fps = fps;
    if (tracker == "iou") o.tracker_mode = TrackerMode::kIou;
    if (tracker == "oks") o.tracker_mode = TrackerMode::kOks;
    o.costs.pose = std::chrono::microseconds(static_cast<std::int64_t>(pose_cost_ms * 1000.0));
    o.costs.detector =
        std::chrono::microseconds(static_cast<std::int64_t>(detector_cost_ms * 1000.0));
    return o;
  }
};

// ---------------------------------------------------------------------------
// Manifest: JSON list of {video, movement, view, model, stream, frames?, gt?,
// rules?}. Relative paths are resolved against the manifest's directory.

struct ManifestEntry {
  std::string video;
  std::string movement;
  std::string view;
  std::string model;
  fs::path stream;
  std::optional<fs::path> frames;
  std::optional<fs::path> gt;
  std::optional<fs::path> rules;
};

std::vector<ManifestEntry> load_manifest(const fs::path& path) {
  return with_path(path, [&] {
    Json doc;
    try {
      doc = Json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("malformed manifest JSON", e.byte > 0 ? e.byte - 1 : 0);
    }
    if (doc.is_object() && doc.contains("videos")) doc = doc.at("videos");
    if (!doc.is_array()) throw Error(ErrorKind::kSchema, "manifest must be a list");
    const fs::path base = path.parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
    std::vector<ManifestEntry> out;
    for (const Json& item : doc) {
      ManifestEntry e;
      try {
        e.video = item.at("video").get<std::string>();
        e.movement = item.value("movement", "");
        e.view = item.value("view", "");
        e.model = item.value("model", item.value("schema", ""));
        e.stream = resolve(item.at("stream").get<std::string>());
        if (item.contains("frames")) e.frames = resolve(item.at("frames").get<std::string>());
        if (item.contains("gt")) e.gt = resolve(item.at("gt").get<std::string>());
        if (item.contains("rules")) e.rules = resolve(item.at("rules").get<std::string>());
      } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::kSchema, "manifest entry needs string fields 'video' and 'stream'");
      }
      out.push_back(std::move(e));
    }
    if (out.empty()) throw Error(ErrorKind::kConfiguration, "manifest lists no videos");
    return out;
  });
}

using GroupKey = std::tuple<std::string, std::string, std::string>;  // model, movement, view

// Loaded inputs of one manifest entry.
struct LoadedVideo {
  ManifestEntry entry;
  KeypointStream stream;
  std::unique_ptr<FrameSource> frames;
  std::optional<GroundTruthFile> gt;
};

LoadedVideo load_video(const ManifestEntry& e, const SchemaRegistry& registry, bool need_frames,
                       bool need_gt) {
  LoadedVideo v;
  v.entry = e;
  v.stream = with_path(e.stream, [&] { return load_keypoint_stream(e.stream, registry); });
  if (need_frames) {
    if (!e.frames) throw Error(ErrorKind::kConfiguration, e.video + ": manifest entry has no frames");
    v.frames = with_path(*e.frames, [&] { return FrameSource::open(*e.frames); });
  }
  if (need_gt) {
    if (!e.gt) throw Error(ErrorKind::kConfiguration, e.video + ": manifest entry has no gt");
    v.gt = with_path(*e.gt, [&] { return load_ground_truth(*e.gt); });
  }
  return v;
}

MovementRuleSet rules_for(const ManifestEntry& e, const std::string& fallback) {
  const fs::path path = e.rules ? *e.rules : fs::path(fallback);
  if (path.empty()) {
    throw Error(ErrorKind::kConfiguration, e.video + ": no rule set (use --rules or 'rules')");
  }
  return with_path(path, [&] { return load_rule_set(path); });
}

// ---------------------------------------------------------------------------
// Commands

struct JudgeArgs {
  std::string rules;
  std::string thresholds;
  std::string stream;
  std::string frames;
  std::string video;
  std::string out;
  std::string model;
  std::string movement;
  std::string view;
  bool no_diagnostics = false;
  RunFlags run;
};

int cmd_judge(const JudgeArgs& a, const SchemaRegistry& registry) {
  const MovementRuleSet rules = with_path(a.rules, [&] { return load_rule_set(a.rules); });
  ThresholdConfig thresholds;
  if (!a.thresholds.empty()) {
    thresholds = with_path(a.thresholds, [&] {
      return load_thresholds(a.thresholds, a.model, a.movement, a.view);
    });
  }
  const KeypointStream stream =
      with_path(a.stream, [&] { return load_keypoint_stream(a.stream, registry); });
  std::unique_ptr<FrameSource> frames;
  if (!a.frames.empty()) frames = with_path(a.frames, [&] { return FrameSource::open(a.frames); });
  const KeypointSchema& schema = registry.at(stream.schema);
  const std::string video = a.video.empty() ? fs::path(a.stream).stem().string() : a.video;
  const JudgeResult result =
      judge_stream(stream, frames.get(), rules, schema, thresholds, a.run.options());
  emit(format_records(result, video, !a.no_diagnostics), a.out);
  return 0;
}

struct EvaluateArgs {
  std::vector<std::string> predictions;
  std::vector<std::string> ground_truth;
  double tiou = kDefaultTiouThreshold;
  std::string matching = "greedy";
  std::string format = "table";
  std::string model;
  std::string out;
};

int cmd_evaluate(const EvaluateArgs& a) {
  if (a.predictions.size() != a.ground_truth.size()) {
    throw Error(ErrorKind::kPairing, "got " + std::to_string(a.predictions.size()) +
                                         " prediction files but " +
                                         std::to_string(a.ground_truth.size()) +
                                         " ground-truth files");
  }
  std::map<std::string, GroundTruthFile> gts;
  for (const std::string& path : a.ground_truth) {
    GroundTruthFile gt = with_path(path, [&] { return load_ground_truth(path); });
    const std::string id = gt.video;
    if (!gts.emplace(id, std::move(gt)).second) {
      throw Error(ErrorKind::kPairing, path + ": duplicate ground-truth video id '" + id + "'");
    }
  }
  const MatchMode mode = a.matching == "optimal" ? MatchMode::kOptimal : MatchMode::kGreedy;
  std::map<GroupKey, MatchResult> groups;
  for (const std::string& path : a.predictions) {
    const RecordFile pred = with_path(path, [&] { return load_records(path); });
    const auto it = gts.find(pred.video);
    if (it == gts.end()) {
      throw Error(ErrorKind::kPairing,
                  path + ": no ground truth for video id '" + pred.video + "'");
    }
    const GroundTruthFile& gt = it->second;
    const MatchResult m = match_reps(pred.records, gt.reps, a.tiou, mode);
    const std::string movement = gt.movement.empty() ? pred.movement : gt.movement;
    accumulate(groups[{a.model, movement, gt.view}], m);
  }
  std::vector<ReportRow> rows;
  for (const auto& [key, m] : groups) {
    rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), prf(m)});
  }
  emit(a.format == "json" ? format_report_json(rows) : format_report_table(rows), a.out);
  return 0;
}

struct CalibrateArgs {
  std::string manifest;
  std::string rules;
  std::string angles = "3,5,8,12";
  std::string positions = "0.02,0.05,0.1";
  std::string debounces = "1,2,3";
  std::string base;
  double tiou = kDefaultTiouThreshold;
  std::string matching = "greedy";
  unsigned threads = 0;
  std::string out;
};

int cmd_calibrate(const CalibrateArgs& a, const SchemaRegistry& registry) {
  const auto entries = load_manifest(a.manifest);
  ThresholdGrid grid;
  grid.angle_tolerances = parse_list(a.angles);
  grid.position_tolerances = parse_list(a.positions);
  grid.debounces.clear();
  for (double d : parse_list(a.debounces)) grid.debounces.push_back(static_cast<int>(d));
  if (!a.base.empty()) grid.base = with_path(a.base, [&] { return load_thresholds(a.base); });
  const MatchMode mode = a.matching == "optimal" ? MatchMode::kOptimal : MatchMode::kGreedy;

  std::map<GroupKey, std::vector<const ManifestEntry*>> groups;
  for (const ManifestEntry& e : entries) groups[{e.model, e.movement, e.view}].push_back(&e);

  Json out_groups = Json::array();
  for (const auto& [key, members] : groups) {
    std::vector<LoadedVideo> loaded;
    for (const ManifestEntry* e : members) loaded.push_back(load_video(*e, registry, false, true));
    const MovementRuleSet rules = rules_for(*members.front(), a.rules);
    const KeypointSchema& schema = registry.at(loaded.front().stream.schema);
    std::vector<EvalVideo> videos;
    for (const LoadedVideo& v : loaded) {
      if (v.stream.schema != schema.name) {
        throw Error(ErrorKind::kConfiguration,
                    v.entry.video + ": group mixes keypoint schemas");
      }
      videos.push_back({v.entry.video, &v.stream, v.gt->reps});
    }
    const GridSearchResult r =
        grid_search_thresholds(grid, videos, rules, schema, {}, a.tiou, mode, a.threads);
    Json g;
    g["model"] = std::get<0>(key);
    g["movement"] = std::get<1>(key);
    g["view"] = std::get<2>(key);
    g["mean_macro_f1"] = r.best_f1;
    g["thresholds"] = Json::parse(thresholds_to_json(r.best));
    out_groups.push_back(std::move(g));
  }
  Json doc;
  doc["groups"] = std::move(out_groups);
  emit(doc.dump(2) + "\n", a.out);
  return 0;
}

struct CalibrateTauArgs {
  std::string manifest;
  std::string rules;
  std::string thresholds;
  std::string grid = "0,0.5,1,2,3,4,6,8";
  std::string out;
  RunFlags run;
};

int cmd_calibrate_tau(const CalibrateTauArgs& a, const SchemaRegistry& registry) {
  const auto entries = load_manifest(a.manifest);
  std::vector<LoadedVideo> loaded;
  for (const ManifestEntry& e : entries) loaded.push_back(load_video(e, registry, true, false));
  const MovementRuleSet rules = rules_for(entries.front(), a.rules);
  ThresholdConfig thresholds;
  if (!a.thresholds.empty()) {
    thresholds = with_path(a.thresholds, [&] { return load_thresholds(a.thresholds); });
  }
  const KeypointSchema& schema = registry.at(loaded.front().stream.schema);
  std::vector<JudgeInput> inputs;
  for (const LoadedVideo& v : loaded) {
    inputs.push_back({v.entry.video, &v.stream, v.frames.get()});
  }
  JudgeOptions options = a.run.options();
  const std::vector<double> grid = parse_list(a.grid);
  const double tau = calibrate_tau(inputs, rules, schema, thresholds, options, grid);
  Json doc;
  doc["rtc_tau"] = tau;
  doc["grid"] = grid;
  doc["videos"] = inputs.size();
  emit(doc.dump(2) + "\n", a.out);
  return 0;
}

struct BenchArgs {
  std::string rules;
  std::string thresholds;
  std::string stream;
  std::string frames;
  int repetitions = 1;
  std::string format = "table";
  std::string out;
  RunFlags run;
};

int cmd_bench(const BenchArgs& a, const SchemaRegistry& registry) {
  const MovementRuleSet rules = with_path(a.rules, [&] { return load_rule_set(a.rules); });
  ThresholdConfig thresholds;
  if (!a.thresholds.empty()) {
    thresholds = with_path(a.thresholds, [&] { return load_thresholds(a.thresholds); });
  }
  const KeypointStream stream =
      with_path(a.stream, [&] { return load_keypoint_stream(a.stream, registry); });
  const auto frames = with_path(a.frames, [&] { return FrameSource::open(a.frames); });
  const KeypointSchema& schema = registry.at(stream.schema);
  if (a.repetitions < 1) throw Error(ErrorKind::kConfiguration, "--repetitions must be >= 1");

  struct Config {
    const char* name;
    bool dc;
    bool rtc;
  };
  const Config configs[] = {{"none", false, false}, {"dc", true, false},
                            {"rtc", false, true}, {"dc+rtc", true, true}};
  Json rows = Json::array();
  for (const Config& c : configs) {
    JudgeOptions o = a.run.options();
    o.cache.dc_enabled = c.dc;
    o.cache.rtc_enabled = c.rtc;
    std::vector<double> decisions;
    double rtf_sum = 0.0;
    double wall_sum = 0.0;
    JudgeResult last;
    for (int r = 0; r < a.repetitions; ++r) {
      last = judge_stream(stream, frames.get(), rules, schema, thresholds, o);
      const auto& d = last.diagnostics;
      decisions.insert(decisions.end(), d.decision_latency_ms.begin(), d.decision_latency_ms.end());
      rtf_sum += d.rtf;
      wall_sum += d.wall_seconds;
    }
    const auto& d = last.diagnostics;
    const LatencySummary lat = summarize_latency(decisions);
    Json row;
    row["config"] = c.name;
    row["frames"] = d.cache.frames_total;
    row["pose_inferences"] = d.cache.pose_inferences;
    row["detector_invocations"] = d.cache.detector_invocations;
    row["rtc_skips"] = d.cache.rtc_skips;
    row["reps"] = last.records.size();
    row["decision_latency_mean_ms"] = lat.mean_ms;
    row["decision_latency_median_ms"] = lat.median_ms;
    row["rtf"] = rtf_sum / a.repetitions;
    row["wall_seconds"] = wall_sum / a.repetitions;
    rows.push_back(std::move(row));
  }
  if (a.format == "json") {
    emit(rows.dump(2) + "\n", a.out);
    return 0;
  }
  std::ostringstream t;
  t << std::left << std::setw(8) << "config" << std::right << std::setw(8) << "frames"
    << std::setw(8) << "pose" << std::setw(8) << "det" << std::setw(8) << "skips"
    << std::setw(6) << "reps" << std::setw(12) << "lat_mean" << std::setw(12) << "lat_med"
    << std::setw(10) << "rtf" << std::setw(10) << "wall_s" << "\n";
  t << std::fixed;
  for (const Json& r : rows) {
    t << std::left << std::setw(8) << r["config"].get<std::string>() << std::right
      << std::setw(8) << r["frames"].get<std::int64_t>() << std::setw(8)
      << r["pose_inferences"].get<std::int64_t>() << std::setw(8)
      << r["detector_invocations"].get<std::int64_t>() << std::setw(8)
      << r["rtc_skips"].get<std::int64_t>() << std::setw(6) << r["reps"].get<std::size_t>()
      << std::setprecision(3) << std::setw(12) << r["decision_latency_mean_ms"].get<double>()
      << std::setw(12) << r["decision_latency_median_ms"].get<double>() << std::setw(10)
      << r["rtf"].get<double>() << std::setw(10) << r["wall_seconds"].get<double>() << "\n";
  }
  emit(t.str(), a.out);
  return 0;
}

struct EmbedderArgs {
  std::string embeddings;
  std::size_t hash_dim = 0;
  std::string endpoint;
  std::string model;
  std::string api_key_env = "REPJUDGE_EMBEDDING_API_KEY";

  void add_to(CLI::App* app) {
    app->add_option("--embeddings", embeddings, "Precomputed embedding table (JSON)");
    app->add_option("--hash-dim", hash_dim, "Use the hashing embedder with this dimension");
    app->add_option("--endpoint", endpoint, "OpenAI-style embeddings endpoint base URL");
    app->add_option("--embedding-model", model, "Model name sent to the endpoint");
    app->add_option("--api-key-env", api_key_env, "Environment variable holding the API key");
  }

  std::unique_ptr<EmbeddingProvider> make() const {
    if (!embeddings.empty()) {
      return std::make_unique<PrecomputedEmbeddings>(
          with_path(embeddings, [&] { return PrecomputedEmbeddings::load(embeddings); }));
    }
    if (hash_dim > 0) return std::make_unique<HashEmbedder>(hash_dim);
    if (!endpoint.empty()) {
      HttpEmbeddingClient::Options o;
      o.base_url = endpoint;
      o.model = model;
      if (const char* key = std::getenv(api_key_env.c_str())) o.api_key = key;
      return std::make_unique<HttpEmbeddingClient>(o);
    }
    throw Error(ErrorKind::kConfiguration,
                "choose an embedder: --embeddings, --hash-dim or --endpoint");
  }
};

int cmd_ingest(const std::string& pages_path, const EmbedderArgs& e, const std::string& out) {
  const auto pages = with_path(pages_path, [&] { return load_pages(pages_path); });
  auto embedder = e.make();
  const ChunkStore store = ingest(pages, *embedder);
  if (out.empty()) throw Error(ErrorKind::kConfiguration, "--out is required");
  store.save(out);
  std::cout << "stored " << store.size() << " chunks of dimension " << store.dimension() << "\n";
  return 0;
}

struct RetrieveArgs {
  std::string store;
  int label = kLabelIf3;
  std::size_t k = 5;
  std::string query_file;
  std::string query_text;
  std::optional<double> threshold;
  EmbedderArgs embedder;
};

int cmd_retrieve(const RetrieveArgs& a) {
  const ChunkStore store = with_path(a.store, [&] { return ChunkStore::load(a.store); });
  std::vector<float> q;
  if (!a.query_file.empty()) {
    q = with_path(a.query_file, [&] { return load_vector(a.query_file); });
  } else if (!a.query_text.empty()) {
    q = a.embedder.make()->embed(a.query_text);
  } else {
    throw Error(ErrorKind::kConfiguration, "give --query-file or --query");
  }
  const auto hits = retrieve(q, store, a.label, a.k, a.threshold);
  Json out = Json::array();
  for (const RetrievalHit& h : hits) {
    const Chunk& c = store.chunks()[h.index];
    out.push_back({{"index", h.index},
                   {"similarity", h.similarity},
                   {"label", c.metadata.label},
                   {"sourceType", c.metadata.source_type},
                   {"pageIndex", c.metadata.page_index},
                   {"text", c.text}});
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const std::string& pairs_path, const std::string& grid_text,
              const std::string& format) {
  const auto pairs = with_path(pairs_path, [&] { return load_labeled_pairs(pairs_path); });
  std::vector<double> grid = parse_list(grid_text);
  if (grid.empty()) {
    for (int i = 0; i <= 20; ++i) grid.push_back(i * 0.05);
  }
  const SweepResult r = sweep_threshold(pairs, grid);
  if (format == "json") {
    Json points = Json::array();
    for (const SweepPoint& p : r.points) {
      points.push_back({{"threshold", p.threshold}, {"tp", p.tp}, {"fp", p.fp}, {"fn", p.fn},
                        {"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}});
    }
    Json doc;
    doc["points"] = std::move(points);
    doc["best_threshold"] = r.best_threshold;
    doc["best_f1"] = r.best_f1;
    doc["unique_best"] = r.unique_best;
    std::cout << doc.dump(2) << "\n";
    return 0;
  }
  std::cout << std::fixed << std::setprecision(4);
  std::cout << std::setw(10) << "threshold" << std::setw(6) << "tp" << std::setw(6) << "fp"
            << std::setw(6) << "fn" << std::setw(11) << "precision" << std::setw(9) << "recall"
            << std::setw(9) << "f1" << "\n";
  for (const SweepPoint& p : r.points) {
    std::cout << std::setw(10) << p.threshold << std::setw(6) << p.tp << std::setw(6) << p.fp
              << std::setw(6) << p.fn << std::setw(11) << p.precision << std::setw(9)
              << p.recall << std::setw(9) << p.f1 << "\n";
  }
  std::cout << "best threshold " << r.best_threshold << " (F1 " << r.best_f1 << ")"
            << (r.unique_best ? "" : ", tied") << "\n";
  return 0;
}

int cmd_stats(const std::string& human, const std::string& llm, const std::string& out) {
  const auto h = with_path(human, [&] { return load_scores_csv(human); });
  const auto l = with_path(llm, [&] { return load_scores_csv(llm); });
  emit(rater_report(h, l), out);
  return 0;
}

int cmd_check(const std::string& rules_path, const std::string& schema_name,
              const SchemaRegistry& registry) {
  const MovementRuleSet rules = with_path(rules_path, [&] { return load_rule_set(rules_path); });
  const ValidationReport r = validate_rule_set(rules, registry.at(schema_name));
  Json gaps = Json::array();
  for (const JointGap& g : r.gaps) {
    Json j;
    j["group"] = std::string(to_string(g.group));
    j["semantic_key"] = g.semantic_key;
    j["joint"] = g.joint;
    j["directive"] = g.directive ? Json(std::string(to_string(*g.directive))) : Json(nullptr);
    j["covered"] = g.covered;
    gaps.push_back(std::move(j));
  }
  Json doc;
  doc["movement"] = rules.movement_name;
  doc["schema"] = schema_name;
  doc["runnable"] = r.runnable;
  doc["gaps"] = std::move(gaps);
  doc["excluded_constraints"] = r.excluded_constraints;
  doc["inert_annotations"] = r.inert_annotations;
  doc["issues"] = r.issues;
  std::cout << doc.dump(2) << "\n";
  return r.runnable ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"repjudge: rule-based repetition judging from pose keypoints"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  std::string schemas_path;
  app.add_option("--schemas", schemas_path, "Keypoint schema registry (JSON); default built-in");

  JudgeArgs judge;
  auto* judge_cmd = app.add_subcommand("judge", "Judge one keypoint stream");
  judge_cmd->add_option("--rules", judge.rules, "Rule-set JSON")->required();
  judge_cmd->add_option("--thresholds", judge.thresholds, "Threshold config JSON");
  judge_cmd->add_option("--stream", judge.stream, "Keypoint stream (JSONL)")->required();
  judge_cmd->add_option("--frames", judge.frames, "PGM directory or raw frame stream");
  judge_cmd->add_option("--video", judge.video, "Video id written to the records");
  judge_cmd->add_option("-o,--out", judge.out, "Output file (default stdout)");
  judge_cmd->add_option("--model", judge.model, "Threshold group selector");
  judge_cmd->add_option("--movement", judge.movement, "Threshold group selector");
  judge_cmd->add_option("--view", judge.view, "Threshold group selector");
  judge_cmd->add_flag("--no-diagnostics", judge.no_diagnostics, "Records only");
  judge.run.add_to(judge_cmd);

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predicted reps against ground truth");
  eval_cmd->add_option("--pred", eval.predictions, "Record files")->required();
  eval_cmd->add_option("--gt", eval.ground_truth, "Ground-truth files")->required();
  eval_cmd->add_option("--tiou", eval.tiou, "tIoU match threshold");
  eval_cmd->add_option("--matching", eval.matching, "greedy or optimal")
      ->check(CLI::IsMember({"greedy", "optimal"}));
  eval_cmd->add_option("--format", eval.format, "table or json")
      ->check(CLI::IsMember({"table", "json"}));
  eval_cmd->add_option("--model", eval.model, "Model label for the report");
  eval_cmd->add_option("-o,--out", eval.out, "Output file (default stdout)");

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Grid-search thresholds per group");
  cal_cmd->add_option("--manifest", cal.manifest, "Dataset manifest")->required();
  cal_cmd->add_option("--rules", cal.rules, "Rule set for entries without one");
  cal_cmd->add_option("--angles", cal.angles, "Angle tolerances, comma separated");
  cal_cmd->add_option("--positions", cal.positions, "Position tolerances, comma separated");
  cal_cmd->add_option("--debounces", cal.debounces, "Debounce lengths, comma separated");
  cal_cmd->add_option("--base", cal.base, "Threshold config for the other fields");
  cal_cmd->add_option("--tiou", cal.tiou, "tIoU match threshold");
  cal_cmd->add_option("--matching", cal.matching, "greedy or optimal")
      ->check(CLI::IsMember({"greedy", "optimal"}));
  cal_cmd->add_option("--threads", cal.threads, "Worker threads (0: all cores)");
  cal_cmd->add_option("-o,--out", cal.out, "Output file (default stdout)");

  CalibrateTauArgs tau;
  auto* tau_cmd = app.add_subcommand("calibrate-tau", "Pick the largest count-preserving RTC tau");
  tau_cmd->add_option("--manifest", tau.manifest, "Dataset manifest")->required();
  tau_cmd->add_option("--rules", tau.rules, "Rule set for entries without one");
  tau_cmd->add_option("--thresholds", tau.thresholds, "Threshold config JSON");
  tau_cmd->add_option("--grid", tau.grid, "Candidate tau values, comma separated");
  tau_cmd->add_option("-o,--out", tau.out, "Output file (default stdout)");
  tau.run.add_to(tau_cmd);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Latency and RTF per cache configuration");
  bench_cmd->add_option("--rules", bench.rules, "Rule-set JSON")->required();
  bench_cmd->add_option("--thresholds", bench.thresholds, "Threshold config JSON");
  bench_cmd->add_option("--stream", bench.stream, "Keypoint stream (JSONL)")->required();
  bench_cmd->add_option("--frames", bench.frames, "PGM directory or raw frame stream")->required();
  bench_cmd->add_option("--repetitions", bench.repetitions, "Runs per configuration");
  bench_cmd->add_option("--format", bench.format, "table or json")
      ->check(CLI::IsMember({"table", "json"}));
  bench_cmd->add_option("-o,--out", bench.out, "Output file (default stdout)");
  bench.run.add_to(bench_cmd);

  std::string pages;
  std::string store_out;
  EmbedderArgs ingest_embedder;
  auto* ingest_cmd = app.add_subcommand("ingest", "Embed pages into a chunk store");
  ingest_cmd->add_option("--pages", pages, "Pages JSON")->required();
  ingest_cmd->add_option("-o,--out", store_out, "Store file")->required();
  ingest_embedder.add_to(ingest_cmd);

  RetrieveArgs ret;
  auto* ret_cmd = app.add_subcommand("retrieve", "Label-filtered top-k retrieval");
  ret_cmd->add_option("--store", ret.store, "Chunk store")->required();
  ret_cmd->add_option("--label", ret.label, "Source label (1 IF3, 0 CrossFit)")
      ->check(CLI::IsMember({0, 1}));
  ret_cmd->add_option("--k", ret.k, "Candidates before thresholding");
  ret_cmd->add_option("--query-file", ret.query_file, "Query vector file");
  ret_cmd->add_option("--query", ret.query_text, "Query text (needs an embedder)");
  ret_cmd->add_option("--threshold", ret.threshold, "Override the per-label threshold");
  ret.embedder.add_to(ret_cmd);

  std::string pairs;
  std::string sweep_grid;
  std::string sweep_format = "table";
  auto* sweep_cmd = app.add_subcommand("sweep", "Precision/recall/F1 over similarity thresholds");
  sweep_cmd->add_option("--pairs", pairs, "Labeled pairs JSON")->required();
  sweep_cmd->add_option("--grid", sweep_grid, "Thresholds, comma separated (default 0..1 by 0.05)");
  sweep_cmd->add_option("--format", sweep_format, "table or json")
      ->check(CLI::IsMember({"table", "json"}));

  std::string human;
  std::string llm;
  std::string stats_out;
  auto* stats_cmd = app.add_subcommand("stats", "Rater agreement and human/LLM calibration");
  stats_cmd->add_option("--human", human, "Human scores CSV")->required();
  stats_cmd->add_option("--llm", llm, "LLM scores CSV")->required();
  stats_cmd->add_option("-o,--out", stats_out, "Output file (default stdout)");

  bool dump = false;
  auto* schemas_cmd = app.add_subcommand("schemas", "List keypoint schemas");
  schemas_cmd->add_flag("--dump", dump, "Print the registry as JSON");

  std::string check_rules;
  std::string check_schema;
  auto* check_cmd = app.add_subcommand("check", "Validate a rule set against a schema");
  check_cmd->add_option("--rules", check_rules, "Rule-set JSON")->required();
  check_cmd->add_option("--schema", check_schema, "Schema name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const SchemaRegistry registry = registry_from(schemas_path);
    if (judge_cmd->parsed()) return cmd_judge(judge, registry);
    if (eval_cmd->parsed()) return cmd_evaluate(eval);
    if (cal_cmd->parsed()) return cmd_calibrate(cal, registry);
    if (tau_cmd->parsed()) return cmd_calibrate_tau(tau, registry);
    if (bench_cmd->parsed()) return cmd_bench(bench, registry);
    if (ingest_cmd->parsed()) return cmd_ingest(pages, ingest_embedder, store_out);
    if (ret_cmd->parsed()) return cmd_retrieve(ret);
    if (sweep_cmd->parsed()) return cmd_sweep(pairs, sweep_grid, sweep_format);
    if (stats_cmd->parsed()) return cmd_stats(human, llm, stats_out);
    if (check_cmd->parsed()) return cmd_check(check_rules, check_schema, registry);
    if (schemas_cmd->parsed()) {
      if (dump) {
        std::cout << registry.to_json() << "\n";
      } else {
        for (const std::string& name : registry.names()) {
          std::cout << name << " (" << registry.at(name).size() << " joints)\n";
        }
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "repjudge: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "repjudge: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
