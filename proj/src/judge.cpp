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

#include "repjudge/judge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "json_util.hpp"

namespace repjudge {

using detail::OrderedJson;
using Clock = std::chrono::steady_clock;

namespace {

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

void spend(std::chrono::microseconds cost) {
  if (cost.count() > 0) std::this_thread::sleep_for(cost);
}

}  // namespace

StreamBackend::StreamBackend(const KeypointStream& stream, InferenceCosts costs)
    : stream_(&stream), costs_(costs) {
  bool any = false;
  top_down_ = true;
  for (const PoseFrame& f : stream.frames) {
    for (const PersonInstance& p : f.instances) {
      any = true;
      top_down_ = top_down_ && p.bbox.has_value();
    }
  }
  top_down_ = top_down_ && any;
}

std::vector<BBox> StreamBackend::detect(std::size_t position) const {
  spend(costs_.detector);
  std::vector<BBox> out;
  for (const PersonInstance& p : stream_->frames.at(position).instances) {
    if (auto box = p.person_box(0.0)) out.push_back(*box);
  }
  return out;
}

std::vector<PersonInstance> StreamBackend::estimate(std::size_t position) const {
  const auto& instances = stream_->frames.at(position).instances;
  if (top_down_) {
    for (std::size_t i = 0; i < instances.size(); ++i) spend(costs_.pose);
  } else {
    spend(costs_.pose);
  }
  return instances;
}

std::optional<PersonInstance> StreamBackend::estimate_in(std::size_t position,
                                                         const BBox& region) const {
  spend(costs_.pose);
  std::optional<PersonInstance> best;
  double best_overlap = 0.0;
  for (const PersonInstance& p : stream_->frames.at(position).instances) {
    const auto box = p.person_box(0.0);
    if (!box) continue;
    const double overlap = iou(*box, region);
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = p;
    }
  }
  return best;
}

LatencySummary summarize_latency(std::span<const double> samples_ms) {
  LatencySummary s;
  if (samples_ms.empty()) return s;
  std::vector<double> v(samples_ms.begin(), samples_ms.end());
  std::sort(v.begin(), v.end());
  s.mean_ms = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  const std::size_t n = v.size();
  s.median_ms = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  s.p95_ms = v[std::max<std::size_t>(rank, 1) - 1];
  s.max_ms = v.back();
  return s;
}

JudgeResult judge_stream(const KeypointStream& stream, const FrameSource* frames,
                         const MovementRuleSet& rules, const KeypointSchema& schema,
                         const ThresholdConfig& thresholds, const JudgeOptions& options) {
  if (!stream.frames.empty() && stream.schema != schema.name) {
    throw Error(ErrorKind::kConfiguration, "keypoint stream uses schema '" + stream.schema +
                                               "' but '" + schema.name + "' was requested");
  }
  if (!(options.fps > 0.0)) throw Error(ErrorKind::kConfiguration, "fps must be > 0");
  options.cache.validate();
  const ValidationReport report = validate_rule_set(rules, schema);
  if (!report.runnable) {
    std::string why;
    for (const std::string& issue : report.issues) why += "; " + issue;
    for (const JointGap& gap : report.gaps) {
      if (!gap.covered) why += "; joint '" + gap.joint + "' missing from schema";
    }
    throw Error(ErrorKind::kConfiguration,
                "rule set '" + rules.movement_name + "' cannot run under schema '" +
                    schema.name + "'" + why);
  }
  const bool rtc = options.cache.rtc_enabled;
  const bool dc = options.cache.dc_enabled;
  if (rtc && frames == nullptr) {
    throw Error(ErrorKind::kConfiguration, "the ROI temporal cache needs a frame input");
  }

  const MovementRuleSet reduced = apply_schema(rules, schema);
  RepValidator validator(reduced, thresholds);
  const StreamBackend backend(stream, options.costs);
  const TrackerMode mode = options.tracker_mode.value_or(
      backend.top_down() ? TrackerMode::kIou : TrackerMode::kOks);
  TrackerOptions tracker_options = options.tracker;
  tracker_options.conf_floor = thresholds.conf_floor;
  Tracker tracker(mode, schema, tracker_options);
  TargetSelector selector;
  RoiTemporalCache cache(options.cache);

  const int frame_w = frames ? frames->width() : std::numeric_limits<int>::max();
  const int frame_h = frames ? frames->height() : std::numeric_limits<int>::max();

  JudgeResult result;
  result.movement = rules.movement_name;
  JudgeDiagnostics& diag = result.diagnostics;
  std::optional<PersonInstance> last_target;
  std::optional<BBox> dc_box;

  const Clock::time_point run_start = Clock::now();
  const std::int64_t first_index = stream.frames.empty() ? 0 : stream.frames.front().frame_index;
  double busy_ms = 0.0;

  for (std::size_t pos = 0; pos < stream.frames.size(); ++pos) {
    const PoseFrame& frame = stream.frames[pos];
    if (options.mode == RunMode::kStreamed) {
      const auto due = run_start + std::chrono::duration_cast<Clock::duration>(
                                       std::chrono::duration<double>(
                                           static_cast<double>(frame.frame_index - first_index) /
                                           options.fps));
      std::this_thread::sleep_until(due);
    }
    const Clock::time_point ingest = Clock::now();

    std::optional<PersonInstance> target;
    bool skipped = false;
    if (rtc && last_target) {
      std::optional<BBox> roi = dc_box;
      if (!roi) roi = last_target->keypoint_box(thresholds.conf_floor);
      if (!roi) roi = last_target->person_box(0.0);
      if (roi) {
        const auto r = cache.decide(frames->frame(frame.frame_index), *roi);
        if (r.rpd) diag.cache.rpd_trace.push_back(*r.rpd);
        if (r.decision == CacheDecision::kSkip) {
          target = last_target;
          skipped = true;
          ++diag.cache.rtc_skips;
        }
      }
    }
    if (!skipped) {
      ++diag.cache.pose_inferences;
      if (dc) {
        if (!dc_box) {
          ++diag.cache.detector_invocations;
          const std::vector<BBox> boxes = backend.detect(pos);
          std::optional<std::size_t> best;
          for (std::size_t i = 0; i < boxes.size(); ++i) {
            if (!best || boxes[i].area() > boxes[*best].area()) best = i;
          }
          if (best) dc_box = dc_bbox(boxes[*best], options.cache.dc_offset, frame_w, frame_h);
        }
        if (dc_box) {
          target = backend.estimate_in(pos, *dc_box);
          if (target) diag.target_id = 0;
        }
      } else {
        if (backend.top_down()) {
          ++diag.cache.detector_invocations;
          backend.detect(pos);
        }
        PoseFrame inferred = frame;
        inferred.instances = backend.estimate(pos);
        const std::vector<std::int64_t> ids = tracker.step(inferred);
        std::optional<std::size_t> index;
        try {
          index = selector.select(inferred, ids, tracker);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kNoTarget) throw;
        }
        if (index) {
          target = inferred.instances[*index];
          target->track_id = ids[*index];
          diag.target_id = selector.target_id();
        }
      }
      if (rtc && !target) cache.reset();
    }
    ++diag.cache.frames_total;

    KinematicFeatures features;
    if (target) {
      features = compute_features(*target, reduced, schema, thresholds.conf_floor,
                                  options.features);
    } else {
      ++diag.missing_target_frames;
    }
    last_target = target;
    std::optional<RepRecord> record = validator.step(frame.frame_index, features);

    const Clock::time_point done = Clock::now();
    const double frame_ms = ms_between(ingest, done);
    busy_ms += frame_ms;
    diag.frame_latency_ms.push_back(frame_ms);
    if (record) {
      diag.decision_latency_ms.push_back(frame_ms);
      result.records.push_back(std::move(*record));
    }
  }
  if (!stream.frames.empty()) {
    if (auto record = validator.finalize(stream.frames.back().frame_index)) {
      result.records.push_back(std::move(*record));
    }
  }

  diag.frames = static_cast<std::int64_t>(stream.frames.size());
  diag.validator = validator.diagnostics();
  diag.busy_seconds = busy_ms / 1000.0;
  diag.wall_seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
  const double media_seconds = static_cast<double>(diag.frames) / options.fps;
  diag.rtf = media_seconds > 0.0 ? diag.busy_seconds / media_seconds : 0.0;
  return result;
}

namespace {

std::pair<std::size_t, std::size_t> class_counts(const std::vector<RepRecord>& records) {
  std::size_t valid = 0;
  for (const RepRecord& r : records) valid += r.label == RepLabel::kValid ? 1 : 0;
  return {valid, records.size() - valid};
}

}  // namespace

double calibrate_tau(std::span<const JudgeInput> inputs, const MovementRuleSet& rules,
                     const KeypointSchema& schema, const ThresholdConfig& thresholds,
                     const JudgeOptions& options, std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorKind::kConfiguration, "tau grid is empty");
  JudgeOptions base = options;
  base.cache.rtc_enabled = false;
  base.costs = {};
  base.mode = RunMode::kPrerecorded;
  std::vector<std::pair<std::size_t, std::size_t>> oracle;
  for (const JudgeInput& in : inputs) {
    oracle.push_back(
        class_counts(judge_stream(*in.stream, in.frames, rules, schema, thresholds, base).records));
  }
  std::vector<double> taus(grid.begin(), grid.end());
  std::sort(taus.begin(), taus.end(), std::greater<>());
  for (double tau : taus) {
    JudgeOptions cached = base;
    cached.cache.rtc_enabled = true;
    cached.cache.rtc_tau = tau;
    bool preserved = true;
    for (std::size_t i = 0; i < inputs.size() && preserved; ++i) {
      const auto counts = class_counts(judge_stream(*inputs[i].stream, inputs[i].frames, rules,
                                                    schema, thresholds, cached)
                                           .records);
      preserved = counts == oracle[i];
    }
    if (preserved) return tau;
  }
  return 0.0;
}

std::string format_records(const JudgeResult& result, const std::string& video,
                           bool include_diagnostics) {
  OrderedJson doc;
  doc["movement"] = result.movement;
  if (!video.empty()) doc["video"] = video;
  OrderedJson reps = OrderedJson::array();
  for (const RepRecord& r : result.records) {
    OrderedJson rep;
    rep["start"] = r.t_start;
    rep["end"] = r.t_end;
    rep["label"] = std::string(to_string(r.label));
    rep["failed"] = r.failed_requirements;
    rep["no_reps"] = r.triggered_no_reps;
    reps.push_back(std::move(rep));
  }
  doc["reps"] = std::move(reps);
  if (include_diagnostics) {
    const JudgeDiagnostics& d = result.diagnostics;
    OrderedJson diag;
    diag["frames"] = d.frames;
    diag["target_id"] = d.target_id ? OrderedJson(*d.target_id) : OrderedJson(nullptr);
    diag["missing_target_frames"] = d.missing_target_frames;
    diag["unavailable_feature_frames"] = d.validator.unavailable_feature_frames;
    diag["dropped_short_reps"] = d.validator.dropped_short_reps;
    diag["cache"] = {{"frames_total", d.cache.frames_total},
                     {"detector_invocations", d.cache.detector_invocations},
                     {"pose_inferences", d.cache.pose_inferences},
                     {"rtc_skips", d.cache.rtc_skips}};
    const LatencySummary frame = summarize_latency(d.frame_latency_ms);
    const LatencySummary decision = summarize_latency(d.decision_latency_ms);
    diag["timing"] = {{"busy_seconds", d.busy_seconds},
                      {"wall_seconds", d.wall_seconds},
                      {"rtf", d.rtf},
                      {"frame_latency_ms", {{"mean", frame.mean_ms},
                                            {"median", frame.median_ms},
                                            {"p95", frame.p95_ms}}},
                      {"decision_latency_ms", d.decision_latency_ms},
                      {"decision_latency_mean_ms", decision.mean_ms}};
    doc["diagnostics"] = std::move(diag);
  }
  return doc.dump(2) + "\n";
}

RecordFile parse_records(const std::string& text) {
  const OrderedJson doc = detail::parse_json<OrderedJson>(text, "record file");
  const std::string ctx = "record file";
  RecordFile out;
  out.movement = detail::get_field_or<std::string>(doc, "movement", "", ctx);
  out.video = detail::get_field_or<std::string>(doc, "video", "", ctx);
  for (const OrderedJson& rep : detail::get_field<OrderedJson>(doc, "reps", ctx)) {
    RepRecord r;
    r.t_start = detail::get_field<std::int64_t>(rep, "start", ctx);
    r.t_end = detail::get_field<std::int64_t>(rep, "end", ctx);
    const auto label = detail::get_field<std::string>(rep, "label", ctx);
    if (label != "valid" && label != "invalid") {
      throw Error(ErrorKind::kSchema, ctx + ": label must be \"valid\" or \"invalid\"");
    }
    r.label = label == "valid" ? RepLabel::kValid : RepLabel::kInvalid;
    r.failed_requirements =
        detail::get_field_or<std::vector<std::string>>(rep, "failed", {}, ctx);
    r.triggered_no_reps = detail::get_field_or<std::vector<std::string>>(rep, "no_reps", {}, ctx);
    if (r.t_end < r.t_start) throw Error(ErrorKind::kSchema, ctx + ": rep ends before it starts");
    out.records.push_back(std::move(r));
  }
  return out;
}

RecordFile load_records(const std::filesystem::path& path) {
  return parse_records(detail::read_text_file(path));
}

}  // namespace repjudge
