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

// End-to-end judging of one keypoint stream: tracking, target lock, caching,
// feature extraction and the rep state machine.

#ifndef REPJUDGE_JUDGE_HPP_
#define REPJUDGE_JUDGE_HPP_

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repjudge/cache.hpp"
#include "repjudge/frames.hpp"
#include "repjudge/rules.hpp"
#include "repjudge/schema.hpp"
#include "repjudge/stream.hpp"
#include "repjudge/thresholds.hpp"
#include "repjudge/tracking.hpp"
#include "repjudge/validator.hpp"

namespace repjudge {

// Simulated per-call cost of the detector and the pose network. The
// keypoint stream stands in for the network output; these costs make cache
// savings measurable.
struct InferenceCosts {
  std::chrono::microseconds detector{0};
  std::chrono::microseconds pose{0};  // per person crop (top-down) or per frame
};

// Replays a keypoint stream as if it were a pose pipeline.
class StreamBackend {
 public:
  StreamBackend(const KeypointStream& stream, InferenceCosts costs);

  // True when the stream carries detector boxes (top-down pipeline).
  bool top_down() const { return top_down_; }

  // Person boxes of frame `position` (the position in the stream).
  std::vector<BBox> detect(std::size_t position) const;
  // All instances of the frame.
  std::vector<PersonInstance> estimate(std::size_t position) const;
  // The instance that best overlaps `region`, as a pose network run on that
  // crop would return; nullopt when none overlaps.
  std::optional<PersonInstance> estimate_in(std::size_t position, const BBox& region) const;

 private:
  const KeypointStream* stream_;
  InferenceCosts costs_;
  bool top_down_ = false;
};

enum class RunMode { kPrerecorded, kStreamed };

struct JudgeOptions {
  std::optional<TrackerMode> tracker_mode;  // default: IOU for top-down, else OKS
  TrackerOptions tracker;
  CachePolicy cache;
  FeatureOptions features;
  RunMode mode = RunMode::kPrerecorded;
  double fps = 30.0;
  InferenceCosts costs;
};

struct LatencySummary {
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
};

LatencySummary summarize_latency(std::span<const double> samples_ms);

struct JudgeDiagnostics {
  std::int64_t frames = 0;
  std::optional<std::int64_t> target_id;
  std::int64_t missing_target_frames = 0;
  ValidatorDiagnostics validator;
  CacheStats cache;
  std::vector<double> frame_latency_ms;     // ingestion to frame done
  std::vector<double> decision_latency_ms;  // per emitted rep
  double busy_seconds = 0.0;                // processing time, pacing excluded
  double wall_seconds = 0.0;
  double rtf = 0.0;                         // busy time / media duration
};

struct JudgeResult {
  std::string movement;
  std::vector<RepRecord> records;
  JudgeDiagnostics diagnostics;
};

// Judges one stream. `frames` is needed only when RTC is enabled; it must
// hold the frame at every stream frame index. Throws kConfiguration on a
// schema mismatch between stream and `schema`, or when the rule set is not
// runnable under the schema.
JudgeResult judge_stream(const KeypointStream& stream, const FrameSource* frames,
                         const MovementRuleSet& rules, const KeypointSchema& schema,
                         const ThresholdConfig& thresholds, const JudgeOptions& options = {});

// One video for multi-video operations.
struct JudgeInput {
  std::string video;
  const KeypointStream* stream = nullptr;
  const FrameSource* frames = nullptr;
};

// Largest tau in `grid` for which RTC judging keeps the per-class rep counts
// of the no-cache run on every input; 0 when none does. Throws
// kConfiguration for an empty grid.
double calibrate_tau(std::span<const JudgeInput> inputs, const MovementRuleSet& rules,
                     const KeypointSchema& schema, const ThresholdConfig& thresholds,
                     const JudgeOptions& options, std::span<const double> grid);

// Record file:
//   {"movement": m, "video": id?, "reps": [{"start", "end", "label",
//    "failed", "no_reps"}], "diagnostics": {...}?}
std::string format_records(const JudgeResult& result, const std::string& video = {},
                           bool include_diagnostics = true);

struct RecordFile {
  std::string movement;
  std::string video;
  std::vector<RepRecord> records;
};

RecordFile parse_records(const std::string& text);
RecordFile load_records(const std::filesystem::path& path);

}  // namespace repjudge

#endif  // REPJUDGE_JUDGE_HPP_
