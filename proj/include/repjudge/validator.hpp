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

#ifndef REPJUDGE_VALIDATOR_HPP_
#define REPJUDGE_VALIDATOR_HPP_

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repjudge/features.hpp"
#include "repjudge/rules.hpp"
#include "repjudge/thresholds.hpp"

namespace repjudge {

enum class RepLabel { kValid, kInvalid };

std::string_view to_string(RepLabel label);

struct RepRecord {
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  RepLabel label = RepLabel::kValid;
  std::vector<std::string> failed_requirements;
  std::vector<std::string> triggered_no_reps;

  friend bool operator==(const RepRecord&, const RepRecord&) = default;
};

inline constexpr std::string_view kIncompleteRep = "incomplete_rep";

struct ValidatorDiagnostics {
  std::int64_t frames = 0;
  // Frames where at least one constraint could not be decided because a
  // feature was unavailable.
  std::int64_t unavailable_feature_frames = 0;
  std::int64_t dropped_short_reps = 0;

  friend bool operator==(const ValidatorDiagnostics&, const ValidatorDiagnostics&) = default;
};

// Streaming rep state machine.
//
// IDLE -> ACTIVE once every rep_start constraint holds for `start_debounce`
// consecutive frames; t_start is the first frame of that window. While the
// athlete stays in the start pose the window keeps sliding, so t_start ends
// up at the last start-pose window before the movement. The rep is "under
// way" from the first frame where the start predicate fails; only then is
// end detection armed. ACTIVE -> IDLE once every rep_end constraint holds for
// `end_debounce` consecutive frames, emitting a record whose t_end is the
// first frame of the end window. Reps shorter than `min_rep_frames` are
// dropped.
//
// Requirements are satisfied once seen true on any frame of the rep; no-rep
// conditions trigger once seen true on any frame. Undecidable comparisons
// (unavailable features) never satisfy a requirement and never trigger a
// no-rep.
class RepValidator {
 public:
  enum class Phase { kIdle, kActive };

  // `rules` must already be reduced to the schema (see apply_schema).
  // Throws kConfiguration when rep_start or rep_end is empty or the
  // thresholds are invalid.
  RepValidator(MovementRuleSet rules, ThresholdConfig thresholds);

  // Frame indices must increase between calls.
  std::optional<RepRecord> step(std::int64_t frame_index, const KinematicFeatures& features);

  // Closes a rep that is under way as INVALID with `incomplete_rep`.
  std::optional<RepRecord> finalize(std::int64_t last_frame);

  Phase phase() const { return phase_; }
  std::optional<std::int64_t> t_start() const { return t_start_; }
  bool departed() const { return departed_; }
  const ValidatorDiagnostics& diagnostics() const { return diagnostics_; }
  const MovementRuleSet& rules() const { return rules_; }
  const ThresholdConfig& thresholds() const { return thresholds_; }

 private:
  struct Ledger {
    std::vector<bool> satisfied;  // per requirement
    std::vector<bool> triggered;  // per no-rep condition

    void merge(const Ledger& other);
  };
  struct FrameEval {
    std::int64_t frame = 0;
    bool start = false;
    bool end = false;
    Ledger ledger;
  };

  FrameEval evaluate(std::int64_t frame_index, const KinematicFeatures& features);
  bool group_holds(RuleGroup group, const KinematicFeatures& features, bool& unknown) const;
  RepRecord make_record(std::int64_t t_end, const Ledger& ledger) const;
  void reset_to_idle();

  MovementRuleSet rules_;
  ThresholdConfig thresholds_;
  Phase phase_ = Phase::kIdle;
  std::optional<std::int64_t> t_start_;
  std::optional<std::int64_t> last_t_end_;
  std::optional<std::int64_t> last_frame_;
  bool departed_ = false;
  std::deque<FrameEval> start_run_;  // current run of start-pose frames
  std::deque<FrameEval> end_run_;    // current run of end-pose frames
  Ledger ledger_;
  ValidatorDiagnostics diagnostics_;
};

}  // namespace repjudge

#endif  // REPJUDGE_VALIDATOR_HPP_
