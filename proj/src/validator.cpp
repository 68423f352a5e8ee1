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

#include "repjudge/validator.hpp"

#include <algorithm>
#include <utility>

#include "repjudge/error.hpp"

namespace repjudge {

std::string_view to_string(RepLabel label) {
  return label == RepLabel::kValid ? "valid" : "invalid";
}

void RepValidator::Ledger::merge(const Ledger& other) {
  for (std::size_t i = 0; i < satisfied.size(); ++i) {
    satisfied[i] = satisfied[i] || other.satisfied[i];
  }
  for (std::size_t i = 0; i < triggered.size(); ++i) {
    triggered[i] = triggered[i] || other.triggered[i];
  }
}

RepValidator::RepValidator(MovementRuleSet rules, ThresholdConfig thresholds)
    : rules_(std::move(rules)), thresholds_(std::move(thresholds)) {
  thresholds_.validate();
  if (rules_.rep_start.empty() || rules_.rep_end.empty()) {
    throw Error(ErrorKind::kConfiguration,
                "rule set '" + rules_.movement_name +
                    "' has no usable rep_start or rep_end constraint");
  }
  reset_to_idle();
}

void RepValidator::reset_to_idle() {
  phase_ = Phase::kIdle;
  t_start_.reset();
  departed_ = false;
  end_run_.clear();
  ledger_.satisfied.assign(rules_.rep_requirements.size(), false);
  ledger_.triggered.assign(rules_.no_rep_conditions.size(), false);
}

bool RepValidator::group_holds(RuleGroup group, const KinematicFeatures& features,
                               bool& unknown) const {
  bool all = true;
  for (const NamedConstraint& c : rules_.group(group)) {
    const EvalOptions options{rules_.y_axis, constraint_tolerance(c, thresholds_)};
    const EvalOutcome r = try_evaluate_condition(c.condition, features, thresholds_, options);
    if (!r.value) unknown = true;
    if (r.value != true) all = false;
  }
  return all;
}

RepValidator::FrameEval RepValidator::evaluate(std::int64_t frame_index,
                                               const KinematicFeatures& features) {
  FrameEval e;
  e.frame = frame_index;
  bool unknown = false;
  e.start = group_holds(RuleGroup::kRepStart, features, unknown);
  e.end = group_holds(RuleGroup::kRepEnd, features, unknown);
  auto flags = [&](const std::vector<NamedConstraint>& group) {
    std::vector<bool> out;
    out.reserve(group.size());
    for (const NamedConstraint& c : group) {
      const EvalOptions options{rules_.y_axis, constraint_tolerance(c, thresholds_)};
      const EvalOutcome r = try_evaluate_condition(c.condition, features, thresholds_, options);
      if (!r.value) unknown = true;
      out.push_back(r.value == true);
    }
    return out;
  };
  e.ledger.satisfied = flags(rules_.rep_requirements);
  e.ledger.triggered = flags(rules_.no_rep_conditions);
  if (unknown) ++diagnostics_.unavailable_feature_frames;
  return e;
}

RepRecord RepValidator::make_record(std::int64_t t_end, const Ledger& ledger) const {
  RepRecord r;
  r.t_start = *t_start_;
  r.t_end = t_end;
  for (std::size_t i = 0; i < ledger.satisfied.size(); ++i) {
    if (!ledger.satisfied[i]) r.failed_requirements.push_back(rules_.rep_requirements[i].semantic_key);
  }
  for (std::size_t i = 0; i < ledger.triggered.size(); ++i) {
    if (ledger.triggered[i]) r.triggered_no_reps.push_back(rules_.no_rep_conditions[i].semantic_key);
  }
  r.label = r.failed_requirements.empty() && r.triggered_no_reps.empty() ? RepLabel::kValid
                                                                         : RepLabel::kInvalid;
  return r;
}

std::optional<RepRecord> RepValidator::step(std::int64_t frame_index,
                                            const KinematicFeatures& features) {
  if (last_frame_ && frame_index <= *last_frame_) {
    throw Error(ErrorKind::kDomain, "validator frames must arrive in increasing order");
  }
  last_frame_ = frame_index;
  ++diagnostics_.frames;
  FrameEval e = evaluate(frame_index, features);

  const auto start_window = static_cast<std::size_t>(thresholds_.start_debounce);
  if (e.start) {
    start_run_.push_back(e);
    while (start_run_.size() > start_window) start_run_.pop_front();
  } else {
    start_run_.clear();
  }

  auto ledger_of_start_window = [&] {
    Ledger l = ledger_;
    l.satisfied.assign(l.satisfied.size(), false);
    l.triggered.assign(l.triggered.size(), false);
    for (const FrameEval& f : start_run_) l.merge(f.ledger);
    return l;
  };

  if (phase_ == Phase::kIdle) {
    if (start_run_.size() >= start_window) {
      phase_ = Phase::kActive;
      departed_ = false;
      t_start_ = start_run_.front().frame;
      ledger_ = ledger_of_start_window();
    }
    return std::nullopt;
  }

  if (!departed_) {
    if (e.start) {
      t_start_ = start_run_.front().frame;
      ledger_ = ledger_of_start_window();
      return std::nullopt;
    }
    departed_ = true;
  }

  if (e.end) {
    end_run_.push_back(std::move(e));
  } else {
    for (const FrameEval& f : end_run_) ledger_.merge(f.ledger);
    end_run_.clear();
    ledger_.merge(e.ledger);
  }
  if (end_run_.size() < static_cast<std::size_t>(thresholds_.end_debounce)) {
    return std::nullopt;
  }

  const std::int64_t t_end = end_run_.front().frame;
  Ledger final_ledger = ledger_;
  if (thresholds_.end_window_counts) {
    for (const FrameEval& f : end_run_) final_ledger.merge(f.ledger);
  }
  RepRecord record = make_record(t_end, final_ledger);
  last_t_end_ = t_end;
  reset_to_idle();
  // The next rep cannot start inside the one just closed.
  while (!start_run_.empty() && start_run_.front().frame <= t_end) start_run_.pop_front();
  if (record.t_end - record.t_start + 1 < thresholds_.min_rep_frames) {
    ++diagnostics_.dropped_short_reps;
    return std::nullopt;
  }
  return record;
}

std::optional<RepRecord> RepValidator::finalize(std::int64_t last_frame) {
  std::optional<RepRecord> out;
  if (phase_ == Phase::kActive && departed_) {
    for (const FrameEval& f : end_run_) ledger_.merge(f.ledger);
    RepRecord r = make_record(std::max(last_frame, *t_start_), ledger_);
    r.triggered_no_reps.emplace_back(kIncompleteRep);
    r.label = RepLabel::kInvalid;
    out = std::move(r);
  }
  reset_to_idle();
  start_run_.clear();
  return out;
}

}  // namespace repjudge
