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

#ifndef REPJUDGE_RULES_HPP_
#define REPJUDGE_RULES_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repjudge/condition.hpp"

namespace repjudge {

struct NamedConstraint {
  std::string semantic_key;            // e.g. "hip_knee_extension"
  std::vector<std::string> keypoints;  // covers every joint in `condition`
  ConditionExpr condition;
  std::optional<double> tolerance;     // per-constraint ~= tolerance

  friend bool operator==(const NamedConstraint&, const NamedConstraint&) = default;
};

enum class RuleGroup { kRepStart, kRepEnd, kRequirements, kNoRep };

std::string_view to_string(RuleGroup group);

// Structured movement standard. Immutable after parsing; safe to share.
struct MovementRuleSet {
  std::string movement_name;
  YAxis y_axis = YAxis::kUp;
  std::vector<NamedConstraint> rep_start;
  std::vector<NamedConstraint> rep_end;
  std::vector<NamedConstraint> rep_requirements;
  std::vector<NamedConstraint> no_rep_conditions;
  // Free-text no-rep conditions outside the grammar; carried, not evaluated.
  std::vector<std::string> inert_annotations;

  const std::vector<NamedConstraint>& group(RuleGroup g) const;
  std::vector<NamedConstraint>& group(RuleGroup g);

  // Throws kSchema on a broken invariant.
  void validate() const;

  friend bool operator==(const MovementRuleSet&, const MovementRuleSet&) = default;
};

// Accepts the rule-document shape
//
//   {"movement": "Air Squat", "y_axis": "up",
//    "response": {"rep_start": G, "rep_end": G,
//                 "rep_requirements": G, "no_rep_conditions": G}}
//
// where the "response" wrapper is optional and each group G is either an
// object {semantic_key: {"keypoints": [...], "condition": "...",
// "tolerance": t}} or an array whose items are such single-key objects,
// objects with an explicit "semantic_key", or bare condition strings.
//
// Errors: ParseError (malformed JSON, with byte offset), kSchema (missing
// rep_start/rep_end, empty groups, duplicate keys, keypoints not covering the
// condition), GrammarError naming the semantic key.
MovementRuleSet parse_rule_set(std::string_view document);
MovementRuleSet load_rule_set(const std::filesystem::path& path);

std::string rule_set_to_json(const MovementRuleSet& rules);

// Effective tolerance for a constraint's ~= comparisons, or nullopt to use
// the unit-class default: a ThresholdConfig override wins over the
// constraint's own `tolerance` field.
std::optional<double> constraint_tolerance(const NamedConstraint& constraint,
                                           const ThresholdConfig& thresholds);

}  // namespace repjudge

#endif  // REPJUDGE_RULES_HPP_
