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

// Condition expressions over pose primitives.
//
// Grammar (whitespace-insensitive):
//
//   expr      := conj ( "or" conj )*
//   conj      := term ( "and" term )*
//   term      := primitive cmp operand | "(" expr ")"
//   operand   := primitive | number [ "deg" ]
//   primitive := "Angle(" id "," id "," id ")" | "X(" id ")" | "Y(" id ")"
//   cmp       := "~=" | "<" | ">" | "<=" | ">="
//   id        := [a-z_0-9]+
//
// "and" binds tighter than "or". Chains of the same connective parse into a
// single n-ary node so that printing and re-parsing reproduces the tree.

#ifndef REPJUDGE_CONDITION_HPP_
#define REPJUDGE_CONDITION_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "repjudge/features.hpp"
#include "repjudge/thresholds.hpp"

namespace repjudge {

enum class PrimitiveKind { kAngle, kX, kY };

struct Primitive {
  PrimitiveKind kind = PrimitiveKind::kX;
  std::vector<std::string> joints;  // 3 for Angle, 1 for X/Y

  // Canonical text, also the feature key: "Angle(a,b,c)", "X(j)", "Y(j)".
  std::string key() const;
  FeatureKind feature_kind() const;

  friend bool operator==(const Primitive&, const Primitive&) = default;
};

enum class Unit { kNone, kDegrees };

struct Literal {
  double value = 0.0;
  Unit unit = Unit::kNone;

  friend bool operator==(const Literal&, const Literal&) = default;
};

using Operand = std::variant<Primitive, Literal>;

enum class Comparator { kApproxEq, kLess, kGreater, kLessEqual, kGreaterEqual };

std::string_view to_string(Comparator op);

struct ConditionExpr {
  enum class Kind { kCompare, kAnd, kOr };

  Kind kind = Kind::kCompare;
  // kCompare
  Primitive lhs;
  Comparator op = Comparator::kApproxEq;
  Operand rhs;
  // kAnd / kOr
  std::vector<ConditionExpr> operands;

  static ConditionExpr compare(Primitive lhs, Comparator op, Operand rhs);
  static ConditionExpr all_of(std::vector<ConditionExpr> operands);
  static ConditionExpr any_of(std::vector<ConditionExpr> operands);

  friend bool operator==(const ConditionExpr&, const ConditionExpr&) = default;
};

// Throws GrammarError with the 0-based character position of the problem.
ConditionExpr parse_condition(std::string_view text);

// Canonical text; parse_condition(print_condition(e)) == e for every tree
// produced by parse_condition.
std::string print_condition(const ConditionExpr& expr);

// Every primitive / joint mentioned, in first-appearance order, no repeats.
std::vector<Primitive> referenced_primitives(const ConditionExpr& expr);
std::vector<std::string> referenced_joints(const ConditionExpr& expr);

// False when some comparison mixes an angle with a position (or a degree
// literal with a position); such trees fail at evaluation time.
bool units_consistent(const ConditionExpr& expr);

// Which way the rule author's Y axis points. Features are always stored in
// image convention (down); with kUp every Y value v is read as 1 - v, i.e.
// height above the bottom of the person box, which is the same as flipping
// the comparator for Y-versus-Y comparisons.
enum class YAxis { kDown, kUp };

struct EvalOptions {
  YAxis y_axis = YAxis::kDown;
  // Replaces the unit-class tolerance for ~= (per-constraint override).
  std::optional<double> tolerance;
};

// Strict evaluation: throws MissingKeypointError when a referenced feature is
// absent or unavailable, and kEvaluation on a unit mismatch between sides.
bool evaluate_condition(const ConditionExpr& expr, const KinematicFeatures& features,
                        const ThresholdConfig& thresholds,
                        const EvalOptions& options = {});

// Three-valued evaluation for streaming use: unavailable features make the
// affected comparison unknown and the connectives follow Kleene logic
// (false AND unknown = false, true OR unknown = true). Unit mismatches still
// throw.
struct EvalOutcome {
  std::optional<bool> value;
  std::string missing_joint;  // first joint that made the result unknown
};

EvalOutcome try_evaluate_condition(const ConditionExpr& expr,
                                   const KinematicFeatures& features,
                                   const ThresholdConfig& thresholds,
                                   const EvalOptions& options = {});

}  // namespace repjudge

#endif  // REPJUDGE_CONDITION_HPP_
