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


#include <gtest/gtest.h>

#include <random>
#include <string>

#include "oracles.hpp"
#include "repjudge/condition.hpp"
#include "repjudge/error.hpp"

namespace repjudge {
namespace {

KinematicFeatures squat_features(double knee, double hip_y, double knee_y) {
  KinematicFeatures f;
  f.set("Angle(left_hip,left_knee,left_ankle)", FeatureKind::kAngle, knee);
  f.set("Y(left_hip)", FeatureKind::kPosition, hip_y);
  f.set("Y(left_knee)", FeatureKind::kPosition, knee_y);
  return f;
}

std::size_t grammar_position(const std::string& text) {
  try {
    parse_condition(text);
  } catch (const GrammarError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kGrammar);
    return e.position();
  }
  ADD_FAILURE() << "no grammar error for: " << text;
  return std::string::npos;
}

TEST(ParseCondition, ApproxAngleWithDegrees) {
  const ConditionExpr e = parse_condition("Angle(left_hip,left_knee,left_ankle) ~= 180 deg");
  ASSERT_EQ(e.kind, ConditionExpr::Kind::kCompare);
  EXPECT_EQ(e.op, Comparator::kApproxEq);
  EXPECT_EQ(e.lhs.kind, PrimitiveKind::kAngle);
  EXPECT_EQ(e.lhs.joints, (std::vector<std::string>{"left_hip", "left_knee", "left_ankle"}));
  EXPECT_EQ(std::get<Literal>(e.rhs), (Literal{180.0, Unit::kDegrees}));
}

TEST(ParseCondition, SymmetricAndOfTwoApprox) {
  const ConditionExpr e = parse_condition(
      "X(left_shoulder) ~= X(left_hip) and X(right_shoulder) ~= X(right_hip)");
  ASSERT_EQ(e.kind, ConditionExpr::Kind::kAnd);
  ASSERT_EQ(e.operands.size(), 2u);
  for (const auto& c : e.operands) {
    EXPECT_EQ(c.kind, ConditionExpr::Kind::kCompare);
    EXPECT_EQ(c.op, Comparator::kApproxEq);
    EXPECT_TRUE(std::holds_alternative<Primitive>(c.rhs));
  }
}

TEST(ParseCondition, LessThanOverY) {
  const ConditionExpr e = parse_condition("Y(left_hip) < Y(left_knee)");
  const ConditionExpr want = ConditionExpr::compare(
      {PrimitiveKind::kY, {"left_hip"}}, Comparator::kLess,
      Primitive{PrimitiveKind::kY, {"left_knee"}});
  EXPECT_EQ(e, want);
}

TEST(ParseCondition, AndBindsTighterThanOr) {
  const ConditionExpr e = parse_condition("X(a) < 1 or X(b) < 1 and X(c) < 1");
  ASSERT_EQ(e.kind, ConditionExpr::Kind::kOr);
  ASSERT_EQ(e.operands.size(), 2u);
  EXPECT_EQ(e.operands[1].kind, ConditionExpr::Kind::kAnd);
  const ConditionExpr g = parse_condition("(X(a) < 1 or X(b) < 1) and X(c) < 1");
  EXPECT_EQ(g.kind, ConditionExpr::Kind::kAnd);
  EXPECT_EQ(print_condition(g), "(X(a) < 1 or X(b) < 1) and X(c) < 1");
}

TEST(ParseCondition, AllComparators) {
  EXPECT_EQ(parse_condition("X(a) <= 0.5").op, Comparator::kLessEqual);
  EXPECT_EQ(parse_condition("X(a)>=0.5").op, Comparator::kGreaterEqual);
  EXPECT_EQ(parse_condition("X(a) > -0.5").op, Comparator::kGreater);
  EXPECT_EQ(std::get<Literal>(parse_condition("X(a) > -0.5").rhs).value, -0.5);
}

TEST(ParseCondition, GrammarErrorPositions) {
  EXPECT_EQ(grammar_position("Angle(a,b)"), 0u);
  EXPECT_EQ(grammar_position("Foo(a) < 1"), 0u);
  EXPECT_EQ(grammar_position("X(a) == X(b)"), 5u);
  EXPECT_EQ(grammar_position("(X(a) < 1"), 9u);
  EXPECT_EQ(grammar_position("X(Left) < 1"), 2u);
  EXPECT_EQ(grammar_position("X(a) < 1 and"), 12u);
  EXPECT_EQ(grammar_position("X(a < 1"), 4u);
  EXPECT_EQ(grammar_position(""), 0u);
  EXPECT_EQ(grammar_position("X(a) < 1 )"), 9u);
}

TEST(ParseCondition, RoundTripGenerated) {
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 1000; ++i) {
    const std::string text = testing::random_condition(rng);
    SCOPED_TRACE(text);
    const ConditionExpr first = parse_condition(text);
    const std::string printed = print_condition(first);
    const ConditionExpr second = parse_condition(printed);
    EXPECT_EQ(first, second);
    EXPECT_EQ(print_condition(second), printed);
  }
}

TEST(ParseCondition, ReferencedJointsInOrder) {
  const ConditionExpr e =
      parse_condition("Angle(a,b,c) < 90 deg and Y(b) > Y(d) or Angle(a,b,c) > 10 deg");
  EXPECT_EQ(referenced_joints(e), (std::vector<std::string>{"a", "b", "c", "d"}));
  EXPECT_EQ(referenced_primitives(e).size(), 3u);
  EXPECT_TRUE(units_consistent(e));
  EXPECT_FALSE(units_consistent(parse_condition("Angle(a,b,c) < X(d)")));
  EXPECT_FALSE(units_consistent(parse_condition("X(d) < 3 deg")));
}

TEST(EvaluateCondition, ApproxWithinAngleTolerance) {
  const ThresholdConfig t;  // 5 degrees
  const auto e = parse_condition("Angle(left_hip,left_knee,left_ankle) ~= 180 deg");
  EXPECT_TRUE(evaluate_condition(e, squat_features(178, 0, 0), t));
  EXPECT_TRUE(evaluate_condition(e, squat_features(175, 0, 0), t));  // inclusive
  EXPECT_FALSE(evaluate_condition(e, squat_features(174.9, 0, 0), t));
  EXPECT_TRUE(evaluate_condition(e, squat_features(170, 0, 0), t, {YAxis::kDown, 10.0}));
}

TEST(EvaluateCondition, PositionToleranceFromConfig) {
  KinematicFeatures f;
  f.set("X(a)", FeatureKind::kPosition, 0.30);
  f.set("X(b)", FeatureKind::kPosition, 0.34);
  ThresholdConfig t;
  const auto e = parse_condition("X(a) ~= X(b)");
  EXPECT_TRUE(evaluate_condition(e, f, t));
  t.position_tolerance = 0.02;
  EXPECT_FALSE(evaluate_condition(e, f, t));
}

TEST(EvaluateCondition, YAxisConvention) {
  // Image coordinates: hip at 0.62 of the box height, knee at 0.55, so the
  // hip is lower on screen than the knee.
  const auto e = parse_condition("Y(left_hip) < Y(left_knee)");
  const auto f = squat_features(90, 0.62, 0.55);
  const ThresholdConfig t;
  EXPECT_FALSE(evaluate_condition(e, f, t, {YAxis::kDown, {}}));
  EXPECT_TRUE(evaluate_condition(e, f, t, {YAxis::kUp, {}}));
  // Literals are read in the author's convention too.
  const auto lit = parse_condition("Y(left_hip) < 0.5");
  EXPECT_TRUE(evaluate_condition(lit, f, t, {YAxis::kUp, {}}));
  EXPECT_FALSE(evaluate_condition(lit, f, t, {YAxis::kDown, {}}));
}

TEST(EvaluateCondition, BooleanConnectives) {
  const ThresholdConfig t;
  const auto f = squat_features(178, 0.62, 0.55);
  EXPECT_FALSE(evaluate_condition(
      parse_condition("Angle(left_hip,left_knee,left_ankle) > 170 deg and Y(left_hip) < 0.1"),
      f, t));
  EXPECT_TRUE(evaluate_condition(
      parse_condition("Angle(left_hip,left_knee,left_ankle) > 170 deg or Y(left_hip) < 0.1"), f,
      t));
}

TEST(EvaluateCondition, MissingFeatureNamesJoint) {
  KinematicFeatures f;
  f.set_unavailable("Y(left_hip)", FeatureKind::kPosition, "left_hip");
  f.set("Y(left_knee)", FeatureKind::kPosition, 0.5);
  try {
    evaluate_condition(parse_condition("Y(left_hip) < Y(left_knee)"), f, ThresholdConfig{});
    FAIL();
  } catch (const MissingKeypointError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingKeypoint);
    EXPECT_EQ(e.joint(), "left_hip");
  }
  try {
    evaluate_condition(parse_condition("Y(nose) < 1"), f, ThresholdConfig{});
    FAIL();
  } catch (const MissingKeypointError& e) {
    EXPECT_EQ(e.joint(), "nose");
  }
}

TEST(EvaluateCondition, UnitMismatchIsEvaluationError) {
  const auto f = squat_features(178, 0.62, 0.55);
  try {
    evaluate_condition(parse_condition("Angle(left_hip,left_knee,left_ankle) < Y(left_hip)"), f,
                       ThresholdConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEvaluation);
  }
  EXPECT_THROW(evaluate_condition(parse_condition("Y(left_hip) < 3 deg"), f, ThresholdConfig{}),
               Error);
}

TEST(EvaluateCondition, KleeneUnknowns) {
  KinematicFeatures f;
  f.set("X(a)", FeatureKind::kPosition, 0.2);
  f.set_unavailable("X(b)", FeatureKind::kPosition, "b");
  const ThresholdConfig t;
  auto v = [&](const char* s) { return try_evaluate_condition(parse_condition(s), f, t); };
  EXPECT_EQ(v("X(a) > 0.5 and X(b) < 1").value, std::optional<bool>(false));
  EXPECT_EQ(v("X(a) < 0.5 or X(b) < 1").value, std::optional<bool>(true));
  const EvalOutcome unknown = v("X(a) < 0.5 and X(b) < 1");
  EXPECT_FALSE(unknown.value.has_value());
  EXPECT_EQ(unknown.missing_joint, "b");
  EXPECT_FALSE(v("X(a) > 0.5 or X(b) < 1").value.has_value());
}

TEST(EvaluateCondition, ToleranceMonotone) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(0, 180), pos(0, 1), tol(0, 30);
  const auto ea = parse_condition("Angle(a,b,c) ~= Angle(d,e,f)");
  const auto ep = parse_condition("Y(a) ~= 0.5");
  for (int i = 0; i < 2000; ++i) {
    KinematicFeatures f;
    f.set("Angle(a,b,c)", FeatureKind::kAngle, ang(rng));
    f.set("Angle(d,e,f)", FeatureKind::kAngle, ang(rng));
    f.set("Y(a)", FeatureKind::kPosition, pos(rng));
    const double t1 = tol(rng), t2 = t1 + tol(rng);
    ThresholdConfig c1, c2;
    c1.angle_tolerance = t1;
    c2.angle_tolerance = t2;
    c1.position_tolerance = t1 / 30;
    c2.position_tolerance = t2 / 30;
    for (const auto* e : {&ea, &ep}) {
      if (evaluate_condition(*e, f, c1)) EXPECT_TRUE(evaluate_condition(*e, f, c2));
    }
  }
}

TEST(EvaluateCondition, BooleanLawsAndPurity) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> pos(0, 1);
  const ThresholdConfig t;
  for (int i = 0; i < 500; ++i) {
    KinematicFeatures f;
    for (const char* k : {"X(a)", "X(b)", "Y(a)", "Y(b)"}) f.set(k, FeatureKind::kPosition, pos(rng));
    const std::string sa = std::string("X(a) ") + (i % 2 ? "<" : "~=") + " " +
                           std::to_string(pos(rng));
    const std::string sb = "Y(a) >= Y(b)";
    const ConditionExpr a = parse_condition(sa), b = parse_condition(sb);
    const bool va = evaluate_condition(a, f, t), vb = evaluate_condition(b, f, t);
    EXPECT_EQ(evaluate_condition(a, f, t), va);  // pure
    EXPECT_EQ(evaluate_condition(ConditionExpr::all_of({a, b}), f, t), va && vb);
    EXPECT_EQ(evaluate_condition(ConditionExpr::all_of({b, a}), f, t), va && vb);
    EXPECT_EQ(evaluate_condition(ConditionExpr::any_of({a, b}), f, t), va || vb);
    EXPECT_EQ(evaluate_condition(ConditionExpr::any_of({b, a}), f, t), va || vb);
    EXPECT_EQ(evaluate_condition(ConditionExpr::all_of({a, a}), f, t), va);
    EXPECT_EQ(evaluate_condition(ConditionExpr::any_of({a, a}), f, t), va);
  }
}

}  // namespace
}  // namespace repjudge
