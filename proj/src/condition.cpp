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

#include "repjudge/condition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <utility>

#include "repjudge/error.hpp"

namespace repjudge {

std::string Primitive::key() const {
  std::string out;
  switch (kind) {
    case PrimitiveKind::kAngle: out = "Angle("; break;
    case PrimitiveKind::kX: out = "X("; break;
    case PrimitiveKind::kY: out = "Y("; break;
  }
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (i > 0) out += ',';
    out += joints[i];
  }
  out += ')';
  return out;
}

FeatureKind Primitive::feature_kind() const {
  return kind == PrimitiveKind::kAngle ? FeatureKind::kAngle : FeatureKind::kPosition;
}

std::string_view to_string(Comparator op) {
  switch (op) {
    case Comparator::kApproxEq: return "~=";
    case Comparator::kLess: return "<";
    case Comparator::kGreater: return ">";
    case Comparator::kLessEqual: return "<=";
    case Comparator::kGreaterEqual: return ">=";
  }
  return "?";
}

ConditionExpr ConditionExpr::compare(Primitive lhs, Comparator op, Operand rhs) {
  ConditionExpr e;
  e.kind = Kind::kCompare;
  e.lhs = std::move(lhs);
  e.op = op;
  e.rhs = std::move(rhs);
  return e;
}

ConditionExpr ConditionExpr::all_of(std::vector<ConditionExpr> operands) {
  ConditionExpr e;
  e.kind = Kind::kAnd;
  e.operands = std::move(operands);
  return e;
}

ConditionExpr ConditionExpr::any_of(std::vector<ConditionExpr> operands) {
  ConditionExpr e;
  e.kind = Kind::kOr;
  e.operands = std::move(operands);
  return e;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

bool is_id_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ConditionExpr parse() {
    skip_ws();
    if (at_end()) fail("empty condition");
    ConditionExpr e = parse_or();
    skip_ws();
    if (!at_end()) {
      if (peek() == ')') fail("unbalanced parentheses: unexpected ')'");
      fail("unexpected trailing input");
    }
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw GrammarError(message, pos_);
  }
  [[noreturn]] void fail_at(const std::string& message, std::size_t pos) const {
    throw GrammarError(message, pos);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  void skip_ws() {
    while (!at_end() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                         text_[pos_] == '\n' || text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  // Matches a connective keyword as a whole word.
  bool accept_keyword(std::string_view word) {
    skip_ws();
    if (text_.substr(pos_, word.size()) != word) return false;
    const char after = peek(word.size());
    if (is_id_char(after) || is_alpha(after)) return false;
    pos_ += word.size();
    return true;
  }

  void expect(char c, const char* what) {
    skip_ws();
    if (peek() != c) {
      if (c == ')') fail(std::string("unbalanced parentheses: expected ')' ") + what);
      fail(std::string("expected '") + c + "' " + what);
    }
    ++pos_;
  }

  ConditionExpr parse_or() {
    std::vector<ConditionExpr> terms;
    terms.push_back(parse_and());
    while (accept_keyword("or")) terms.push_back(parse_and());
    if (terms.size() == 1) return std::move(terms.front());
    return ConditionExpr::any_of(std::move(terms));
  }

  ConditionExpr parse_and() {
    std::vector<ConditionExpr> terms;
    terms.push_back(parse_term());
    while (accept_keyword("and")) terms.push_back(parse_term());
    if (terms.size() == 1) return std::move(terms.front());
    return ConditionExpr::all_of(std::move(terms));
  }

  ConditionExpr parse_term() {
    skip_ws();
    if (peek() == '(') {
      ++pos_;
      ConditionExpr inner = parse_or();
      expect(')', "to close group");
      return inner;
    }
    if (at_end()) fail("expected a comparison");
    Primitive lhs = parse_primitive();
    Comparator op = parse_comparator();
    Operand rhs = parse_operand();
    return ConditionExpr::compare(std::move(lhs), op, std::move(rhs));
  }

  Primitive parse_primitive() {
    skip_ws();
    const std::size_t start = pos_;
    while (!at_end() && (is_alpha(peek()) || is_id_char(peek()))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name.empty()) fail_at("expected a primitive (Angle, X or Y)", start);
    Primitive p;
    std::size_t arity = 0;
    if (name == "Angle") {
      p.kind = PrimitiveKind::kAngle;
      arity = 3;
    } else if (name == "X") {
      p.kind = PrimitiveKind::kX;
      arity = 1;
    } else if (name == "Y") {
      p.kind = PrimitiveKind::kY;
      arity = 1;
    } else {
      fail_at("unknown primitive '" + std::string(name) + "'", start);
    }
    skip_ws();
    if (peek() != '(') fail("expected '(' after " + std::string(name));
    const std::size_t open = pos_++;
    while (true) {
      p.joints.push_back(parse_identifier());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == ')') {
        ++pos_;
        break;
      }
      if (at_end()) fail_at("unbalanced parentheses: '(' is never closed", open);
      fail("expected ',' or ')' in argument list");
    }
    if (p.joints.size() != arity) {
      fail_at(std::string(name) + " takes " + std::to_string(arity) +
                  " joint(s), got " + std::to_string(p.joints.size()),
              start);
    }
    return p;
  }

  std::string parse_identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (!at_end() && is_id_char(peek())) ++pos_;
    if (pos_ == start) {
      if (is_alpha(peek())) fail("joint names are lowercase [a-z_0-9]+");
      fail("expected a joint name");
    }
    if (is_alpha(peek())) fail("joint names are lowercase [a-z_0-9]+");
    return std::string(text_.substr(start, pos_ - start));
  }

  Comparator parse_comparator() {
    skip_ws();
    const char c0 = peek(), c1 = peek(1);
    if (c0 == '~' && c1 == '=') {
      pos_ += 2;
      return Comparator::kApproxEq;
    }
    if (c0 == '<' && c1 == '=') {
      pos_ += 2;
      return Comparator::kLessEqual;
    }
    if (c0 == '>' && c1 == '=') {
      pos_ += 2;
      return Comparator::kGreaterEqual;
    }
    if (c0 == '<') {
      ++pos_;
      return Comparator::kLess;
    }
    if (c0 == '>') {
      ++pos_;
      return Comparator::kGreater;
    }
    if (at_end()) fail("expected a comparator");
    std::size_t end = pos_;
    while (end < text_.size() && std::string_view("~=<>!").find(text_[end]) !=
                                     std::string_view::npos) {
      ++end;
    }
    const std::string token(text_.substr(pos_, std::max<std::size_t>(end - pos_, 1)));
    fail("unknown comparator '" + token + "'");
  }

  Operand parse_operand() {
    skip_ws();
    const char c = peek();
    if (c == '-' || c == '+' || c == '.' || (c >= '0' && c <= '9')) {
      return parse_number();
    }
    if (at_end()) fail("expected a primitive or number after comparator");
    return parse_primitive();
  }

  Literal parse_number() {
    const std::size_t start = pos_;
    std::size_t i = pos_;
    if (text_[i] == '+' || text_[i] == '-') ++i;
    const std::size_t digits_start = i;
    while (i < text_.size() && text_[i] >= '0' && text_[i] <= '9') ++i;
    if (i < text_.size() && text_[i] == '.') {
      ++i;
      while (i < text_.size() && text_[i] >= '0' && text_[i] <= '9') ++i;
    }
    if (i < text_.size() && (text_[i] == 'e' || text_[i] == 'E')) {
      std::size_t j = i + 1;
      if (j < text_.size() && (text_[j] == '+' || text_[j] == '-')) ++j;
      if (j < text_.size() && text_[j] >= '0' && text_[j] <= '9') {
        while (j < text_.size() && text_[j] >= '0' && text_[j] <= '9') ++j;
        i = j;
      }
    }
    // from_chars rejects a leading '+', so parse from after it.
    const std::size_t parse_from = text_[start] == '+' ? start + 1 : start;
    double value = 0.0;
    const char* first = text_.data() + parse_from;
    const char* last = text_.data() + i;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (i == digits_start || ec != std::errc() || ptr != last) {
      fail_at("malformed number", start);
    }
    pos_ = i;
    Literal lit{value, Unit::kNone};
    skip_ws();
    if (text_.substr(pos_, 3) == "deg" && !is_id_char(peek(3)) && !is_alpha(peek(3))) {
      pos_ += 3;
      lit.unit = Unit::kDegrees;
    }
    return lit;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void print_into(const ConditionExpr& e, std::string& out, bool parenthesize_or) {
  switch (e.kind) {
    case ConditionExpr::Kind::kCompare: {
      out += e.lhs.key();
      out += ' ';
      out += to_string(e.op);
      out += ' ';
      if (const auto* p = std::get_if<Primitive>(&e.rhs)) {
        out += p->key();
      } else {
        const Literal& lit = std::get<Literal>(e.rhs);
        out += format_number(lit.value);
        if (lit.unit == Unit::kDegrees) out += " deg";
      }
      return;
    }
    case ConditionExpr::Kind::kAnd:
    case ConditionExpr::Kind::kOr: {
      const bool is_or = e.kind == ConditionExpr::Kind::kOr;
      const bool wrap = is_or && parenthesize_or;
      if (wrap) out += '(';
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i > 0) out += is_or ? " or " : " and ";
        const ConditionExpr& child = e.operands[i];
        // Children of the same connective and children of "or" under "and"
        // need grouping to survive a re-parse.
        const bool nested_same = child.kind == e.kind;
        if (nested_same) out += '(';
        print_into(child, out, !is_or && !nested_same);
        if (nested_same) out += ')';
      }
      if (wrap) out += ')';
      return;
    }
  }
}

void collect_primitives(const ConditionExpr& e, std::vector<Primitive>& out) {
  auto add = [&out](const Primitive& p) {
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  };
  if (e.kind == ConditionExpr::Kind::kCompare) {
    add(e.lhs);
    if (const auto* p = std::get_if<Primitive>(&e.rhs)) add(*p);
    return;
  }
  for (const auto& child : e.operands) collect_primitives(child, out);
}

// ---------------------------------------------------------------------------
// Evaluation

enum class UnitClass { kAngle, kPosition, kAny };

UnitClass unit_class(const Primitive& p) {
  return p.kind == PrimitiveKind::kAngle ? UnitClass::kAngle : UnitClass::kPosition;
}

UnitClass unit_class(const Operand& operand) {
  if (const auto* p = std::get_if<Primitive>(&operand)) return unit_class(*p);
  return std::get<Literal>(operand).unit == Unit::kDegrees ? UnitClass::kAngle
                                                           : UnitClass::kAny;
}

// Kleene three-valued result of one node.
struct Tri {
  std::optional<bool> value;
  std::string missing_joint;
};

class Evaluator {
 public:
  Evaluator(const KinematicFeatures& features, const ThresholdConfig& thresholds,
            const EvalOptions& options)
      : features_(features), thresholds_(thresholds), options_(options) {}

  Tri eval(const ConditionExpr& e) const {
    switch (e.kind) {
      case ConditionExpr::Kind::kCompare: return compare(e);
      case ConditionExpr::Kind::kAnd: {
        Tri unknown;
        bool any_unknown = false;
        for (const auto& child : e.operands) {
          Tri r = eval(child);
          if (r.value.has_value() && !*r.value) return Tri{false, {}};
          if (!r.value.has_value() && !any_unknown) {
            any_unknown = true;
            unknown = std::move(r);
          }
        }
        return any_unknown ? unknown : Tri{true, {}};
      }
      case ConditionExpr::Kind::kOr: {
        Tri unknown;
        bool any_unknown = false;
        for (const auto& child : e.operands) {
          Tri r = eval(child);
          if (r.value.has_value() && *r.value) return Tri{true, {}};
          if (!r.value.has_value() && !any_unknown) {
            any_unknown = true;
            unknown = std::move(r);
          }
        }
        return any_unknown ? unknown : Tri{false, {}};
      }
    }
    return Tri{};
  }

 private:
  // Feature value under the author's axis convention, or the joint that made
  // it unavailable.
  std::optional<double> value_of(const Primitive& p, std::string& missing) const {
    const Feature* f = features_.find(p.key());
    if (f == nullptr || !f->available()) {
      if (f != nullptr && !f->missing_joint.empty()) {
        missing = f->missing_joint;
      } else {
        missing = p.joints.size() == 1 ? p.joints.front() : p.key();
      }
      return std::nullopt;
    }
    double v = *f->value;
    if (p.kind == PrimitiveKind::kY && options_.y_axis == YAxis::kUp) v = 1.0 - v;
    return v;
  }

  Tri compare(const ConditionExpr& e) const {
    const UnitClass left = unit_class(e.lhs);
    const UnitClass right = unit_class(e.rhs);
    if (right != UnitClass::kAny && right != left) {
      throw Error(ErrorKind::kEvaluation,
                  "unit mismatch in '" + print_condition(e) +
                      "': angles compare only with angles or degree literals");
    }
    std::string missing;
    const std::optional<double> a = value_of(e.lhs, missing);
    if (!a) return Tri{std::nullopt, missing};
    double b = 0.0;
    if (const auto* p = std::get_if<Primitive>(&e.rhs)) {
      const std::optional<double> rb = value_of(*p, missing);
      if (!rb) return Tri{std::nullopt, missing};
      b = *rb;
    } else {
      // Literals are authored in the rule's own convention; value_of has
      // already mapped the primitive side into it.
      b = std::get<Literal>(e.rhs).value;
    }
    switch (e.op) {
      case Comparator::kApproxEq: {
        const double tol = options_.tolerance.value_or(
            left == UnitClass::kAngle ? thresholds_.angle_tolerance
                                      : thresholds_.position_tolerance);
        return Tri{std::abs(*a - b) <= tol, {}};
      }
      case Comparator::kLess: return Tri{*a < b, {}};
      case Comparator::kGreater: return Tri{*a > b, {}};
      case Comparator::kLessEqual: return Tri{*a <= b, {}};
      case Comparator::kGreaterEqual: return Tri{*a >= b, {}};
    }
    return Tri{};
  }

  const KinematicFeatures& features_;
  const ThresholdConfig& thresholds_;
  const EvalOptions& options_;
};

}  // namespace

ConditionExpr parse_condition(std::string_view text) { return Parser(text).parse(); }

std::string print_condition(const ConditionExpr& expr) {
  std::string out;
  print_into(expr, out, false);
  return out;
}

std::vector<Primitive> referenced_primitives(const ConditionExpr& expr) {
  std::vector<Primitive> out;
  collect_primitives(expr, out);
  return out;
}

std::vector<std::string> referenced_joints(const ConditionExpr& expr) {
  std::vector<std::string> out;
  for (const Primitive& p : referenced_primitives(expr)) {
    for (const std::string& j : p.joints) {
      if (std::find(out.begin(), out.end(), j) == out.end()) out.push_back(j);
    }
  }
  return out;
}

bool units_consistent(const ConditionExpr& expr) {
  if (expr.kind != ConditionExpr::Kind::kCompare) {
    return std::all_of(expr.operands.begin(), expr.operands.end(),
                       [](const ConditionExpr& e) { return units_consistent(e); });
  }
  const UnitClass right = unit_class(expr.rhs);
  return right == UnitClass::kAny || right == unit_class(expr.lhs);
}

bool evaluate_condition(const ConditionExpr& expr, const KinematicFeatures& features,
                        const ThresholdConfig& thresholds, const EvalOptions& options) {
  for (const Primitive& p : referenced_primitives(expr)) {
    const Feature* f = features.find(p.key());
    if (f == nullptr || !f->available()) {
      if (f != nullptr && !f->missing_joint.empty()) {
        throw MissingKeypointError(f->missing_joint);
      }
      throw MissingKeypointError(p.joints.size() == 1 ? p.joints.front() : p.key());
    }
  }
  const Tri r = Evaluator(features, thresholds, options).eval(expr);
  return r.value.value_or(false);
}

EvalOutcome try_evaluate_condition(const ConditionExpr& expr,
                                   const KinematicFeatures& features,
                                   const ThresholdConfig& thresholds,
                                   const EvalOptions& options) {
  Tri r = Evaluator(features, thresholds, options).eval(expr);
  return EvalOutcome{r.value, std::move(r.missing_joint)};
}

}  // namespace repjudge
