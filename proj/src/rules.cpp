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

#include "repjudge/rules.hpp"

#include <algorithm>
#include <set>

#include "json_util.hpp"

namespace repjudge {

using detail::OrderedJson;

std::string_view to_string(RuleGroup group) {
  switch (group) {
    case RuleGroup::kRepStart: return "rep_start";
    case RuleGroup::kRepEnd: return "rep_end";
    case RuleGroup::kRequirements: return "rep_requirements";
    case RuleGroup::kNoRep: return "no_rep_conditions";
  }
  return "?";
}

const std::vector<NamedConstraint>& MovementRuleSet::group(RuleGroup g) const {
  switch (g) {
    case RuleGroup::kRepStart: return rep_start;
    case RuleGroup::kRepEnd: return rep_end;
    case RuleGroup::kRequirements: return rep_requirements;
    case RuleGroup::kNoRep: return no_rep_conditions;
  }
  return rep_start;
}

std::vector<NamedConstraint>& MovementRuleSet::group(RuleGroup g) {
  return const_cast<std::vector<NamedConstraint>&>(
      static_cast<const MovementRuleSet&>(*this).group(g));
}

void MovementRuleSet::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kSchema, what); };
  if (movement_name.empty()) fail("movement name is empty");
  if (rep_start.empty()) fail("group 'rep_start' has no constraints");
  if (rep_end.empty()) fail("group 'rep_end' has no constraints");
  for (RuleGroup g : {RuleGroup::kRepStart, RuleGroup::kRepEnd,
                      RuleGroup::kRequirements, RuleGroup::kNoRep}) {
    std::set<std::string> seen;
    for (const NamedConstraint& c : group(g)) {
      const std::string where = std::string(to_string(g)) + "." + c.semantic_key;
      if (c.semantic_key.empty()) fail(std::string(to_string(g)) + ": empty semantic key");
      if (!seen.insert(c.semantic_key).second) {
        fail("duplicate semantic key '" + c.semantic_key + "' in " +
             std::string(to_string(g)));
      }
      for (const std::string& joint : referenced_joints(c.condition)) {
        if (std::find(c.keypoints.begin(), c.keypoints.end(), joint) == c.keypoints.end()) {
          fail(where + ": condition uses '" + joint + "' which is not listed in keypoints");
        }
      }
      if (c.tolerance && !(*c.tolerance >= 0.0)) fail(where + ": tolerance must be >= 0");
    }
  }
}

std::optional<double> constraint_tolerance(const NamedConstraint& constraint,
                                           const ThresholdConfig& thresholds) {
  auto it = thresholds.overrides.find(constraint.semantic_key);
  if (it != thresholds.overrides.end()) return it->second;
  return constraint.tolerance;
}

namespace {

ConditionExpr parse_keyed_condition(const std::string& text, const std::string& key) {
  try {
    return parse_condition(text);
  } catch (const GrammarError& e) {
    std::string message = e.what();
    // Strip the generic prefix; GrammarError re-adds it with the key.
    const std::string prefix = std::string(to_string(ErrorKind::kGrammar)) + ": ";
    if (message.rfind(prefix, 0) == 0) message.erase(0, prefix.size());
    const auto at = message.rfind(" (at position");
    if (at != std::string::npos) message.erase(at);
    throw GrammarError(message, e.position(), key);
  }
}

NamedConstraint constraint_from_object(const std::string& key, const OrderedJson& body,
                                       RuleGroup group) {
  const std::string ctx = std::string(to_string(group)) + "." + key;
  if (!body.is_object()) {
    throw Error(ErrorKind::kSchema, ctx + ": constraint must be an object");
  }
  NamedConstraint c;
  c.semantic_key = key;
  const auto text = detail::get_field<std::string>(body, "condition", ctx);
  c.condition = parse_keyed_condition(text, key);
  if (body.contains("keypoints")) {
    c.keypoints = detail::get_field<std::vector<std::string>>(body, "keypoints", ctx);
  } else {
    c.keypoints = referenced_joints(c.condition);
  }
  if (body.contains("tolerance")) {
    c.tolerance = detail::get_field<double>(body, "tolerance", ctx);
  }
  return c;
}

void parse_group(const OrderedJson& node, RuleGroup group, MovementRuleSet& out) {
  auto& target = out.group(group);
  const std::string name(to_string(group));
  if (node.is_object()) {
    for (const auto& [key, body] : node.items()) {
      target.push_back(constraint_from_object(key, body, group));
    }
    return;
  }
  if (!node.is_array()) {
    throw Error(ErrorKind::kSchema, "group '" + name + "' must be an object or array");
  }
  for (std::size_t i = 0; i < node.size(); ++i) {
    const OrderedJson& item = node[i];
    if (item.is_string()) {
      const std::string text = item.get<std::string>();
      if (group == RuleGroup::kNoRep) {
        // Free text is allowed here; only grammar-valid strings are active.
        try {
          NamedConstraint c;
          c.semantic_key = text;
          c.condition = parse_condition(text);
          c.keypoints = referenced_joints(c.condition);
          target.push_back(std::move(c));
        } catch (const GrammarError&) {
          out.inert_annotations.push_back(text);
        }
        continue;
      }
      NamedConstraint c;
      c.semantic_key = text;
      c.condition = parse_keyed_condition(text, name + "[" + std::to_string(i) + "]");
      c.keypoints = referenced_joints(c.condition);
      target.push_back(std::move(c));
      continue;
    }
    if (!item.is_object()) {
      throw Error(ErrorKind::kSchema,
                  name + "[" + std::to_string(i) + "] must be a string or object");
    }
    if (item.contains("semantic_key")) {
      const auto key = detail::get_field<std::string>(item, "semantic_key", name);
      target.push_back(constraint_from_object(key, item, group));
    } else if (item.size() == 1 && item.begin().value().is_object()) {
      target.push_back(constraint_from_object(item.begin().key(), item.begin().value(), group));
    } else {
      throw Error(ErrorKind::kSchema,
                  name + "[" + std::to_string(i) +
                      "] must be {key: {...}} or carry a 'semantic_key'");
    }
  }
}

}  // namespace

MovementRuleSet parse_rule_set(std::string_view document) {
  const OrderedJson doc =
      detail::parse_json<OrderedJson>(std::string(document), "rule set");
  if (!doc.is_object()) throw Error(ErrorKind::kSchema, "rule set must be a JSON object");

  MovementRuleSet rules;
  if (doc.contains("movement")) {
    rules.movement_name = detail::get_field<std::string>(doc, "movement", "rule set");
  } else if (doc.contains("movement_name")) {
    rules.movement_name = detail::get_field<std::string>(doc, "movement_name", "rule set");
  }
  const std::string axis = detail::get_field_or<std::string>(doc, "y_axis", "up", "rule set");
  if (axis == "up") {
    rules.y_axis = YAxis::kUp;
  } else if (axis == "down") {
    rules.y_axis = YAxis::kDown;
  } else {
    throw Error(ErrorKind::kSchema, "y_axis must be \"up\" or \"down\"");
  }

  const OrderedJson& body = doc.contains("response") ? doc.at("response") : doc;
  if (!body.is_object()) throw Error(ErrorKind::kSchema, "'response' must be an object");
  for (RuleGroup g : {RuleGroup::kRepStart, RuleGroup::kRepEnd}) {
    if (!body.contains(std::string(to_string(g)))) {
      throw Error(ErrorKind::kSchema,
                  "rule set is missing group '" + std::string(to_string(g)) + "'");
    }
  }
  for (RuleGroup g : {RuleGroup::kRepStart, RuleGroup::kRepEnd,
                      RuleGroup::kRequirements, RuleGroup::kNoRep}) {
    const std::string name(to_string(g));
    if (body.contains(name)) parse_group(body.at(name), g, rules);
  }
  rules.validate();
  return rules;
}

MovementRuleSet load_rule_set(const std::filesystem::path& path) {
  return parse_rule_set(detail::read_text_file(path));
}

std::string rule_set_to_json(const MovementRuleSet& rules) {
  OrderedJson doc;
  doc["movement"] = rules.movement_name;
  doc["y_axis"] = rules.y_axis == YAxis::kUp ? "up" : "down";
  OrderedJson response = OrderedJson::object();
  for (RuleGroup g : {RuleGroup::kRepStart, RuleGroup::kRepEnd,
                      RuleGroup::kRequirements, RuleGroup::kNoRep}) {
    OrderedJson group = OrderedJson::array();
    for (const NamedConstraint& c : rules.group(g)) {
      OrderedJson body;
      body["keypoints"] = c.keypoints;
      body["condition"] = print_condition(c.condition);
      if (c.tolerance) body["tolerance"] = *c.tolerance;
      OrderedJson item;
      item[c.semantic_key] = std::move(body);
      group.push_back(std::move(item));
    }
    if (g == RuleGroup::kNoRep) {
      for (const std::string& text : rules.inert_annotations) group.push_back(text);
    }
    response[std::string(to_string(g))] = std::move(group);
  }
  doc["response"] = std::move(response);
  return doc.dump(2);
}

}  // namespace repjudge
