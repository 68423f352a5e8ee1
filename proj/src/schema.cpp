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

#include "repjudge/schema.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <utility>

#include "json_util.hpp"

namespace repjudge {

using detail::Json;
using detail::OrderedJson;

namespace {

// OKS constants for the 17 COCO body joints. These are 2 * sigma of the
// published COCO keypoint sigmas, which puts the COCO evaluation formula
// exp(-d^2 / (2 * area * (2 sigma)^2)) in the exp(-d^2 / (2 s^2 k^2)) form.
constexpr double kNose = 0.052;
constexpr double kEye = 0.050;
constexpr double kEar = 0.070;
constexpr double kShoulder = 0.158;
constexpr double kElbow = 0.144;
constexpr double kWrist = 0.124;
constexpr double kHip = 0.214;
constexpr double kKnee = 0.174;
constexpr double kAnkle = 0.178;

// Joints outside the COCO set borrow the constant of the nearest COCO joint.
double inherited_kappa(std::string_view joint) {
  static const std::map<std::string, double, std::less<>> kTable = {
      {"nose", kNose},
      {"left_eye", kEye},           {"right_eye", kEye},
      {"left_ear", kEar},           {"right_ear", kEar},
      {"left_shoulder", kShoulder}, {"right_shoulder", kShoulder},
      {"left_elbow", kElbow},       {"right_elbow", kElbow},
      {"left_wrist", kWrist},       {"right_wrist", kWrist},
      {"left_hip", kHip},           {"right_hip", kHip},
      {"left_knee", kKnee},         {"right_knee", kKnee},
      {"left_ankle", kAnkle},       {"right_ankle", kAnkle},
      {"head_top", kEar},           {"neck", kShoulder},
      {"mid_hip", kHip},
      {"left_big_toe", kAnkle},     {"right_big_toe", kAnkle},
      {"left_small_toe", kAnkle},   {"right_small_toe", kAnkle},
      {"left_heel", kAnkle},        {"right_heel", kAnkle},
  };
  if (auto it = kTable.find(joint); it != kTable.end()) return it->second;
  if (joint.rfind("face_", 0) == 0) return kNose;
  if (is_hand_joint(joint)) return kWrist;
  return kShoulder;
}

const std::array<const char*, 17> kCocoBody = {
    "nose",       "left_eye",       "right_eye",      "left_ear",    "right_ear",
    "left_shoulder", "right_shoulder", "left_elbow",  "right_elbow", "left_wrist",
    "right_wrist", "left_hip",      "right_hip",      "left_knee",   "right_knee",
    "left_ankle", "right_ankle"};

KeypointSchema make_schema(std::string name, std::vector<std::string> joints,
                           bool has_hands) {
  KeypointSchema s;
  s.name = std::move(name);
  s.joints = std::move(joints);
  s.has_hands = has_hands;
  for (const auto& j : s.joints) s.kappas.push_back(inherited_kappa(j));
  s.validate();
  return s;
}

std::vector<std::string> coco17() { return {kCocoBody.begin(), kCocoBody.end()}; }

std::vector<std::string> hand_joints(const std::string& side) {
  std::vector<std::string> out = {side + "_hand_root"};
  for (const char* finger : {"thumb", "forefinger", "middle_finger", "ring_finger",
                             "pinky_finger"}) {
    for (int i = 1; i <= 4; ++i) out.push_back(side + "_" + finger + std::to_string(i));
  }
  return out;
}

const std::map<std::string, std::string, std::less<>>& aliases() {
  static const std::map<std::string, std::string, std::less<>> kAliases = {
      {"top_head", "head_top"},
      {"head", "head_top"},
      {"hip", "mid_hip"},
      {"left_middle_finger_mcp", "left_middle_finger1"},
      {"right_middle_finger_mcp", "right_middle_finger1"},
  };
  return kAliases;
}

std::string canonical(std::string_view name) {
  if (auto it = aliases().find(name); it != aliases().end()) return it->second;
  return std::string(name);
}

}  // namespace

// ---------------------------------------------------------------------------
// KeypointSchema / SchemaRegistry

std::optional<std::size_t> KeypointSchema::index_of(std::string_view joint) const {
  auto it = std::find(joints.begin(), joints.end(), joint);
  if (it == joints.end()) return std::nullopt;
  return static_cast<std::size_t>(it - joints.begin());
}

void KeypointSchema::validate() const {
  auto fail = [this](const std::string& what) {
    throw Error(ErrorKind::kConfiguration, "schema '" + name + "': " + what);
  };
  if (name.empty()) throw Error(ErrorKind::kConfiguration, "schema name is empty");
  if (joints.empty()) fail("no joints");
  if (kappas.size() != joints.size()) fail("kappa count differs from joint count");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (!seen.insert(joints[i]).second) fail("duplicate joint '" + joints[i] + "'");
    if (!(kappas[i] > 0.0)) fail("kappa of '" + joints[i] + "' must be > 0");
  }
}

SchemaRegistry SchemaRegistry::builtin() {
  SchemaRegistry r;
  r.add(make_schema("body17", coco17(), false));
  r.add(make_schema("humanart", coco17(), false));
  r.add(make_schema("body7", coco17(), false));
  r.add(make_schema("aic",
                    {"right_shoulder", "right_elbow", "right_wrist", "left_shoulder",
                     "left_elbow", "left_wrist", "right_hip", "right_knee",
                     "right_ankle", "left_hip", "left_knee", "left_ankle", "head_top",
                     "neck"},
                    false));
  r.add(make_schema("crowdpose",
                    {"left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
                     "left_wrist", "right_wrist", "left_hip", "right_hip", "left_knee",
                     "right_knee", "left_ankle", "right_ankle", "head_top", "neck"},
                    false));
  std::vector<std::string> halpe = coco17();
  for (const char* j : {"head_top", "neck", "mid_hip", "left_big_toe", "right_big_toe",
                        "left_small_toe", "right_small_toe", "left_heel", "right_heel"}) {
    halpe.emplace_back(j);
  }
  r.add(make_schema("halpe26", std::move(halpe), false));
  std::vector<std::string> whole = coco17();
  for (const char* j : {"left_big_toe", "left_small_toe", "left_heel", "right_big_toe",
                        "right_small_toe", "right_heel"}) {
    whole.emplace_back(j);
  }
  for (int i = 0; i < 68; ++i) whole.push_back("face_" + std::to_string(i));
  for (const auto& j : hand_joints("left")) whole.push_back(j);
  for (const auto& j : hand_joints("right")) whole.push_back(j);
  r.add(make_schema("wholebody133", std::move(whole), true));
  return r;
}

void SchemaRegistry::add(KeypointSchema schema) {
  schema.validate();
  std::string key = schema.name;
  schemas_[std::move(key)] = std::move(schema);
}

const KeypointSchema* SchemaRegistry::find(std::string_view name) const {
  auto it = schemas_.find(name);
  return it == schemas_.end() ? nullptr : &it->second;
}

const KeypointSchema& SchemaRegistry::at(std::string_view name) const {
  if (const KeypointSchema* s = find(name)) return *s;
  throw Error(ErrorKind::kConfiguration, "unknown keypoint schema '" + std::string(name) + "'");
}

std::vector<std::string> SchemaRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, schema] : schemas_) out.push_back(name);
  return out;
}

SchemaRegistry SchemaRegistry::from_json(const std::string& text) {
  const Json doc = detail::parse_json(text, "schema registry");
  const std::string ctx = "schema registry";
  SchemaRegistry r;
  for (const Json& entry : detail::get_field<Json>(doc, "schemas", ctx)) {
    KeypointSchema s;
    s.name = detail::get_field<std::string>(entry, "name", ctx);
    s.has_hands = detail::get_field_or(entry, "has_hands", false, ctx);
    for (const Json& joint : detail::get_field<Json>(entry, "joints", ctx)) {
      s.joints.push_back(detail::get_field<std::string>(joint, "name", ctx));
      s.kappas.push_back(detail::get_field<double>(joint, "kappa", ctx));
    }
    r.add(std::move(s));
  }
  return r;
}

SchemaRegistry SchemaRegistry::load(const std::filesystem::path& path) {
  return from_json(detail::read_text_file(path));
}

std::string SchemaRegistry::to_json() const {
  OrderedJson list = OrderedJson::array();
  for (const auto& [name, s] : schemas_) {
    OrderedJson entry;
    entry["name"] = s.name;
    entry["has_hands"] = s.has_hands;
    OrderedJson joints = OrderedJson::array();
    for (std::size_t i = 0; i < s.joints.size(); ++i) {
      joints.push_back(OrderedJson{{"name", s.joints[i]}, {"kappa", s.kappas[i]}});
    }
    entry["joints"] = std::move(joints);
    list.push_back(std::move(entry));
  }
  OrderedJson doc;
  doc["schemas"] = std::move(list);
  return doc.dump(1);
}

// ---------------------------------------------------------------------------
// PersonInstance

std::optional<BBox> PersonInstance::keypoint_box(double conf_floor) const {
  std::vector<Point> pts;
  pts.reserve(keypoints.size());
  for (const Keypoint& k : keypoints) {
    if (conf_floor == 0.0 || k.confidence >= conf_floor) pts.push_back(k.point());
  }
  return bounding_box(pts);
}

std::optional<BBox> PersonInstance::person_box(double conf_floor) const {
  if (bbox) return bbox;
  return keypoint_box(conf_floor);
}

// ---------------------------------------------------------------------------
// Joint resolution

std::string_view to_string(JointDirective directive) {
  switch (directive) {
    case JointDirective::kIndex: return "index";
    case JointDirective::kBarbellFromHands: return "barbell_from_middle_finger_mcp";
    case JointDirective::kBarbellFromWrists: return "barbell_from_wrist_offset";
    case JointDirective::kSideSelected: return "side_selected";
    case JointDirective::kExcluded: return "excluded";
  }
  return "?";
}

bool is_hand_joint(std::string_view name) {
  for (std::string_view prefix : {"left_", "right_", "side_"}) {
    if (name.rfind(prefix, 0) == 0) {
      name.remove_prefix(prefix.size());
      break;
    }
  }
  for (std::string_view stem : {"thumb", "forefinger", "middle_finger", "ring_finger",
                                "pinky_finger", "hand_root"}) {
    if (name.rfind(stem, 0) == 0) return true;
  }
  return name.find("mcp") != std::string_view::npos;
}

JointResolution resolve_joint(const KeypointSchema& schema, std::string_view name) {
  if (auto idx = schema.index_of(canonical(name))) {
    return {JointDirective::kIndex, *idx};
  }
  if (name == "barbell") {
    const bool mcps = schema.index_of("left_middle_finger1") &&
                      schema.index_of("right_middle_finger1");
    if (schema.has_hands && mcps) return {JointDirective::kBarbellFromHands, 0};
    if (schema.index_of("left_wrist") || schema.index_of("right_wrist")) {
      return {JointDirective::kBarbellFromWrists, 0};
    }
    throw MissingKeypointError(std::string(name));
  }
  if (name.rfind("side_", 0) == 0) {
    const std::string base(name.substr(5));
    const JointResolution left = resolve_joint(schema, "left_" + base);
    const JointResolution right = resolve_joint(schema, "right_" + base);
    if (left.directive == JointDirective::kExcluded ||
        right.directive == JointDirective::kExcluded) {
      return {JointDirective::kExcluded, 0};
    }
    return {JointDirective::kSideSelected, 0};
  }
  if (is_hand_joint(name) && !schema.has_hands) return {JointDirective::kExcluded, 0};
  throw MissingKeypointError(std::string(name));
}

Side select_side(const PersonInstance& instance, const KeypointSchema& schema) {
  auto mean_conf = [&](const char* side) {
    double sum = 0.0;
    for (const char* joint : {"_shoulder", "_elbow", "_wrist"}) {
      if (auto idx = schema.index_of(std::string(side) + joint);
          idx && *idx < instance.keypoints.size()) {
        sum += instance.keypoints[*idx].confidence;
      }
    }
    return sum / 3.0;
  };
  return mean_conf("right") > mean_conf("left") ? Side::kRight : Side::kLeft;
}

namespace {

const Keypoint* confident(const PersonInstance& instance, const KeypointSchema& schema,
                          std::string_view joint, double conf_floor) {
  auto idx = schema.index_of(joint);
  if (!idx || *idx >= instance.keypoints.size()) return nullptr;
  const Keypoint& k = instance.keypoints[*idx];
  return k.confidence >= conf_floor ? &k : nullptr;
}

std::optional<Point> midpoint_or_single(const Keypoint* a, const Keypoint* b) {
  if (a && b) return Point{(a->x + b->x) / 2.0, (a->y + b->y) / 2.0};
  if (a) return a->point();
  if (b) return b->point();
  return std::nullopt;
}

}  // namespace

Point barbell_proxy(const PersonInstance& instance, const KeypointSchema& schema,
                    const ProxyOptions& options) {
  if (schema.has_hands) {
    const auto p = midpoint_or_single(
        confident(instance, schema, "left_middle_finger1", options.conf_floor),
        confident(instance, schema, "right_middle_finger1", options.conf_floor));
    if (p) return *p;
  }
  const auto wrists = midpoint_or_single(
      confident(instance, schema, "left_wrist", options.conf_floor),
      confident(instance, schema, "right_wrist", options.conf_floor));
  if (!wrists) {
    throw Error(ErrorKind::kLowConfidence,
                "barbell proxy: both wrists are below the confidence floor");
  }
  return Point{wrists->x, wrists->y + options.wrist_offset_px};
}

// ---------------------------------------------------------------------------
// Features

namespace {

class FeatureBuilder {
 public:
  FeatureBuilder(const PersonInstance& instance, const KeypointSchema& schema,
                 double conf_floor, const FeatureOptions& options)
      : instance_(instance), schema_(schema), conf_floor_(conf_floor), options_(options) {}

  // Location of a semantic joint, or nullopt with `missing` set.
  std::optional<Point> locate(const std::string& name, std::string& missing) const {
    JointResolution res;
    try {
      res = resolve_joint(schema_, name);
    } catch (const MissingKeypointError&) {
      missing = name;
      return std::nullopt;
    }
    switch (res.directive) {
      case JointDirective::kIndex: {
        if (res.index < instance_.keypoints.size()) {
          const Keypoint& k = instance_.keypoints[res.index];
          if (k.confidence >= conf_floor_) return k.point();
        }
        missing = name;
        return std::nullopt;
      }
      case JointDirective::kBarbellFromHands:
      case JointDirective::kBarbellFromWrists: {
        try {
          return barbell_proxy(instance_, schema_,
                               ProxyOptions{options_.wrist_offset_px, conf_floor_});
        } catch (const Error&) {
          missing = name;
          return std::nullopt;
        }
      }
      case JointDirective::kSideSelected: {
        const char* side = select_side(instance_, schema_) == Side::kLeft ? "left_" : "right_";
        return locate(side + name.substr(5), missing);
      }
      case JointDirective::kExcluded: break;
    }
    missing = name;
    return std::nullopt;
  }

  void add(const Primitive& p, KinematicFeatures& out) const {
    const std::string key = p.key();
    const FeatureKind kind = p.feature_kind();
    std::string missing;
    std::vector<Point> pts;
    for (const std::string& joint : p.joints) {
      auto pt = locate(joint, missing);
      if (!pt) {
        out.set_unavailable(key, kind, missing);
        return;
      }
      pts.push_back(*pt);
    }
    if (p.kind == PrimitiveKind::kAngle) {
      try {
        out.set(key, kind, joint_angle(pts[0], pts[1], pts[2]));
      } catch (const Error&) {
        out.set_unavailable(key, kind, p.joints[1]);
      }
      return;
    }
    const auto box = instance_.person_box(conf_floor_);
    if (!box || !(box->h > 0.0)) {
      out.set_unavailable(key, kind, p.joints[0]);
      return;
    }
    const double v = p.kind == PrimitiveKind::kX ? (pts[0].x - box->x) / box->h
                                                 : (pts[0].y - box->y) / box->h;
    out.set(key, kind, v);
  }

 private:
  const PersonInstance& instance_;
  const KeypointSchema& schema_;
  double conf_floor_;
  const FeatureOptions& options_;
};

bool primitive_excluded(const Primitive& p, const KeypointSchema& schema) {
  for (const std::string& joint : p.joints) {
    try {
      if (resolve_joint(schema, joint).directive == JointDirective::kExcluded) return true;
    } catch (const MissingKeypointError&) {
    }
  }
  return false;
}

constexpr std::array<RuleGroup, 4> kAllGroups = {
    RuleGroup::kRepStart, RuleGroup::kRepEnd, RuleGroup::kRequirements, RuleGroup::kNoRep};

}  // namespace

KinematicFeatures compute_features(const PersonInstance& instance,
                                   const MovementRuleSet& rules,
                                   const KeypointSchema& schema, double conf_floor,
                                   const FeatureOptions& options) {
  KinematicFeatures out;
  const FeatureBuilder builder(instance, schema, conf_floor, options);
  for (RuleGroup g : kAllGroups) {
    for (const NamedConstraint& c : rules.group(g)) {
      if (constraint_excluded(c, schema)) continue;
      for (const Primitive& p : referenced_primitives(c.condition)) {
        if (!out.contains(p.key())) builder.add(p, out);
      }
    }
  }
  return out;
}

bool constraint_excluded(const NamedConstraint& constraint, const KeypointSchema& schema) {
  for (const Primitive& p : referenced_primitives(constraint.condition)) {
    if (primitive_excluded(p, schema)) return true;
  }
  return false;
}

MovementRuleSet apply_schema(const MovementRuleSet& rules, const KeypointSchema& schema) {
  MovementRuleSet out = rules;
  for (RuleGroup g : kAllGroups) {
    auto& group = out.group(g);
    std::erase_if(group, [&](const NamedConstraint& c) { return constraint_excluded(c, schema); });
  }
  return out;
}

ValidationReport validate_rule_set(const MovementRuleSet& rules, const KeypointSchema& schema) {
  ValidationReport report;
  report.inert_annotations = rules.inert_annotations;
  for (RuleGroup g : kAllGroups) {
    std::size_t kept = 0;
    for (const NamedConstraint& c : rules.group(g)) {
      const std::string where = std::string(to_string(g)) + "." + c.semantic_key;
      if (!units_consistent(c.condition)) {
        report.issues.push_back(where + ": unit mismatch between comparison sides");
        report.runnable = false;
      }
      for (const std::string& joint : referenced_joints(c.condition)) {
        JointGap gap{g, c.semantic_key, joint, std::nullopt, false};
        try {
          const JointResolution res = resolve_joint(schema, joint);
          if (res.directive == JointDirective::kIndex ||
              res.directive == JointDirective::kSideSelected) {
            continue;
          }
          gap.directive = res.directive;
          gap.covered = true;
        } catch (const MissingKeypointError&) {
          report.runnable = false;
        }
        report.gaps.push_back(std::move(gap));
      }
      if (constraint_excluded(c, schema)) {
        report.excluded_constraints.push_back(where);
      } else {
        ++kept;
      }
    }
    if ((g == RuleGroup::kRepStart || g == RuleGroup::kRepEnd) && kept == 0) {
      report.issues.push_back(std::string(to_string(g)) +
                              ": every constraint is excluded under schema '" +
                              schema.name + "'");
      report.runnable = false;
    }
  }
  return report;
}

}  // namespace repjudge
