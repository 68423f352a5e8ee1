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

#ifndef REPJUDGE_SCHEMA_HPP_
#define REPJUDGE_SCHEMA_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repjudge/features.hpp"
#include "repjudge/geometry.hpp"
#include "repjudge/rules.hpp"

namespace repjudge {

// Named, ordered joint set emitted by one pose-model family. Indices are
// stable; `kappas[i]` is the OKS localization constant of joint i.
struct KeypointSchema {
  std::string name;
  std::vector<std::string> joints;
  std::vector<double> kappas;
  bool has_hands = false;

  std::optional<std::size_t> index_of(std::string_view joint) const;
  std::size_t size() const { return joints.size(); }

  // Throws kConfiguration on duplicate joints, size mismatch or kappa <= 0.
  void validate() const;

  friend bool operator==(const KeypointSchema&, const KeypointSchema&) = default;
};

class SchemaRegistry {
 public:
  // Schemas shipped with the library: body17 (COCO), aic, humanart,
  // halpe26, body7, crowdpose, wholebody133.
  static SchemaRegistry builtin();
  static SchemaRegistry load(const std::filesystem::path& path);
  static SchemaRegistry from_json(const std::string& text);

  void add(KeypointSchema schema);
  const KeypointSchema* find(std::string_view name) const;
  // Throws kConfiguration for an unknown name.
  const KeypointSchema& at(std::string_view name) const;
  std::vector<std::string> names() const;

  std::string to_json() const;

  friend bool operator==(const SchemaRegistry&, const SchemaRegistry&) = default;

 private:
  std::map<std::string, KeypointSchema, std::less<>> schemas_;
};

struct Keypoint {
  double x = 0.0;  // px
  double y = 0.0;  // px
  double confidence = 0.0;

  Point point() const { return {x, y}; }
  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct PersonInstance {
  std::optional<std::int64_t> track_id;
  std::optional<BBox> bbox;
  std::vector<Keypoint> keypoints;  // one per schema joint

  // Tight box around keypoints with confidence >= floor (all keypoints when
  // floor is 0); nullopt when none qualify.
  std::optional<BBox> keypoint_box(double conf_floor = 0.0) const;
  // The detector box when present, otherwise the keypoint box.
  std::optional<BBox> person_box(double conf_floor = 0.0) const;

  friend bool operator==(const PersonInstance&, const PersonInstance&) = default;
};

struct PoseFrame {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;  // seconds
  std::vector<PersonInstance> instances;

  friend bool operator==(const PoseFrame&, const PoseFrame&) = default;
};

// How a semantic joint name maps onto a schema.
enum class JointDirective {
  kIndex,              // present in the schema
  kBarbellFromHands,   // midpoint of the middle-finger MCP joints
  kBarbellFromWrists,  // midpoint of the wrists plus a fixed offset
  kSideSelected,       // "side_*": the more confident body side per frame
  kExcluded,           // hand joint under a schema without hands
};

std::string_view to_string(JointDirective directive);

struct JointResolution {
  JointDirective directive = JointDirective::kIndex;
  std::size_t index = 0;  // valid for kIndex

  friend bool operator==(const JointResolution&, const JointResolution&) = default;
};

// Exact name (or a documented alias) -> index; barbell, side_* and hand
// joints -> the matching directive; anything else throws
// MissingKeypointError.
JointResolution resolve_joint(const KeypointSchema& schema, std::string_view name);

// True for the finger, thumb, MCP and hand-root joints of either hand.
bool is_hand_joint(std::string_view name);

enum class Side { kLeft, kRight };

// Per-frame side choice for "side_*" joints: mean confidence of shoulder,
// elbow and wrist on each side; ties go left.
Side select_side(const PersonInstance& instance, const KeypointSchema& schema);

struct ProxyOptions {
  double wrist_offset_px = 20.0;  // along +y (image down)
  double conf_floor = 0.3;
};

// Barbell position estimate. Hand-bearing schemas use the MCP midpoint,
// others the wrist midpoint moved down by the offset. A single confident
// side is used alone. Throws kLowConfidence when neither side qualifies.
Point barbell_proxy(const PersonInstance& instance, const KeypointSchema& schema,
                    const ProxyOptions& options = {});

struct FeatureOptions {
  double wrist_offset_px = 20.0;
};

// Computes exactly the primitives referenced by the rule set. Primitives
// that touch an excluded joint are left out; any primitive whose inputs are
// below `conf_floor` (or geometrically degenerate) is flagged unavailable.
// Positions are (p - box corner) / box height, in image convention.
KinematicFeatures compute_features(const PersonInstance& instance,
                                   const MovementRuleSet& rules,
                                   const KeypointSchema& schema, double conf_floor,
                                   const FeatureOptions& options = {});

// True when any joint of the constraint resolves to kExcluded.
bool constraint_excluded(const NamedConstraint& constraint, const KeypointSchema& schema);

// Copy of the rule set without excluded constraints.
MovementRuleSet apply_schema(const MovementRuleSet& rules, const KeypointSchema& schema);

struct JointGap {
  RuleGroup group = RuleGroup::kRepStart;
  std::string semantic_key;
  std::string joint;
  std::optional<JointDirective> directive;  // nullopt: no fallback
  bool covered = false;

  friend bool operator==(const JointGap&, const JointGap&) = default;
};

struct ValidationReport {
  std::vector<JointGap> gaps;
  std::vector<std::string> excluded_constraints;  // "group.key"
  std::vector<std::string> inert_annotations;
  std::vector<std::string> issues;  // unit mismatches, emptied groups
  bool runnable = true;
};

// Report-only check of a rule set against a schema; never throws.
ValidationReport validate_rule_set(const MovementRuleSet& rules, const KeypointSchema& schema);

}  // namespace repjudge

#endif  // REPJUDGE_SCHEMA_HPP_
