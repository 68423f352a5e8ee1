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

#ifndef REPJUDGE_FEATURES_HPP_
#define REPJUDGE_FEATURES_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>

namespace repjudge {

enum class FeatureKind {
  kAngle,     // degrees in [0, 180]
  kPosition,  // image-convention coordinate divided by person box height
};

struct Feature {
  FeatureKind kind = FeatureKind::kAngle;
  std::optional<double> value;  // nullopt: unavailable this frame
  std::string missing_joint;    // set when unavailable

  bool available() const { return value.has_value(); }
  friend bool operator==(const Feature&, const Feature&) = default;
};

// Per-frame kinematic features keyed by the canonical primitive text,
// e.g. "Angle(left_hip,left_knee,left_ankle)" or "Y(left_hip)". An
// unavailable feature is stored with an explicit flag; there is no default
// number for it.
class KinematicFeatures {
 public:
  void set(const std::string& key, FeatureKind kind, double value);
  void set_unavailable(const std::string& key, FeatureKind kind,
                       const std::string& missing_joint);

  const Feature* find(const std::string& key) const;
  bool contains(const std::string& key) const { return entries_.count(key) != 0; }

  std::size_t size() const { return entries_.size(); }
  std::size_t available_count() const;
  const std::map<std::string, Feature>& entries() const { return entries_; }

  friend bool operator==(const KinematicFeatures&, const KinematicFeatures&) = default;

 private:
  std::map<std::string, Feature> entries_;
};

}  // namespace repjudge

#endif  // REPJUDGE_FEATURES_HPP_
