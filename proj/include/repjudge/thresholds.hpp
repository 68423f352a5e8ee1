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

#ifndef REPJUDGE_THRESHOLDS_HPP_
#define REPJUDGE_THRESHOLDS_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace repjudge {

// Numeric tolerances for one (pose model, movement, camera view) group.
struct ThresholdConfig {
  double angle_tolerance = 5.0;       // degrees, used by ~= on angles
  double position_tolerance = 0.05;   // body heights, used by ~= on X/Y
  std::map<std::string, double> overrides;  // semantic_key -> ~= tolerance
  int start_debounce = 2;  // consecutive frames before a start is accepted
  int end_debounce = 2;    // consecutive frames before an end is accepted
  int min_rep_frames = 5;  // shorter reps are dropped as noise
  double conf_floor = 0.3;
  // When false, requirement/no-rep evidence seen during the end-debounce
  // window is not credited to the rep being closed.
  bool end_window_counts = true;

  // Throws kConfiguration when an invariant is broken.
  void validate() const;

  friend bool operator==(const ThresholdConfig&, const ThresholdConfig&) = default;
};

// Accepts either a bare config object or a calibration output
// {"groups":[{"model","movement","view","thresholds":{...}}]}; the selector
// fields pick a group from the latter (empty selector matches anything).
ThresholdConfig load_thresholds(const std::filesystem::path& path,
                                const std::string& model = {},
                                const std::string& movement = {},
                                const std::string& view = {});

ThresholdConfig thresholds_from_json(const std::string& text);
std::string thresholds_to_json(const ThresholdConfig& config);

}  // namespace repjudge

#endif  // REPJUDGE_THRESHOLDS_HPP_
