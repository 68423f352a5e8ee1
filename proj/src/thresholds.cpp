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

#include "repjudge/thresholds.hpp"

#include "json_util.hpp"

namespace repjudge {

using detail::Json;

void ThresholdConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kConfiguration, "threshold config: " + what);
  };
  if (!(angle_tolerance >= 0.0)) fail("angle_tolerance must be >= 0");
  if (!(position_tolerance >= 0.0)) fail("position_tolerance must be >= 0");
  for (const auto& [key, value] : overrides) {
    if (!(value >= 0.0)) fail("override for '" + key + "' must be >= 0");
  }
  if (start_debounce < 1 || end_debounce < 1) fail("debounce must be >= 1");
  if (min_rep_frames < 1) fail("min_rep_frames must be >= 1");
  if (!(conf_floor >= 0.0 && conf_floor <= 1.0)) fail("conf_floor must be in [0,1]");
}

namespace {

ThresholdConfig from_object(const Json& j) {
  const std::string ctx = "threshold config";
  if (!j.is_object()) throw Error(ErrorKind::kSchema, ctx + ": expected an object");
  ThresholdConfig c;
  c.angle_tolerance = detail::get_field_or(j, "angle_tolerance", c.angle_tolerance, ctx);
  c.position_tolerance =
      detail::get_field_or(j, "position_tolerance", c.position_tolerance, ctx);
  if (j.contains("debounce")) {
    c.start_debounce = c.end_debounce = detail::get_field<int>(j, "debounce", ctx);
  }
  c.start_debounce = detail::get_field_or(j, "start_debounce", c.start_debounce, ctx);
  c.end_debounce = detail::get_field_or(j, "end_debounce", c.end_debounce, ctx);
  c.min_rep_frames = detail::get_field_or(j, "min_rep_frames", c.min_rep_frames, ctx);
  c.conf_floor = detail::get_field_or(j, "conf_floor", c.conf_floor, ctx);
  c.end_window_counts =
      detail::get_field_or(j, "end_window_counts", c.end_window_counts, ctx);
  c.overrides = detail::get_field_or(j, "overrides", c.overrides, ctx);
  c.validate();
  return c;
}

bool selector_matches(const Json& group, const char* key, const std::string& want) {
  return want.empty() || group.value(key, std::string()) == want;
}

}  // namespace

ThresholdConfig thresholds_from_json(const std::string& text) {
  return from_object(detail::parse_json(text, "threshold config"));
}

std::string thresholds_to_json(const ThresholdConfig& c) {
  detail::OrderedJson j;
  j["angle_tolerance"] = c.angle_tolerance;
  j["position_tolerance"] = c.position_tolerance;
  j["start_debounce"] = c.start_debounce;
  j["end_debounce"] = c.end_debounce;
  j["min_rep_frames"] = c.min_rep_frames;
  j["conf_floor"] = c.conf_floor;
  j["end_window_counts"] = c.end_window_counts;
  j["overrides"] = c.overrides;
  return j.dump(2);
}

ThresholdConfig load_thresholds(const std::filesystem::path& path,
                                const std::string& model,
                                const std::string& movement,
                                const std::string& view) {
  const Json j = detail::parse_json(detail::read_text_file(path), path.string());
  if (!j.contains("groups")) return from_object(j);
  for (const Json& group : j.at("groups")) {
    if (selector_matches(group, "model", model) &&
        selector_matches(group, "movement", movement) &&
        selector_matches(group, "view", view)) {
      return from_object(group.at("thresholds"));
    }
  }
  throw Error(ErrorKind::kConfiguration,
              "no threshold group for model='" + model + "' movement='" +
                  movement + "' view='" + view + "' in " + path.string());
}

}  // namespace repjudge
