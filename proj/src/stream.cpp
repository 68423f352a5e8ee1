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

#include "repjudge/stream.hpp"

#include <sstream>

#include "json_util.hpp"

namespace repjudge {

using detail::OrderedJson;

namespace {

PersonInstance instance_from_json(const OrderedJson& j, const std::string& ctx) {
  if (!j.is_object()) throw Error(ErrorKind::kSchema, ctx + ": instance must be an object");
  PersonInstance p;
  if (j.contains("track_id") && !j.at("track_id").is_null()) {
    p.track_id = detail::get_field<std::int64_t>(j, "track_id", ctx);
  }
  if (j.contains("bbox") && !j.at("bbox").is_null()) {
    const auto b = detail::get_field<std::vector<double>>(j, "bbox", ctx);
    if (b.size() != 4) throw Error(ErrorKind::kSchema, ctx + ": bbox needs 4 numbers");
    p.bbox = BBox{b[0], b[1], b[2], b[3]};
  }
  const auto kps = detail::get_field<std::vector<std::vector<double>>>(j, "kps", ctx);
  p.keypoints.reserve(kps.size());
  for (const auto& k : kps) {
    if (k.size() != 3) throw Error(ErrorKind::kSchema, ctx + ": keypoint needs [x, y, c]");
    p.keypoints.push_back({k[0], k[1], k[2]});
  }
  return p;
}

}  // namespace

KeypointStream parse_keypoint_stream(const std::string& text) {
  KeypointStream stream;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string ctx = "keypoint stream line " + std::to_string(line_no);
    OrderedJson j;
    try {
      j = OrderedJson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::kParse, ctx + ": malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw Error(ErrorKind::kSchema, ctx + ": expected an object");
    PoseFrame frame;
    frame.frame_index = detail::get_field<std::int64_t>(j, "frame", ctx);
    frame.timestamp = detail::get_field_or<double>(j, "t", 0.0, ctx);
    const auto schema = detail::get_field<std::string>(j, "schema", ctx);
    if (stream.frames.empty()) {
      stream.schema = schema;
    } else if (schema != stream.schema) {
      throw Error(ErrorKind::kConfiguration, ctx + ": schema '" + schema +
                                                 "' differs from '" + stream.schema + "'");
    }
    const auto it = j.find("instances");
    if (it == j.end() || !it->is_array()) {
      throw Error(ErrorKind::kSchema, ctx + ": 'instances' must be an array");
    }
    for (const auto& inst : *it) frame.instances.push_back(instance_from_json(inst, ctx));
    stream.frames.push_back(std::move(frame));
  }
  return stream;
}

void validate_stream(const KeypointStream& stream, const SchemaRegistry& registry) {
  if (stream.frames.empty()) return;
  const KeypointSchema& schema = registry.at(stream.schema);
  std::optional<std::int64_t> previous;
  for (const PoseFrame& f : stream.frames) {
    const std::string ctx = "frame " + std::to_string(f.frame_index);
    if (f.frame_index < 0) throw Error(ErrorKind::kSchema, ctx + ": negative frame index");
    if (previous && f.frame_index <= *previous) {
      throw Error(ErrorKind::kSchema, ctx + ": frame indices must strictly increase");
    }
    previous = f.frame_index;
    for (const PersonInstance& p : f.instances) {
      if (p.keypoints.size() != schema.size()) {
        throw Error(ErrorKind::kConfiguration,
                    ctx + ": " + std::to_string(p.keypoints.size()) +
                        " keypoints, schema '" + schema.name + "' has " +
                        std::to_string(schema.size()));
      }
      for (const Keypoint& k : p.keypoints) {
        if (!(k.confidence >= 0.0 && k.confidence <= 1.0)) {
          throw Error(ErrorKind::kSchema, ctx + ": keypoint confidence outside [0, 1]");
        }
      }
      if (p.bbox && !(p.bbox->w > 0.0 && p.bbox->h > 0.0)) {
        throw Error(ErrorKind::kSchema, ctx + ": bbox width and height must be > 0");
      }
    }
  }
}

KeypointStream load_keypoint_stream(const std::filesystem::path& path,
                                    const SchemaRegistry& registry) {
  KeypointStream stream = parse_keypoint_stream(detail::read_text_file(path));
  validate_stream(stream, registry);
  return stream;
}

std::string format_keypoint_stream(const KeypointStream& stream) {
  std::string out;
  for (const PoseFrame& f : stream.frames) {
    OrderedJson j;
    j["frame"] = f.frame_index;
    j["t"] = f.timestamp;
    j["schema"] = stream.schema;
    OrderedJson instances = OrderedJson::array();
    for (const PersonInstance& p : f.instances) {
      OrderedJson inst;
      if (p.track_id) inst["track_id"] = *p.track_id;
      if (p.bbox) inst["bbox"] = {p.bbox->x, p.bbox->y, p.bbox->w, p.bbox->h};
      OrderedJson kps = OrderedJson::array();
      for (const Keypoint& k : p.keypoints) kps.push_back({k.x, k.y, k.confidence});
      inst["kps"] = std::move(kps);
      instances.push_back(std::move(inst));
    }
    j["instances"] = std::move(instances);
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_keypoint_stream(const std::filesystem::path& path, const KeypointStream& stream) {
  detail::write_text_file(path, format_keypoint_stream(stream));
}

}  // namespace repjudge
