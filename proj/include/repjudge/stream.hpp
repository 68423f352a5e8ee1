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

// JSON-Lines keypoint stream, one PoseFrame per line:
//
//   {"frame": n, "t": sec, "schema": name,
//    "instances": [{"track_id": k, "bbox": [x, y, w, h],
//                   "kps": [[x, y, c], ...]}]}
//
// `track_id` and `bbox` are optional. Blank lines are ignored.

#ifndef REPJUDGE_STREAM_HPP_
#define REPJUDGE_STREAM_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "repjudge/schema.hpp"

namespace repjudge {

struct KeypointStream {
  std::string schema;  // empty only for a stream with no frames
  std::vector<PoseFrame> frames;

  friend bool operator==(const KeypointStream&, const KeypointStream&) = default;
};

// Parses the text without schema checks. Throws kParse naming the 1-based
// line on malformed JSON and kSchema on a wrong field shape.
KeypointStream parse_keypoint_stream(const std::string& text);

// Checks the stream against the registry: known schema used on every line,
// keypoint counts, confidences in [0, 1], positive bbox sizes and strictly
// increasing frame indices. Throws kConfiguration or kSchema.
void validate_stream(const KeypointStream& stream, const SchemaRegistry& registry);

// parse + validate.
KeypointStream load_keypoint_stream(const std::filesystem::path& path,
                                    const SchemaRegistry& registry);

std::string format_keypoint_stream(const KeypointStream& stream);
void save_keypoint_stream(const std::filesystem::path& path, const KeypointStream& stream);

}  // namespace repjudge

#endif  // REPJUDGE_STREAM_HPP_
