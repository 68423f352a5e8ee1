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

// Grayscale frame inputs:
//   * a directory of binary PGM (P5) files whose stem is the frame index,
//     e.g. 000123.pgm;
//   * a raw file of concatenated 8-bit frames plus a JSON sidecar
//     {"width": W, "height": H, "frames": N} named <file>.json or with the
//     extension replaced by .json.

#ifndef REPJUDGE_FRAMES_HPP_
#define REPJUDGE_FRAMES_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>

#include "repjudge/cache.hpp"

namespace repjudge {

GrayFrame parse_pgm(const std::string& bytes);
GrayFrame read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayFrame& frame);

// Random-access reader over either input form. Frame i is the i-th frame of
// the raw file, or the PGM file with index i.
class FrameSource {
 public:
  static std::unique_ptr<FrameSource> open(const std::filesystem::path& path);
  virtual ~FrameSource() = default;

  virtual std::int64_t size() const = 0;
  virtual int width() const = 0;
  virtual int height() const = 0;
  // Throws kIo when the frame is absent.
  virtual GrayFrame frame(std::int64_t index) const = 0;
};

// Writes `frames` (all the same size) as a raw stream and its sidecar
// `<path>.json`.
void save_raw_frames(const std::filesystem::path& path, std::span<const GrayFrame> frames);

}  // namespace repjudge

#endif  // REPJUDGE_FRAMES_HPP_
