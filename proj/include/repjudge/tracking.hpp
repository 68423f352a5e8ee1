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

#ifndef REPJUDGE_TRACKING_HPP_
#define REPJUDGE_TRACKING_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "repjudge/geometry.hpp"
#include "repjudge/schema.hpp"

namespace repjudge {

// Intersection over union; 0 when the union is empty.
double iou(const BBox& a, const BBox& b);

// Object keypoint similarity between two poses of equal length.
// `visible[i]` marks joints that take part; `kappas[i]` is the per-joint
// constant and `scale` the object scale. Throws kUndefinedSimilarity when no
// joint is visible, kDomain for scale <= 0 and kShape on length mismatch.
double oks(std::span<const Point> a, std::span<const Point> b,
           std::span<const bool> visible, double scale, std::span<const double> kappas);

enum class TrackerMode { kIou, kOks };

struct TrackerOptions {
  double iou_threshold = 0.3;
  double oks_threshold = 0.5;
  int max_gap_frames = 15;
  double conf_floor = 0.3;  // OKS visibility: both keypoints at or above it
};

// Frame-to-frame identity assignment. Each instance inherits the id of its
// most similar unmatched live track when the similarity exceeds the mode
// threshold; pairs are taken greedily in descending similarity. Tracks not
// seen for more than `max_gap_frames` frames are retired. Ids are never
// reused.
class Tracker {
 public:
  Tracker(TrackerMode mode, const KeypointSchema& schema, TrackerOptions options = {});

  // Returns one track id per instance. Throws kMode in IOU mode when an
  // instance has no bbox.
  std::vector<std::int64_t> step(const PoseFrame& frame);

  // Similarity between a live track and a candidate instance under the
  // current mode.
  double similarity(std::int64_t track_id, const PersonInstance& instance) const;

  bool is_live(std::int64_t track_id) const { return tracks_.count(track_id) != 0; }
  std::size_t live_count() const { return tracks_.size(); }
  std::int64_t next_track_id() const { return next_id_; }

 private:
  struct Track {
    PersonInstance last;
    std::int64_t last_frame = 0;
  };

  TrackerMode mode_;
  const KeypointSchema* schema_;
  TrackerOptions options_;
  std::map<std::int64_t, Track> tracks_;
  std::int64_t next_id_ = 0;
};

// Sticky target lock. The first frame with at least one instance picks the
// largest box (detector bbox, else keypoint box; ties -> lowest index). The
// choice is kept while the track lives and is only revisited once the
// tracker has retired it.
class TargetSelector {
 public:
  // `ids` are the tracker assignments for `frame`. Returns the position of
  // the target instance in this frame, nullopt when the target is absent.
  // Throws kNoTarget when no target is locked and the frame is empty.
  std::optional<std::size_t> select(const PoseFrame& frame,
                                    std::span<const std::int64_t> ids,
                                    const Tracker& tracker);

  std::optional<std::int64_t> target_id() const { return target_; }

 private:
  std::optional<std::int64_t> target_;
};

}  // namespace repjudge

#endif  // REPJUDGE_TRACKING_HPP_
