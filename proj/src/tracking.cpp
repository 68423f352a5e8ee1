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

#include "repjudge/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <tuple>

#include "repjudge/error.hpp"

namespace repjudge {

double iou(const BBox& a, const BBox& b) {
  const auto inter = intersect(a, b);
  const double i = inter ? inter->area() : 0.0;
  const double u = a.area() + b.area() - i;
  return u > 0.0 ? i / u : 0.0;
}

double oks(std::span<const Point> a, std::span<const Point> b,
           std::span<const bool> visible, double scale, std::span<const double> kappas) {
  if (a.size() != b.size() || a.size() != visible.size() || a.size() != kappas.size()) {
    throw Error(ErrorKind::kShape, "oks: pose, visibility and kappa lengths differ");
  }
  if (!(scale > 0.0)) throw Error(ErrorKind::kDomain, "oks: scale must be > 0");
  double num = 0.0;
  std::size_t den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!visible[i]) continue;
    const double dx = a[i].x - b[i].x;
    const double dy = a[i].y - b[i].y;
    const double sk = scale * kappas[i];
    num += std::exp(-(dx * dx + dy * dy) / (2.0 * sk * sk));
    ++den;
  }
  if (den == 0) throw Error(ErrorKind::kUndefinedSimilarity, "oks: no visible joints");
  return num / static_cast<double>(den);
}

Tracker::Tracker(TrackerMode mode, const KeypointSchema& schema, TrackerOptions options)
    : mode_(mode), schema_(&schema), options_(options) {
  if (options_.max_gap_frames < 0) {
    throw Error(ErrorKind::kConfiguration, "max_gap_frames must be >= 0");
  }
}

double Tracker::similarity(std::int64_t track_id, const PersonInstance& instance) const {
  const Track& track = tracks_.at(track_id);
  if (mode_ == TrackerMode::kIou) {
    if (!track.last.bbox || !instance.bbox) {
      throw Error(ErrorKind::kMode, "IOU tracking needs a bbox on every instance");
    }
    return iou(*track.last.bbox, *instance.bbox);
  }
  const auto& pa = track.last.keypoints;
  const auto& pb = instance.keypoints;
  if (pa.size() != pb.size() || pa.size() != schema_->size()) return 0.0;
  auto box = track.last.bbox;
  if (!box) box = track.last.keypoint_box(options_.conf_floor);
  if (!box) box = track.last.keypoint_box(0.0);
  if (!box || !(box->area() > 0.0)) return 0.0;
  const std::size_t n = pa.size();
  std::vector<Point> a, b;
  a.reserve(n);
  b.reserve(n);
  // std::vector<bool> has no contiguous storage to view as a span.
  auto visible = std::make_unique<bool[]>(n);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    a.push_back(pa[i].point());
    b.push_back(pb[i].point());
    visible[i] = pa[i].confidence >= options_.conf_floor &&
                 pb[i].confidence >= options_.conf_floor;
    any = any || visible[i];
  }
  if (!any) return 0.0;
  return oks(a, b, std::span<const bool>(visible.get(), n),
             std::sqrt(box->area()), schema_->kappas);
}

std::vector<std::int64_t> Tracker::step(const PoseFrame& frame) {
  if (mode_ == TrackerMode::kIou) {
    for (const PersonInstance& p : frame.instances) {
      if (!p.bbox) throw Error(ErrorKind::kMode, "IOU tracking needs a bbox on every instance");
    }
  }
  std::erase_if(tracks_, [&](const auto& kv) {
    return frame.frame_index - kv.second.last_frame > options_.max_gap_frames;
  });

  const double threshold =
      mode_ == TrackerMode::kIou ? options_.iou_threshold : options_.oks_threshold;
  // (similarity, instance, track): sorted so ties resolve to the lowest
  // instance index, then the oldest track.
  std::vector<std::tuple<double, std::size_t, std::int64_t>> pairs;
  for (std::size_t i = 0; i < frame.instances.size(); ++i) {
    for (const auto& [id, track] : tracks_) {
      const double s = similarity(id, frame.instances[i]);
      if (s > threshold) pairs.emplace_back(s, i, id);
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
    if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
    if (std::get<1>(x) != std::get<1>(y)) return std::get<1>(x) < std::get<1>(y);
    return std::get<2>(x) < std::get<2>(y);
  });

  std::vector<std::optional<std::int64_t>> assigned(frame.instances.size());
  std::vector<std::int64_t> used;
  for (const auto& [s, i, id] : pairs) {
    if (assigned[i] || std::find(used.begin(), used.end(), id) != used.end()) continue;
    assigned[i] = id;
    used.push_back(id);
  }
  std::vector<std::int64_t> ids;
  ids.reserve(frame.instances.size());
  for (std::size_t i = 0; i < frame.instances.size(); ++i) {
    const std::int64_t id = assigned[i] ? *assigned[i] : next_id_++;
    Track& t = tracks_[id];
    t.last = frame.instances[i];
    t.last.track_id = id;
    t.last_frame = frame.frame_index;
    ids.push_back(id);
  }
  return ids;
}

std::optional<std::size_t> TargetSelector::select(const PoseFrame& frame,
                                                  std::span<const std::int64_t> ids,
                                                  const Tracker& tracker) {
  if (ids.size() != frame.instances.size()) {
    throw Error(ErrorKind::kShape, "target selection: one track id per instance expected");
  }
  if (target_ && tracker.is_live(*target_)) {
    auto it = std::find(ids.begin(), ids.end(), *target_);
    if (it == ids.end()) return std::nullopt;
    return static_cast<std::size_t>(it - ids.begin());
  }
  target_.reset();
  if (frame.instances.empty()) {
    throw Error(ErrorKind::kNoTarget,
                "frame " + std::to_string(frame.frame_index) + " has no person instances");
  }
  std::optional<std::size_t> best;
  double best_area = -1.0;
  for (std::size_t i = 0; i < frame.instances.size(); ++i) {
    const auto box = frame.instances[i].person_box(0.0);
    const double area = box ? box->area() : 0.0;
    if (area > best_area) {
      best_area = area;
      best = i;
    }
  }
  target_ = ids[*best];
  return best;
}

}  // namespace repjudge
