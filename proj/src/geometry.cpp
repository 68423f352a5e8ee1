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

#include "repjudge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "repjudge/error.hpp"

namespace repjudge {

std::optional<BBox> intersect(const BBox& a, const BBox& b) {
  const double x0 = std::max(a.x, b.x);
  const double y0 = std::max(a.y, b.y);
  const double x1 = std::min(a.right(), b.right());
  const double y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  return BBox{x0, y0, x1 - x0, y1 - y0};
}

std::optional<BBox> bounding_box(std::span<const Point> points) {
  if (points.empty()) return std::nullopt;
  double x0 = points[0].x, x1 = points[0].x;
  double y0 = points[0].y, y1 = points[0].y;
  for (const Point& p : points.subspan(1)) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return BBox{x0, y0, x1 - x0, y1 - y0};
}

BBox pad(const BBox& box, double fraction) {
  const double dx = box.w * fraction;
  const double dy = box.h * fraction;
  return BBox{box.x - dx, box.y - dy, box.w + 2 * dx, box.h + 2 * dy};
}

double joint_angle(const Point& a, const Point& b, const Point& c) {
  const double ux = a.x - b.x, uy = a.y - b.y;
  const double vx = c.x - b.x, vy = c.y - b.y;
  if ((ux == 0.0 && uy == 0.0) || (vx == 0.0 && vy == 0.0)) {
    throw Error(ErrorKind::kDegenerateGeometry,
                "joint angle needs two non-zero limb vectors");
  }
  // atan2 of (|u x v|, u . v) stays accurate near 0 and 180 degrees where
  // acos of the normalized dot product loses precision.
  const double cross = ux * vy - uy * vx;
  const double dot = ux * vx + uy * vy;
  return std::atan2(std::abs(cross), dot) * 180.0 / std::numbers::pi;
}

}  // namespace repjudge
