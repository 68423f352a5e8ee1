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

#ifndef REPJUDGE_GEOMETRY_HPP_
#define REPJUDGE_GEOMETRY_HPP_

#include <optional>
#include <span>

namespace repjudge {

// Image coordinates: x grows right, y grows down, units are pixels.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned box (x, y) top-left corner plus width and height.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

// Overlap of two boxes; nullopt when they share no area.
std::optional<BBox> intersect(const BBox& a, const BBox& b);

// Tight box around the points; nullopt for an empty span.
std::optional<BBox> bounding_box(std::span<const Point> points);

// Grows the box by `fraction` of its own width/height on every side.
BBox pad(const BBox& box, double fraction);

// Interior angle at vertex `b` of the triangle (a, b, c), in degrees within
// [0, 180]. Throws kDegenerateGeometry when either limb vector has zero
// length.
double joint_angle(const Point& a, const Point& b, const Point& c);

}  // namespace repjudge

#endif  // REPJUDGE_GEOMETRY_HPP_
