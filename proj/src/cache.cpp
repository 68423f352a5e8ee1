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

#include "repjudge/cache.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "repjudge/error.hpp"

namespace repjudge {

void CachePolicy::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kConfiguration, what); };
  if (!(dc_offset >= 0.0)) fail("dc_offset must be >= 0");
  if (!(rtc_tau >= 0.0)) fail("rtc_tau must be >= 0");
  if (patch_width < 1 || patch_height < 1) fail("patch dimensions must be >= 1");
  if (smoothing_kernel < 1 || smoothing_kernel % 2 == 0) fail("smoothing kernel must be odd");
  if (!(smoothing_sigma > 0.0)) fail("smoothing sigma must be > 0");
  if (!(roi_padding >= 0.0)) fail("roi_padding must be >= 0");
}

GrayFrame::GrayFrame(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(std::max(w, 0)) * std::max(h, 0), fill) {}

void GrayFrame::validate() const {
  if (width < 1 || height < 1 ||
      pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorKind::kShape, "gray frame buffer does not match its dimensions");
  }
}

BBox dc_bbox(const BBox& detection, double offset, int frame_width, int frame_height) {
  const double x0 = std::clamp(detection.x - offset, 0.0, static_cast<double>(frame_width));
  const double y0 = std::clamp(detection.y - offset, 0.0, static_cast<double>(frame_height));
  const double x1 =
      std::clamp(detection.right() + offset, 0.0, static_cast<double>(frame_width));
  const double y1 =
      std::clamp(detection.bottom() + offset, 0.0, static_cast<double>(frame_height));
  return {x0, y0, x1 - x0, y1 - y0};
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  if (size < 1 || size % 2 == 0 || !(sigma > 0.0)) {
    throw Error(ErrorKind::kConfiguration, "gaussian kernel needs odd size and sigma > 0");
  }
  std::vector<double> taps(static_cast<std::size_t>(size));
  const int r = size / 2;
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    taps[static_cast<std::size_t>(i + r)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += taps[static_cast<std::size_t>(i + r)];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

Patch gaussian_blur(const Patch& input, int size, double sigma) {
  const std::vector<double> k = gaussian_kernel(size, sigma);
  const int r = size / 2;
  const int w = input.width;
  const int h = input.height;
  Patch tmp{w, h, std::vector<double>(input.values.size())};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        acc += k[static_cast<std::size_t>(i + r)] * input.at(std::clamp(x + i, 0, w - 1), y);
      }
      tmp.values[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  Patch out{w, h, std::vector<double>(input.values.size())};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        acc += k[static_cast<std::size_t>(i + r)] * tmp.at(x, std::clamp(y + i, 0, h - 1));
      }
      out.values[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

namespace {

// For each output cell, the source cells it covers and their area weights.
std::vector<std::vector<std::pair<int, double>>> area_weights(int in, int out) {
  std::vector<std::vector<std::pair<int, double>>> weights(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    const double lo = o * scale;
    const double hi = (o + 1) * scale;
    for (int i = static_cast<int>(std::floor(lo)); i < in && i < hi; ++i) {
      const double overlap = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
      if (overlap > 0.0) weights[static_cast<std::size_t>(o)].emplace_back(i, overlap / scale);
    }
  }
  return weights;
}

}  // namespace

Patch resize_area(const Patch& input, int width, int height) {
  if (width < 1 || height < 1 || input.width < 1 || input.height < 1) {
    throw Error(ErrorKind::kShape, "resize needs non-empty input and output");
  }
  const auto wx = area_weights(input.width, width);
  const auto wy = area_weights(input.height, height);
  Patch rows{width, input.height,
             std::vector<double>(static_cast<std::size_t>(width) * input.height)};
  for (int y = 0; y < input.height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (const auto& [i, w] : wx[static_cast<std::size_t>(x)]) acc += w * input.at(i, y);
      rows.values[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  Patch out{width, height, std::vector<double>(static_cast<std::size_t>(width) * height)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (const auto& [i, w] : wy[static_cast<std::size_t>(y)]) acc += w * rows.at(x, i);
      out.values[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  return out;
}

Patch roi_patch(const GrayFrame& frame, const BBox& roi, const CachePolicy& policy) {
  frame.validate();
  const BBox padded = pad(roi, policy.roi_padding);
  const int x0 = std::max(0, static_cast<int>(std::floor(padded.x)));
  const int y0 = std::max(0, static_cast<int>(std::floor(padded.y)));
  const int x1 = std::min(frame.width, static_cast<int>(std::ceil(padded.right())));
  const int y1 = std::min(frame.height, static_cast<int>(std::ceil(padded.bottom())));
  if (x1 <= x0 || y1 <= y0) throw Error(ErrorKind::kRoi, "ROI does not intersect the frame");
  Patch crop{x1 - x0, y1 - y0, {}};
  crop.values.reserve(static_cast<std::size_t>(crop.width) * crop.height);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) crop.values.push_back(frame.at(x, y));
  }
  const Patch smooth = gaussian_blur(crop, policy.smoothing_kernel, policy.smoothing_sigma);
  return resize_area(smooth, policy.patch_width, policy.patch_height);
}

double rpd(const Patch& a, const Patch& b) {
  if (a.width != b.width || a.height != b.height || a.values.size() != b.values.size()) {
    throw Error(ErrorKind::kShape, "rpd: patch sizes differ");
  }
  if (a.values.empty()) throw Error(ErrorKind::kShape, "rpd: empty patches");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) sum += std::abs(a.values[i] - b.values[i]);
  return sum / static_cast<double>(a.values.size());
}

std::string_view to_string(CacheDecision decision) {
  return decision == CacheDecision::kSkip ? "skip" : "infer";
}

CacheDecision cache_decide(double d, double tau) {
  return d <= tau ? CacheDecision::kSkip : CacheDecision::kInfer;
}

RoiTemporalCache::RoiTemporalCache(CachePolicy policy) : policy_(std::move(policy)) {
  policy_.validate();
}

RoiTemporalCache::Result RoiTemporalCache::decide(const GrayFrame& frame, const BBox& roi) {
  Patch patch = roi_patch(frame, roi, policy_);
  Result result;
  if (reference_) {
    result.rpd = rpd(patch, *reference_);
    result.decision = cache_decide(*result.rpd, policy_.rtc_tau);
  }
  if (result.decision == CacheDecision::kInfer || policy_.strict_chaining) {
    reference_ = std::move(patch);
  }
  return result;
}

}  // namespace repjudge
