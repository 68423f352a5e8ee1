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

// Detector cache (DC) and ROI temporal cache (RTC).

#ifndef REPJUDGE_CACHE_HPP_
#define REPJUDGE_CACHE_HPP_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "repjudge/geometry.hpp"

namespace repjudge {

struct CachePolicy {
  bool dc_enabled = false;
  double dc_offset = 20.0;  // px added on every side of the first detection
  bool rtc_enabled = false;
  double rtc_tau = 0.0;     // mean 8-bit intensity difference
  int patch_width = 32;
  int patch_height = 32;
  int smoothing_kernel = 5;  // odd, >= 1
  double smoothing_sigma = 1.0;
  double roi_padding = 0.1;  // fraction of ROI width/height per side
  // Compare against the previous frame's patch even when that frame was
  // skipped, instead of the last inferred frame's patch.
  bool strict_chaining = false;

  // Throws kConfiguration.
  void validate() const;
};

// 8-bit grayscale image, row-major.
struct GrayFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayFrame() = default;
  GrayFrame(int w, int h, std::uint8_t fill = 0);

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

  // Throws kShape when the buffer length is not width * height.
  void validate() const;

  friend bool operator==(const GrayFrame&, const GrayFrame&) = default;
};

// Floating-point intensity grid used for smoothing and patches.
struct Patch {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const Patch&, const Patch&) = default;
};

struct CacheStats {
  std::int64_t frames_total = 0;
  std::int64_t detector_invocations = 0;
  std::int64_t pose_inferences = 0;
  std::int64_t rtc_skips = 0;
  std::vector<double> rpd_trace;  // one per frame that had a reference patch

  friend bool operator==(const CacheStats&, const CacheStats&) = default;
};

// Enlarges the box by `offset` px on every side and clamps it to the frame.
BBox dc_bbox(const BBox& detection, double offset, int frame_width, int frame_height);

// Normalized 1-D Gaussian taps of odd length `size`.
std::vector<double> gaussian_kernel(int size, double sigma);

// Separable Gaussian blur with clamp-to-edge borders.
Patch gaussian_blur(const Patch& input, int size, double sigma);

// Area-averaging resample to (width, height); handles both shrinking and
// enlarging.
Patch resize_area(const Patch& input, int width, int height);

// Crop of `roi` (padded by policy.roi_padding and clamped to the frame),
// smoothed and resampled to the policy's patch size. Throws kRoi when the
// padded ROI misses the frame.
Patch roi_patch(const GrayFrame& frame, const BBox& roi, const CachePolicy& policy);

// Mean absolute difference. Throws kShape on a size mismatch.
double rpd(const Patch& a, const Patch& b);

enum class CacheDecision { kSkip, kInfer };

std::string_view to_string(CacheDecision decision);

// Skip iff d <= tau.
CacheDecision cache_decide(double d, double tau);

// Per-stream RTC state. `decide` compares the frame's ROI patch with the
// reference and reports the decision; the reference moves to this frame's
// patch on INFER (and on every frame with strict chaining).
class RoiTemporalCache {
 public:
  explicit RoiTemporalCache(CachePolicy policy);

  struct Result {
    CacheDecision decision = CacheDecision::kInfer;
    std::optional<double> rpd;  // nullopt without a reference patch
  };

  Result decide(const GrayFrame& frame, const BBox& roi);
  void reset() { reference_.reset(); }

 private:
  CachePolicy policy_;
  std::optional<Patch> reference_;
};

}  // namespace repjudge

#endif  // REPJUDGE_CACHE_HPP_
