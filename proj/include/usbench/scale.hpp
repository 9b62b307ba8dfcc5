// Copyright 2026 The usbench Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Object scale arithmetic and the scale partitions behind AP_S/M/L, ASAP
// and RSAP.

#ifndef USBENCH_SCALE_HPP_
#define USBENCH_SCALE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "usbench/types.hpp"

namespace usbench {

// sqrt(w * h).
template <typename Scalar>
Scalar absolute_scale(const BasicBox<Scalar>& box) {
  using std::sqrt;
  return sqrt(box.w * box.h);
}

// sqrt(w * h / (W * H)), clamped to 1 for boxes larger than the image.
template <typename Scalar>
Scalar relative_scale(const BasicBox<Scalar>& box, const ImageInfo& image) {
  using std::sqrt;
  const Scalar image_area =
      static_cast<Scalar>(image.width) * static_cast<Scalar>(image.height);
  return std::min(Scalar(1), sqrt(box.w * box.h / image_area));
}

// Quantity a partition bins on.
enum class ScaleBasis {
  kArea,           // effective area in pixels^2 (COCO S/M/L)
  kAbsoluteScale,  // sqrt(w*h) in pixels
  kRelativeScale,  // sqrt(w*h / (W*H))
};

const char* to_string(ScaleBasis basis);

// Half-open interval (lower, upper].
struct ScaleBin {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();

  bool contains(double value) const { return lower < value && value <= upper; }

  friend bool operator==(const ScaleBin&, const ScaleBin&) = default;
};

struct ScalePartition {
  std::string name;
  ScaleBasis basis = ScaleBasis::kArea;
  std::vector<ScaleBin> bins;

  std::size_t size() const { return bins.size(); }
};

// Throws DomainError unless the bins are contiguous, start at 0 and end at
// +inf (area / absolute) or 1 (relative).
void validate_partition(const ScalePartition& partition);

// Index of the unique bin with lower < value <= upper. Throws DomainError
// for value <= 0 or NaN.
std::size_t assign_bin(double value, const ScalePartition& partition);

// Single bin (0, inf) on area.
ScalePartition all_scales_partition();
// (0, 32^2], (32^2, 96^2], (96^2, inf) on effective area.
ScalePartition coco_area_partition();
// (0, 8], (8, 16], ..., (512, 1024], (1024, inf) on sqrt(w*h).
ScalePartition absolute_octave_partition();
// (0, 1/256], (1/256, 1/128], ..., (1/2, 1] on sqrt(w*h / (W*H)).
ScalePartition relative_octave_partition();

// Value a ground truth contributes to a partition with the given basis.
double measure_ground_truth(const GroundTruth& gt, const ImageInfo& image,
                            ScaleBasis basis);
// Value a detection contributes; detections have no mask area.
double measure_detection(const BBox& box, const ImageInfo& image,
                         ScaleBasis basis);

}  // namespace usbench

#endif  // USBENCH_SCALE_HPP_
