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

// IoU and greedy detection-to-ground-truth matching.

#ifndef USBENCH_MATCH_HPP_
#define USBENCH_MATCH_HPP_

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "usbench/scale.hpp"
#include "usbench/types.hpp"

namespace usbench {

template <typename Scalar>
Scalar intersection_area(const BasicBox<Scalar>& a, const BasicBox<Scalar>& b) {
  const Scalar iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const Scalar ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= Scalar(0) || ih <= Scalar(0)) return Scalar(0);
  return iw * ih;
}

template <typename Scalar>
Scalar iou(const BasicBox<Scalar>& a, const BasicBox<Scalar>& b) {
  const Scalar inter = intersection_area(a, b);
  if (inter <= Scalar(0)) return Scalar(0);
  return inter / (a.area() + b.area() - inter);
}

// Intersection over the detection's own area; crowd regions absorb any
// detection lying inside them.
template <typename Scalar>
Scalar iou_crowd(const BasicBox<Scalar>& det, const BasicBox<Scalar>& crowd) {
  const Scalar inter = intersection_area(det, crowd);
  if (inter <= Scalar(0)) return Scalar(0);
  return inter / det.area();
}

template <typename Scalar>
using IouMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// rows = detections, cols = ground truths. Crowd columns use iou_crowd.
template <typename Scalar>
IouMatrix<Scalar> iou_matrix(std::span<const BasicBox<Scalar>> dets,
                             std::span<const BasicBox<Scalar>> gts,
                             std::span<const bool> crowd) {
  IouMatrix<Scalar> out(static_cast<Eigen::Index>(dets.size()),
                        static_cast<Eigen::Index>(gts.size()));
  for (Eigen::Index g = 0; g < out.cols(); ++g) {
    const auto& gt = gts[static_cast<std::size_t>(g)];
    const bool is_crowd = crowd[static_cast<std::size_t>(g)];
    for (Eigen::Index d = 0; d < out.rows(); ++d) {
      const auto& det = dets[static_cast<std::size_t>(d)];
      out(d, g) = is_crowd ? iou_crowd(det, gt) : iou(det, gt);
    }
  }
  return out;
}

// Scale window a match is restricted to.
struct ScaleRange {
  ScaleBin bin;
  ScaleBasis basis = ScaleBasis::kArea;

  static ScaleRange everything() { return {}; }
};

// Outcome for one (image, category, IoU threshold, scale range). Arrays are
// aligned with the input order of detections / ground truths; matched ids
// are indices into those inputs.
struct MatchResult {
  std::vector<std::optional<std::size_t>> det_matched;
  std::vector<bool> det_ignored;
  std::vector<std::optional<std::size_t>> gt_matched;
  std::vector<bool> gt_ignored;
  std::vector<double> scores;

  // One-to-one pairs with non-ignored ground truth. Detections absorbed by
  // crowd or out-of-range boxes are ignored, not paired.
  std::size_t matched_pairs() const;
  std::size_t num_non_ignored_gt() const;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

// Effective threshold: a threshold of exactly 1 still admits IoUs that lose
// the last ulp to rounding.
inline double effective_iou_threshold(double iou_threshold) {
  return std::min(iou_threshold, 1.0 - 1e-10);
}

// Greedy matching over pre-computed IoUs (rows = dets, cols = gts; crowd
// columns already hold crowd IoU). Detections are visited by descending
// score, ties in input order. Each takes the unmatched in-range GT with the
// highest IoU >= threshold (lowest index on ties); failing that, an ignored
// GT (crowds may absorb several detections) which makes it ignored too.
// Unmatched detections outside the range are ignored, otherwise false
// positives.
MatchResult match_with_ious(const IouMatrix<double>& ious,
                            std::span<const double> scores,
                            std::span<const bool> gt_ignored,
                            std::span<const bool> gt_crowd,
                            std::span<const bool> det_out_of_range,
                            double iou_threshold);

// Convenience wrapper: computes IoUs and range flags, then matches.
// All detections and ground truths must belong to `image` and one category.
MatchResult match_image_category(std::span<const Detection> dets,
                                 std::span<const GroundTruth> gts,
                                 const ImageInfo& image, double iou_threshold,
                                 const ScaleRange& range);

}  // namespace usbench

#endif  // USBENCH_MATCH_HPP_
