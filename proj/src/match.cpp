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

#include "usbench/match.hpp"

#include <memory>
#include <numeric>

namespace usbench {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Best candidate among columns passing `eligible`: highest IoU >= thr,
// lowest column on ties.
template <typename Eligible>
std::size_t best_column(const IouMatrix<double>& ious, Eigen::Index row,
                        double thr, Eligible eligible) {
  std::size_t best = kNone;
  double best_iou = -1.0;
  for (Eigen::Index g = 0; g < ious.cols(); ++g) {
    const auto col = static_cast<std::size_t>(g);
    if (!eligible(col)) continue;
    const double v = ious(row, g);
    if (v >= thr && v > best_iou) {
      best = col;
      best_iou = v;
    }
  }
  return best;
}

}  // namespace

std::size_t MatchResult::matched_pairs() const {
  std::size_t n = 0;
  for (const auto& m : det_matched) n += m && !gt_ignored[*m];
  return n;
}

std::size_t MatchResult::num_non_ignored_gt() const {
  return static_cast<std::size_t>(
      std::count(gt_ignored.begin(), gt_ignored.end(), false));
}

MatchResult match_with_ious(const IouMatrix<double>& ious,
                            std::span<const double> scores,
                            std::span<const bool> gt_ignored,
                            std::span<const bool> gt_crowd,
                            std::span<const bool> det_out_of_range,
                            double iou_threshold) {
  const std::size_t num_dets = scores.size();
  const std::size_t num_gts = gt_ignored.size();
  MatchResult r;
  r.det_matched.assign(num_dets, std::nullopt);
  r.det_ignored.assign(num_dets, false);
  r.gt_matched.assign(num_gts, std::nullopt);
  r.gt_ignored.assign(gt_ignored.begin(), gt_ignored.end());
  r.scores.assign(scores.begin(), scores.end());

  std::vector<std::size_t> order(num_dets);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  const double thr = effective_iou_threshold(iou_threshold);
  for (std::size_t d : order) {
    const auto row = static_cast<Eigen::Index>(d);
    std::size_t g = best_column(ious, row, thr, [&](std::size_t col) {
      return !gt_ignored[col] && !r.gt_matched[col];
    });
    if (g == kNone) {
      g = best_column(ious, row, thr, [&](std::size_t col) {
        return gt_ignored[col] && (gt_crowd[col] || !r.gt_matched[col]);
      });
    }
    if (g != kNone) {
      r.det_matched[d] = g;
      r.det_ignored[d] = gt_ignored[g];
      if (!r.gt_matched[g]) r.gt_matched[g] = d;
    } else {
      r.det_ignored[d] = det_out_of_range[d];
    }
  }
  return r;
}

MatchResult match_image_category(std::span<const Detection> dets,
                                 std::span<const GroundTruth> gts,
                                 const ImageInfo& image, double iou_threshold,
                                 const ScaleRange& range) {
  std::vector<BBox> det_boxes, gt_boxes;
  std::vector<double> scores;
  // std::vector<bool> is not contiguous, so flags live in bool arrays.
  auto out_of_range = std::make_unique<bool[]>(dets.size());
  auto crowd = std::make_unique<bool[]>(gts.size());
  auto ignored = std::make_unique<bool[]>(gts.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    det_boxes.push_back(dets[i].bbox);
    scores.push_back(dets[i].score);
    out_of_range[i] =
        !range.bin.contains(measure_detection(dets[i].bbox, image, range.basis));
  }
  for (std::size_t i = 0; i < gts.size(); ++i) {
    gt_boxes.push_back(gts[i].bbox);
    crowd[i] = gts[i].iscrowd;
    ignored[i] = gts[i].iscrowd ||
                 !range.bin.contains(
                     measure_ground_truth(gts[i], image, range.basis));
  }
  const std::span<const bool> crowd_span(crowd.get(), gts.size());
  const auto ious = iou_matrix<double>(det_boxes, gt_boxes, crowd_span);
  return match_with_ious(ious, scores,
                         std::span<const bool>(ignored.get(), gts.size()),
                         crowd_span,
                         std::span<const bool>(out_of_range.get(), dets.size()),
                         iou_threshold);
}

}  // namespace usbench
