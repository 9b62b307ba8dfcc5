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

// Precision/recall curves, 101-point interpolated AP, and the dataset-level
// aggregates built on them (CAP, AP50/75, AP_S/M/L, ASAP, RSAP, KAP, mCAP).

#ifndef USBENCH_METRICS_HPP_
#define USBENCH_METRICS_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "usbench/match.hpp"
#include "usbench/scale.hpp"
#include "usbench/types.hpp"

namespace usbench {

inline constexpr char kAllPartition[] = "all";
inline constexpr char kCocoPartition[] = "coco";
inline constexpr char kAsapPartition[] = "asap";
inline constexpr char kRsapPartition[] = "rsap";

// start + i * step, last element pinned to stop (numpy.linspace).
std::vector<double> linspace(double start, double stop, std::size_t num);

// How undefined cells (no ground truth) enter a mean.
enum class UndefinedPolicy {
  kExcludeFromMean,  // reference-evaluator convention
  kZeroFill,         // undefined counts as 0; plain |C_d| divisor
};

struct EvalParams {
  std::vector<double> iou_thresholds = linspace(0.5, 0.95, 10);
  std::vector<double> recall_thresholds = linspace(0.0, 1.0, 101);
  std::size_t max_dets = 100;
  std::vector<ScalePartition> partitions = {
      all_scales_partition(), coco_area_partition(),
      absolute_octave_partition(), relative_octave_partition()};
  // Category name -> single IoU threshold; enables KAP when set.
  std::optional<std::map<std::string, double>> category_iou_overrides;
  UndefinedPolicy category_policy = UndefinedPolicy::kExcludeFromMean;
};

// Throws ConfigError on unsorted or empty threshold grids, max_dets == 0,
// a missing "all" partition, or an invalid partition.
void validate_params(const EvalParams& params);

// IoU thresholds used for KAP: vehicle 0.7, pedestrian 0.5, cyclist 0.5.
std::map<std::string, double> kitti_iou_overrides();

struct PrCurve {
  Eigen::ArrayXd precision;
  Eigen::ArrayXd recall;
  // False when the cell has no non-ignored ground truth.
  bool defined = false;
};

// Pools the matches (in the order given, detections in input order), drops
// ignored detections, sorts stably by descending score and accumulates
// TP/FP.
PrCurve pr_curve(std::span<const MatchResult> matches, std::size_t n_gt);

// Precision envelope (right-to-left running max) sampled at the first
// recall >= r for each r; 0 past the end of the curve. Mean over samples.
double average_precision(const Eigen::ArrayXd& precision,
                         const Eigen::ArrayXd& recall,
                         std::span<const double> recall_thresholds);

// Mean of the defined values (or of all values with undefined as 0).
// nullopt when nothing remains to average.
std::optional<double> aggregate_ap(std::span<const std::optional<double>> values,
                                   UndefinedPolicy policy);

// AP cells of one partition, indexed by (IoU threshold, category, bin).
class PartitionAp {
 public:
  PartitionAp() = default;
  PartitionAp(ScalePartition partition, std::size_t num_thresholds,
              std::size_t num_categories);

  const ScalePartition& partition() const { return partition_; }
  std::size_t num_thresholds() const { return num_thresholds_; }
  std::size_t num_categories() const { return num_categories_; }
  std::size_t num_bins() const { return partition_.size(); }

  std::optional<double> at(std::size_t t, std::size_t c, std::size_t bin) const;
  void set(std::size_t t, std::size_t c, std::size_t bin,
           std::optional<double> ap);

  // Mean over thresholds and categories of one bin.
  std::optional<double> bin_mean(std::size_t bin, UndefinedPolicy policy) const;
  // Mean over categories at one threshold index, for one bin.
  std::optional<double> threshold_mean(std::size_t t, std::size_t bin,
                                       UndefinedPolicy policy) const;
  // Mean over thresholds for one category, for one bin.
  std::optional<double> category_mean(std::size_t c, std::size_t bin,
                                      UndefinedPolicy policy) const;

 private:
  std::size_t index(std::size_t t, std::size_t c, std::size_t bin) const;

  ScalePartition partition_;
  std::size_t num_thresholds_ = 0;
  std::size_t num_categories_ = 0;
  // NaN marks an undefined cell.
  std::vector<double> values_;
};

struct CategoryKap {
  std::string category;
  double iou_threshold = 0.0;
  std::optional<double> ap;
};

struct KapResult {
  std::optional<double> kap;
  std::vector<CategoryKap> per_category;
};

struct EvalResult {
  std::string dataset_id;
  EvalParams params;
  std::vector<std::string> category_names;
  std::vector<PartitionAp> ap_tensor;

  std::optional<double> cap;
  std::optional<double> ap50;
  std::optional<double> ap75;
  // Small, medium, large; empty when the "coco" partition was not requested.
  std::vector<std::optional<double>> ap_sml;
  std::vector<std::optional<double>> asap;
  std::vector<std::optional<double>> rsap;
  std::vector<std::optional<double>> per_category_cap;
  std::optional<KapResult> kap;

  const PartitionAp* find_partition(const std::string& name) const;
};

// Caps detections per image at params.max_dets (idempotent when already
// capped), matches every (threshold, category, partition bin) cell and
// aggregates. Cells are distributed over `workers` threads; the result does
// not depend on the worker count.
EvalResult evaluate_dataset(const DatasetAnnotations& dataset,
                            const std::vector<Detection>& detections,
                            const EvalParams& params, std::size_t workers = 1);

// Mean over datasets. Throws DomainError for an empty list.
double aggregate_mcap(std::span<const double> caps);

// Mean over categories of the AP at each category's own IoU threshold
// (all-scales bin). Throws ConfigError when a dataset category has no
// override.
KapResult kitti_style_ap(const DatasetAnnotations& dataset,
                         const std::vector<Detection>& detections,
                         const std::map<std::string, double>& overrides,
                         std::size_t max_dets = 100, std::size_t workers = 1);

}  // namespace usbench

#endif  // USBENCH_METRICS_HPP_
