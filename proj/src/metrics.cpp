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

#include "usbench/metrics.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

#include "parallel.hpp"
#include "usbench/errors.hpp"
#include "usbench/ingest.hpp"

namespace usbench {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::optional<std::size_t> find_threshold(const std::vector<double>& grid,
                                          double value) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(grid[i] - value) < 1e-9) return i;
  }
  return std::nullopt;
}

// Detections and ground truths of one dataset grouped by (image, category),
// with IoU matrices precomputed for every non-empty pair.
class CellEvaluator {
 public:
  CellEvaluator(const DatasetAnnotations& dataset,
                const std::vector<Detection>& detections,
                const std::vector<double>& recall_thresholds,
                std::size_t workers)
      : dataset_(dataset),
        detections_(detections),
        recall_thresholds_(recall_thresholds),
        num_images_(dataset.images().size()),
        num_categories_(dataset.categories().size()),
        buckets_(num_images_ * num_categories_) {
    for (std::size_t i = 0; i < detections_.size(); ++i) {
      const auto& det = detections_[i];
      const auto img = dataset.image_index(det.image_id);
      const auto cat = dataset.category_index(det.category_id);
      if (!img || !cat) {
        throw IntegrityError("detection " + std::to_string(i) +
                             " references an unknown image or category");
      }
      buckets_[*img * num_categories_ + *cat].dets.push_back(i);
    }
    const auto& gts = dataset.ground_truths();
    for (std::size_t i = 0; i < gts.size(); ++i) {
      const auto img = *dataset.image_index(gts[i].image_id);
      const auto cat = *dataset.category_index(gts[i].category_id);
      buckets_[img * num_categories_ + cat].gts.push_back(i);
    }
    parallel_for(buckets_.size(), workers,
                 [this](std::size_t b) { prepare(buckets_[b]); });
  }

  // AP for one cell, nullopt when no ground truth counts in it.
  std::optional<double> cell_ap(std::size_t category, double iou_threshold,
                                const ScaleRange& range) const {
    std::vector<MatchResult> matches;
    std::size_t n_gt = 0;
    for (std::size_t img = 0; img < num_images_; ++img) {
      const Bucket& bucket = buckets_[img * num_categories_ + category];
      if (bucket.dets.empty() && bucket.gts.empty()) continue;
      const ImageInfo& image = dataset_.images()[img];
      auto gt_ignored = std::make_unique<bool[]>(bucket.gts.size());
      for (std::size_t g = 0; g < bucket.gts.size(); ++g) {
        const auto& gt = dataset_.ground_truths()[bucket.gts[g]];
        gt_ignored[g] = gt.iscrowd ||
                        !range.bin.contains(
                            measure_ground_truth(gt, image, range.basis));
        n_gt += !gt_ignored[g];
      }
      auto out_of_range = std::make_unique<bool[]>(bucket.dets.size());
      for (std::size_t d = 0; d < bucket.dets.size(); ++d) {
        out_of_range[d] = !range.bin.contains(measure_detection(
            detections_[bucket.dets[d]].bbox, image, range.basis));
      }
      matches.push_back(match_with_ious(
          bucket.ious, bucket.scores,
          std::span<const bool>(gt_ignored.get(), bucket.gts.size()),
          std::span<const bool>(bucket.crowd.get(), bucket.gts.size()),
          std::span<const bool>(out_of_range.get(), bucket.dets.size()),
          iou_threshold));
    }
    const PrCurve curve = pr_curve(matches, n_gt);
    if (!curve.defined) return std::nullopt;
    return average_precision(curve.precision, curve.recall, recall_thresholds_);
  }

 private:
  struct Bucket {
    std::vector<std::size_t> dets;  // indices into detections_, input order
    std::vector<std::size_t> gts;   // indices into ground_truths()
    std::vector<double> scores;
    std::unique_ptr<bool[]> crowd;
    IouMatrix<double> ious;
  };

  void prepare(Bucket& bucket) const {
    std::vector<BBox> det_boxes, gt_boxes;
    for (std::size_t d : bucket.dets) {
      det_boxes.push_back(detections_[d].bbox);
      bucket.scores.push_back(detections_[d].score);
    }
    bucket.crowd = std::make_unique<bool[]>(bucket.gts.size());
    for (std::size_t g = 0; g < bucket.gts.size(); ++g) {
      const auto& gt = dataset_.ground_truths()[bucket.gts[g]];
      gt_boxes.push_back(gt.bbox);
      bucket.crowd[g] = gt.iscrowd;
    }
    bucket.ious = iou_matrix<double>(
        det_boxes, gt_boxes,
        std::span<const bool>(bucket.crowd.get(), bucket.gts.size()));
  }

  const DatasetAnnotations& dataset_;
  const std::vector<Detection>& detections_;
  const std::vector<double>& recall_thresholds_;
  std::size_t num_images_;
  std::size_t num_categories_;
  std::vector<Bucket> buckets_;
};

}  // namespace

std::vector<double> linspace(double start, double stop, std::size_t num) {
  std::vector<double> out(num);
  if (num == 0) return out;
  if (num == 1) {
    out[0] = start;
    return out;
  }
  const double step = (stop - start) / static_cast<double>(num - 1);
  for (std::size_t i = 0; i < num; ++i) {
    out[i] = static_cast<double>(i) * step + start;
  }
  out.back() = stop;
  return out;
}

void validate_params(const EvalParams& params) {
  auto strictly_increasing = [](const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) ==
           v.end();
  };
  if (params.iou_thresholds.empty() ||
      !strictly_increasing(params.iou_thresholds)) {
    throw ConfigError("IoU thresholds must be non-empty and strictly increasing");
  }
  for (double t : params.iou_thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("IoU threshold outside (0, 1]");
  }
  if (params.recall_thresholds.empty() ||
      !strictly_increasing(params.recall_thresholds) ||
      params.recall_thresholds.front() < 0.0 ||
      params.recall_thresholds.back() > 1.0) {
    throw ConfigError(
        "recall thresholds must be strictly increasing within [0, 1]");
  }
  if (params.max_dets == 0) throw ConfigError("max_dets must be >= 1");
  bool has_all = false;
  for (const auto& p : params.partitions) {
    try {
      validate_partition(p);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    has_all |= p.name == kAllPartition;
  }
  if (!has_all) throw ConfigError("partitions must include \"all\"");
}

std::map<std::string, double> kitti_iou_overrides() {
  return {{"vehicle", 0.7}, {"pedestrian", 0.5}, {"cyclist", 0.5}};
}

PrCurve pr_curve(std::span<const MatchResult> matches, std::size_t n_gt) {
  struct Entry {
    double score;
    bool tp;
  };
  std::vector<Entry> entries;
  for (const auto& m : matches) {
    for (std::size_t d = 0; d < m.scores.size(); ++d) {
      if (m.det_ignored[d]) continue;
      entries.push_back({m.scores[d], m.det_matched[d].has_value()});
    }
  }
  PrCurve curve;
  curve.defined = n_gt > 0;
  if (!curve.defined) return curve;
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.score > b.score; });
  const auto n = static_cast<Eigen::Index>(entries.size());
  curve.precision.resize(n);
  curve.recall.resize(n);
  double tp = 0.0, fp = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (entries[static_cast<std::size_t>(k)].tp) {
      tp += 1.0;
    } else {
      fp += 1.0;
    }
    curve.precision(k) = tp / (tp + fp);
    curve.recall(k) = tp / static_cast<double>(n_gt);
  }
  return curve;
}

double average_precision(const Eigen::ArrayXd& precision,
                         const Eigen::ArrayXd& recall,
                         std::span<const double> recall_thresholds) {
  if (recall_thresholds.empty()) return 0.0;
  Eigen::ArrayXd envelope = precision;
  for (Eigen::Index i = envelope.size() - 1; i > 0; --i) {
    envelope(i - 1) = std::max(envelope(i - 1), envelope(i));
  }
  const double* begin = recall.data();
  const double* end = begin + recall.size();
  double sum = 0.0;
  for (double r : recall_thresholds) {
    const double* it = std::lower_bound(begin, end, r);
    if (it != end) sum += envelope(it - begin);
  }
  return sum / static_cast<double>(recall_thresholds.size());
}

std::optional<double> aggregate_ap(std::span<const std::optional<double>> values,
                                   UndefinedPolicy policy) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    } else if (policy == UndefinedPolicy::kZeroFill) {
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

PartitionAp::PartitionAp(ScalePartition partition, std::size_t num_thresholds,
                         std::size_t num_categories)
    : partition_(std::move(partition)),
      num_thresholds_(num_thresholds),
      num_categories_(num_categories),
      values_(num_thresholds * num_categories * partition_.size(), kNaN) {}

std::size_t PartitionAp::index(std::size_t t, std::size_t c,
                               std::size_t bin) const {
  return (t * num_categories_ + c) * partition_.size() + bin;
}

std::optional<double> PartitionAp::at(std::size_t t, std::size_t c,
                                      std::size_t bin) const {
  const double v = values_.at(index(t, c, bin));
  if (std::isnan(v)) return std::nullopt;
  return v;
}

void PartitionAp::set(std::size_t t, std::size_t c, std::size_t bin,
                      std::optional<double> ap) {
  values_.at(index(t, c, bin)) = ap ? *ap : kNaN;
}

std::optional<double> PartitionAp::bin_mean(std::size_t bin,
                                            UndefinedPolicy policy) const {
  std::vector<std::optional<double>> cells;
  for (std::size_t t = 0; t < num_thresholds_; ++t)
    for (std::size_t c = 0; c < num_categories_; ++c)
      cells.push_back(at(t, c, bin));
  return aggregate_ap(cells, policy);
}

std::optional<double> PartitionAp::threshold_mean(std::size_t t, std::size_t bin,
                                                  UndefinedPolicy policy) const {
  std::vector<std::optional<double>> cells;
  for (std::size_t c = 0; c < num_categories_; ++c) cells.push_back(at(t, c, bin));
  return aggregate_ap(cells, policy);
}

std::optional<double> PartitionAp::category_mean(std::size_t c, std::size_t bin,
                                                 UndefinedPolicy policy) const {
  std::vector<std::optional<double>> cells;
  for (std::size_t t = 0; t < num_thresholds_; ++t) cells.push_back(at(t, c, bin));
  return aggregate_ap(cells, policy);
}

const PartitionAp* EvalResult::find_partition(const std::string& name) const {
  for (const auto& p : ap_tensor) {
    if (p.partition().name == name) return &p;
  }
  return nullptr;
}

EvalResult evaluate_dataset(const DatasetAnnotations& dataset,
                            const std::vector<Detection>& detections,
                            const EvalParams& params, std::size_t workers) {
  validate_params(params);
  const auto capped = cap_detections_per_image(detections, params.max_dets);
  const CellEvaluator evaluator(dataset, capped, params.recall_thresholds,
                                workers);

  EvalResult result;
  result.dataset_id = dataset.dataset_id();
  result.params = params;
  for (const auto& c : dataset.categories()) result.category_names.push_back(c.name);

  const std::size_t num_t = params.iou_thresholds.size();
  const std::size_t num_c = dataset.categories().size();
  for (const auto& p : params.partitions) {
    result.ap_tensor.emplace_back(p, num_t, num_c);
  }

  // One task per (partition, bin, category, threshold); each writes only
  // its own slot, so the outcome is independent of scheduling.
  struct Task {
    std::size_t partition, bin, category, threshold;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < params.partitions.size(); ++p)
    for (std::size_t b = 0; b < params.partitions[p].size(); ++b)
      for (std::size_t c = 0; c < num_c; ++c)
        for (std::size_t t = 0; t < num_t; ++t) tasks.push_back({p, b, c, t});
  std::vector<std::optional<double>> cell_values(tasks.size());
  parallel_for(tasks.size(), workers, [&](std::size_t i) {
    const Task& task = tasks[i];
    const auto& partition = params.partitions[task.partition];
    const ScaleRange range{partition.bins[task.bin], partition.basis};
    cell_values[i] = evaluator.cell_ap(
        task.category, params.iou_thresholds[task.threshold], range);
  });
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& task = tasks[i];
    result.ap_tensor[task.partition].set(task.threshold, task.category, task.bin,
                                         cell_values[i]);
  }

  const UndefinedPolicy policy = params.category_policy;
  const PartitionAp& all = *result.find_partition(kAllPartition);
  result.cap = all.bin_mean(0, policy);
  if (auto t = find_threshold(params.iou_thresholds, 0.5)) {
    result.ap50 = all.threshold_mean(*t, 0, policy);
  }
  if (auto t = find_threshold(params.iou_thresholds, 0.75)) {
    result.ap75 = all.threshold_mean(*t, 0, policy);
  }
  for (std::size_t c = 0; c < num_c; ++c) {
    result.per_category_cap.push_back(all.category_mean(c, 0, policy));
  }
  auto bin_means = [&](const char* name) {
    std::vector<std::optional<double>> out;
    if (const PartitionAp* p = result.find_partition(name)) {
      for (std::size_t b = 0; b < p->num_bins(); ++b) {
        out.push_back(p->bin_mean(b, policy));
      }
    }
    return out;
  };
  result.ap_sml = bin_means(kCocoPartition);
  result.asap = bin_means(kAsapPartition);
  result.rsap = bin_means(kRsapPartition);

  if (params.category_iou_overrides) {
    KapResult kap;
    std::vector<double> thresholds;
    for (const auto& cat : dataset.categories()) {
      auto it = params.category_iou_overrides->find(cat.name);
      if (it == params.category_iou_overrides->end()) {
        throw ConfigError("no KAP IoU threshold for category '" + cat.name + "'");
      }
      thresholds.push_back(it->second);
    }
    kap.per_category.resize(num_c);
    parallel_for(num_c, workers, [&](std::size_t c) {
      kap.per_category[c] = {
          dataset.categories()[c].name, thresholds[c],
          evaluator.cell_ap(c, thresholds[c], ScaleRange::everything())};
    });
    std::vector<std::optional<double>> aps;
    for (const auto& pc : kap.per_category) aps.push_back(pc.ap);
    kap.kap = aggregate_ap(aps, policy);
    result.kap = std::move(kap);
  }
  return result;
}

double aggregate_mcap(std::span<const double> caps) {
  if (caps.empty()) throw DomainError("mCAP needs at least one dataset");
  double sum = 0.0;
  for (double c : caps) sum += c;
  return sum / static_cast<double>(caps.size());
}

KapResult kitti_style_ap(const DatasetAnnotations& dataset,
                         const std::vector<Detection>& detections,
                         const std::map<std::string, double>& overrides,
                         std::size_t max_dets, std::size_t workers) {
  EvalParams params;
  params.max_dets = max_dets;
  params.partitions = {all_scales_partition()};
  params.iou_thresholds = {0.5};
  params.category_iou_overrides = overrides;
  return *evaluate_dataset(dataset, detections, params, workers).kap;
}

}  // namespace usbench
