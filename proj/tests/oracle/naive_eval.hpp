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

// Naive reference evaluator. Deliberately a straight, unoptimized
// transcription of the matching and 101-point interpolation rules; it shares
// only the plain data types with the library and none of its functions.

#ifndef USBENCH_TESTS_ORACLE_NAIVE_EVAL_HPP_
#define USBENCH_TESTS_ORACLE_NAIVE_EVAL_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "usbench/types.hpp"

namespace usbench::oracle {

enum class Measure { kArea, kAbsolute, kRelative };

struct Range {
  Measure measure = Measure::kArea;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
};

inline double naive_iou(const BBox& a, const BBox& b, bool crowd) {
  const double ax2 = a.x + a.w, ay2 = a.y + a.h;
  const double bx2 = b.x + b.w, by2 = b.y + b.h;
  const double left = a.x > b.x ? a.x : b.x;
  const double top = a.y > b.y ? a.y : b.y;
  const double right = ax2 < bx2 ? ax2 : bx2;
  const double bottom = ay2 < by2 ? ay2 : by2;
  if (right - left <= 0 || bottom - top <= 0) return 0.0;
  const double inter = (right - left) * (bottom - top);
  const double det_area = a.w * a.h;
  if (crowd) return inter / det_area;
  return inter / (det_area + b.w * b.h - inter);
}

inline double naive_measure(const BBox& box, std::optional<double> mask_area,
                            const ImageInfo& img, Measure m) {
  switch (m) {
    case Measure::kArea:
      return mask_area ? *mask_area : box.w * box.h;
    case Measure::kAbsolute:
      return std::sqrt(box.w * box.h);
    case Measure::kRelative: {
      const double r = std::sqrt(box.w * box.h /
                                 (static_cast<double>(img.width) *
                                  static_cast<double>(img.height)));
      return r > 1.0 ? 1.0 : r;
    }
  }
  return 0.0;
}

inline bool in_range(double v, const Range& r) { return r.lo < v && v <= r.hi; }

// Per-image cap across categories, highest scores first, earlier wins ties.
inline std::vector<Detection> naive_cap(const DatasetAnnotations& ds,
                                        const std::vector<Detection>& dets,
                                        std::size_t max_dets) {
  std::vector<bool> keep(dets.size(), false);
  for (const auto& img : ds.images()) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < dets.size(); ++i)
      if (dets[i].image_id == img.id) idx.push_back(i);
    // Selection by repeated scan for the best remaining.
    std::vector<bool> taken(idx.size(), false);
    for (std::size_t k = 0; k < max_dets && k < idx.size(); ++k) {
      std::size_t best = idx.size();
      for (std::size_t j = 0; j < idx.size(); ++j) {
        if (taken[j]) continue;
        if (best == idx.size() || dets[idx[j]].score > dets[idx[best]].score)
          best = j;
      }
      taken[best] = true;
      keep[idx[best]] = true;
    }
  }
  std::vector<Detection> out;
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (keep[i]) out.push_back(dets[i]);
  return out;
}

struct Outcome {
  double score;
  bool matched;
  bool ignored;
};

// AP of one (threshold, category, range) cell; nullopt when no GT counts.
inline std::optional<double> naive_cell_ap(const DatasetAnnotations& ds,
                                           const std::vector<Detection>& dets,
                                           double t, const Id& cat,
                                           const Range& range,
                                           const std::vector<double>& recalls) {
  std::vector<Outcome> pooled;
  std::size_t npig = 0;
  const double thr = t < 1.0 - 1e-10 ? t : 1.0 - 1e-10;
  for (const auto& img : ds.images()) {
    std::vector<GroundTruth> gts;
    for (const auto& g : ds.ground_truths())
      if (g.image_id == img.id && g.category_id == cat) gts.push_back(g);
    std::vector<Detection> dd;
    for (const auto& d : dets)
      if (d.image_id == img.id && d.category_id == cat) dd.push_back(d);

    std::vector<bool> ign(gts.size());
    for (std::size_t g = 0; g < gts.size(); ++g) {
      ign[g] = gts[g].iscrowd ||
               !in_range(naive_measure(gts[g].bbox, gts[g].area, img,
                                       range.measure),
                         range);
      if (!ign[g]) ++npig;
    }

    // Visit order: repeatedly pick the highest remaining score, earliest on
    // ties.
    std::vector<std::size_t> order;
    std::vector<bool> used(dd.size(), false);
    for (std::size_t k = 0; k < dd.size(); ++k) {
      std::size_t best = dd.size();
      for (std::size_t j = 0; j < dd.size(); ++j) {
        if (used[j]) continue;
        if (best == dd.size() || dd[j].score > dd[best].score) best = j;
      }
      used[best] = true;
      order.push_back(best);
    }

    std::vector<int> gtm(gts.size(), -1);
    std::vector<Outcome> local(dd.size());
    for (std::size_t d : order) {
      int best = -1;
      double best_iou = -1.0;
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (ign[g] || gtm[g] != -1) continue;
        const double v = naive_iou(dd[d].bbox, gts[g].bbox, false);
        if (v >= thr && v > best_iou) {
          best = static_cast<int>(g);
          best_iou = v;
        }
      }
      if (best == -1) {
        for (std::size_t g = 0; g < gts.size(); ++g) {
          if (!ign[g]) continue;
          if (gtm[g] != -1 && !gts[g].iscrowd) continue;
          const double v = naive_iou(dd[d].bbox, gts[g].bbox, gts[g].iscrowd);
          if (v >= thr && v > best_iou) {
            best = static_cast<int>(g);
            best_iou = v;
          }
        }
      }
      if (best >= 0) {
        if (gtm[best] == -1) gtm[best] = static_cast<int>(d);
        local[d] = {dd[d].score, true, static_cast<bool>(ign[best])};
      } else {
        const bool out = !in_range(
            naive_measure(dd[d].bbox, std::nullopt, img, range.measure), range);
        local[d] = {dd[d].score, false, out};
      }
    }
    for (const auto& o : local) pooled.push_back(o);
  }
  if (npig == 0) return std::nullopt;

  // Stable selection sort by descending score.
  std::vector<Outcome> sorted;
  std::vector<bool> used(pooled.size(), false);
  for (std::size_t k = 0; k < pooled.size(); ++k) {
    std::size_t best = pooled.size();
    for (std::size_t j = 0; j < pooled.size(); ++j) {
      if (used[j]) continue;
      if (best == pooled.size() || pooled[j].score > pooled[best].score)
        best = j;
    }
    used[best] = true;
    sorted.push_back(pooled[best]);
  }

  std::vector<double> prec, rec;
  double tp = 0, fp = 0;
  for (const auto& o : sorted) {
    if (o.ignored) continue;
    if (o.matched)
      tp += 1;
    else
      fp += 1;
    prec.push_back(tp / (tp + fp));
    rec.push_back(tp / static_cast<double>(npig));
  }
  for (std::size_t i = prec.size(); i-- > 1;)
    if (prec[i] > prec[i - 1]) prec[i - 1] = prec[i];

  double sum = 0.0;
  for (double r : recalls) {
    for (std::size_t i = 0; i < rec.size(); ++i) {
      if (rec[i] >= r) {
        sum += prec[i];
        break;
      }
    }
  }
  return sum / static_cast<double>(recalls.size());
}

inline std::optional<double> naive_mean(const std::vector<std::optional<double>>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& x : v)
    if (x) {
      s += *x;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return s / static_cast<double>(n);
}

// Mean AP over the given thresholds and all categories for one range.
inline std::optional<double> naive_metric(const DatasetAnnotations& ds,
                                          const std::vector<Detection>& capped,
                                          const std::vector<double>& thresholds,
                                          const Range& range,
                                          const std::vector<double>& recalls) {
  std::vector<std::optional<double>> cells;
  for (double t : thresholds)
    for (const auto& c : ds.categories())
      cells.push_back(naive_cell_ap(ds, capped, t, c.id, range, recalls));
  return naive_mean(cells);
}

struct NaiveMetrics {
  std::optional<double> cap, ap50, ap75, ap_s, ap_m, ap_l;
  std::vector<std::optional<double>> asap, rsap;
};

inline NaiveMetrics naive_evaluate(const DatasetAnnotations& ds,
                                   const std::vector<Detection>& dets,
                                   std::size_t max_dets = 100,
                                   bool scale_bins = true) {
  std::vector<double> thresholds, recalls;
  // Same grids as numpy.linspace(.5, .95, 10) and linspace(0, 1, 101).
  const double t_step = (0.95 - 0.5) / 9.0;
  for (int i = 0; i < 9; ++i) thresholds.push_back(i * t_step + 0.5);
  thresholds.push_back(0.95);
  const double r_step = 1.0 / 100.0;
  for (int i = 0; i < 100; ++i) recalls.push_back(i * r_step + 0.0);
  recalls.push_back(1.0);
  const auto capped = naive_cap(ds, dets, max_dets);
  const double inf = std::numeric_limits<double>::infinity();

  NaiveMetrics m;
  m.cap = naive_metric(ds, capped, thresholds, {}, recalls);
  m.ap50 = naive_metric(ds, capped, {thresholds[0]}, {}, recalls);
  m.ap75 = naive_metric(ds, capped, {thresholds[5]}, {}, recalls);
  m.ap_s = naive_metric(ds, capped, thresholds, {Measure::kArea, 0, 1024},
                        recalls);
  m.ap_m = naive_metric(ds, capped, thresholds,
                        {Measure::kArea, 1024, 9216}, recalls);
  m.ap_l = naive_metric(ds, capped, thresholds, {Measure::kArea, 9216, inf},
                        recalls);
  if (scale_bins) {
    double lo = 0.0;
    for (int k = 0; k < 9; ++k) {
      const double hi = k == 8 ? inf : 8.0 * std::pow(2.0, k);
      m.asap.push_back(naive_metric(ds, capped, thresholds,
                                    {Measure::kAbsolute, lo, hi}, recalls));
      lo = hi;
    }
    lo = 0.0;
    for (int k = 0; k < 9; ++k) {
      const double hi = std::pow(2.0, k - 8);
      m.rsap.push_back(naive_metric(ds, capped, thresholds,
                                    {Measure::kRelative, lo, hi}, recalls));
      lo = hi;
    }
  }
  return m;
}

}  // namespace usbench::oracle

#endif  // USBENCH_TESTS_ORACLE_NAIVE_EVAL_HPP_
