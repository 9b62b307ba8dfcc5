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

#include "usbench/scale.hpp"

#include <cmath>
#include <string>

#include "usbench/errors.hpp"

namespace usbench {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ScalePartition from_edges(std::string name, ScaleBasis basis,
                          const std::vector<double>& uppers) {
  ScalePartition p{std::move(name), basis, {}};
  double lower = 0.0;
  for (double upper : uppers) {
    p.bins.push_back({lower, upper});
    lower = upper;
  }
  return p;
}

}  // namespace

const char* to_string(ScaleBasis basis) {
  switch (basis) {
    case ScaleBasis::kArea:
      return "area";
    case ScaleBasis::kAbsoluteScale:
      return "absolute";
    case ScaleBasis::kRelativeScale:
      return "relative";
  }
  return "?";
}

void validate_partition(const ScalePartition& partition) {
  const auto& bins = partition.bins;
  if (bins.empty()) {
    throw DomainError("partition '" + partition.name + "' has no bins");
  }
  if (bins.front().lower != 0.0) {
    throw DomainError("partition '" + partition.name +
                      "' must start at 0");
  }
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (!(bins[i].lower < bins[i].upper)) {
      throw DomainError("partition '" + partition.name + "' has an empty bin");
    }
    if (i > 0 && bins[i].lower != bins[i - 1].upper) {
      throw DomainError("partition '" + partition.name +
                        "' bins are not contiguous");
    }
  }
  const double expected_end =
      partition.basis == ScaleBasis::kRelativeScale ? 1.0 : kInf;
  if (bins.back().upper != expected_end) {
    throw DomainError("partition '" + partition.name + "' must end at " +
                      (expected_end == 1.0 ? std::string("1") : "+inf"));
  }
}

std::size_t assign_bin(double value, const ScalePartition& partition) {
  if (!(value > 0.0)) {
    throw DomainError("scale must be positive, got " + std::to_string(value));
  }
  const auto& bins = partition.bins;
  auto it = std::lower_bound(
      bins.begin(), bins.end(), value,
      [](const ScaleBin& bin, double v) { return bin.upper < v; });
  if (it == bins.end()) {
    throw DomainError("scale " + std::to_string(value) +
                      " is beyond partition '" + partition.name + "'");
  }
  return static_cast<std::size_t>(it - bins.begin());
}

ScalePartition all_scales_partition() {
  return from_edges("all", ScaleBasis::kArea, {kInf});
}

ScalePartition coco_area_partition() {
  return from_edges("coco", ScaleBasis::kArea, {32.0 * 32.0, 96.0 * 96.0, kInf});
}

ScalePartition absolute_octave_partition() {
  std::vector<double> uppers;
  for (int k = 3; k <= 10; ++k) uppers.push_back(std::ldexp(1.0, k));
  uppers.push_back(kInf);
  return from_edges("asap", ScaleBasis::kAbsoluteScale, uppers);
}

ScalePartition relative_octave_partition() {
  std::vector<double> uppers;
  for (int k = -8; k <= 0; ++k) uppers.push_back(std::ldexp(1.0, k));
  return from_edges("rsap", ScaleBasis::kRelativeScale, uppers);
}

double measure_ground_truth(const GroundTruth& gt, const ImageInfo& image,
                            ScaleBasis basis) {
  if (basis == ScaleBasis::kArea) return gt.effective_area();
  return measure_detection(gt.bbox, image, basis);
}

double measure_detection(const BBox& box, const ImageInfo& image,
                         ScaleBasis basis) {
  switch (basis) {
    case ScaleBasis::kArea:
      return box.area();
    case ScaleBasis::kAbsoluteScale:
      return absolute_scale(box);
    case ScaleBasis::kRelativeScale:
      return relative_scale(box, image);
  }
  return 0.0;
}

}  // namespace usbench
