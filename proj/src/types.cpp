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

#include "usbench/types.hpp"

#include <utility>

#include "usbench/errors.hpp"

namespace usbench {

std::string to_string(const Id& id) {
  if (const auto* i = std::get_if<std::int64_t>(&id)) return std::to_string(*i);
  return "\"" + std::get<std::string>(id) + "\"";
}

DatasetAnnotations::DatasetAnnotations(std::string dataset_id,
                                       std::vector<ImageInfo> images,
                                       std::vector<Category> categories,
                                       std::vector<GroundTruth> ground_truths)
    : dataset_id_(std::move(dataset_id)),
      images_(std::move(images)),
      categories_(std::move(categories)),
      ground_truths_(std::move(ground_truths)) {
  if (categories_.empty()) {
    throw IntegrityError("dataset '" + dataset_id_ + "' has no categories");
  }
  image_lookup_.reserve(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) {
    const auto& img = images_[i];
    if (img.width < 1 || img.height < 1) {
      throw IntegrityError("image " + to_string(img.id) +
                           " has non-positive size");
    }
    if (!image_lookup_.emplace(img.id, i).second) {
      throw IntegrityError("duplicate image id " + to_string(img.id));
    }
  }
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (!category_lookup_.emplace(categories_[i].id, i).second) {
      throw IntegrityError("duplicate category id " +
                           to_string(categories_[i].id));
    }
  }
  std::unordered_map<Id, std::size_t> seen;
  seen.reserve(ground_truths_.size());
  for (std::size_t i = 0; i < ground_truths_.size(); ++i) {
    const auto& gt = ground_truths_[i];
    if (!seen.emplace(gt.id, i).second) {
      throw IntegrityError("duplicate annotation id " + to_string(gt.id));
    }
    if (!image_lookup_.contains(gt.image_id)) {
      throw IntegrityError("annotation " + to_string(gt.id) +
                           " references unknown image_id " +
                           to_string(gt.image_id));
    }
    if (!category_lookup_.contains(gt.category_id)) {
      throw IntegrityError("annotation " + to_string(gt.id) +
                           " references unknown category_id " +
                           to_string(gt.category_id));
    }
    if (!gt.bbox.valid()) {
      throw IntegrityError("annotation " + to_string(gt.id) +
                           " has an invalid bbox (w, h must be > 0)");
    }
    if (gt.area && !(std::isfinite(*gt.area) && *gt.area > 0.0)) {
      throw IntegrityError("annotation " + to_string(gt.id) +
                           " has a non-positive area");
    }
  }
}

std::optional<std::size_t> DatasetAnnotations::image_index(const Id& id) const {
  auto it = image_lookup_.find(id);
  if (it == image_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> DatasetAnnotations::category_index(
    const Id& id) const {
  auto it = category_lookup_.find(id);
  if (it == category_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> DatasetAnnotations::category_index_by_name(
    const std::string& name) const {
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (categories_[i].name == name) return i;
  }
  return std::nullopt;
}

}  // namespace usbench
