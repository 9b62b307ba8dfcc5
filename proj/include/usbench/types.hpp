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

#ifndef USBENCH_TYPES_HPP_
#define USBENCH_TYPES_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace usbench {

// Opaque identifier. Integer and string ids never compare equal.
using Id = std::variant<std::int64_t, std::string>;

std::string to_string(const Id& id);

// Axis-aligned box in pixels, (x, y) is the top-left corner.
template <typename Scalar>
struct BasicBox {
  Scalar x{};
  Scalar y{};
  Scalar w{};
  Scalar h{};

  Scalar area() const { return w * h; }
  Scalar right() const { return x + w; }
  Scalar bottom() const { return y + h; }

  bool valid() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) &&
           std::isfinite(h) && w > Scalar(0) && h > Scalar(0);
  }

  template <typename Other>
  BasicBox<Other> cast() const {
    return {static_cast<Other>(x), static_cast<Other>(y),
            static_cast<Other>(w), static_cast<Other>(h)};
  }

  friend bool operator==(const BasicBox&, const BasicBox&) = default;
};

using BBox = BasicBox<double>;

struct ImageInfo {
  Id id;
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::optional<std::string> file_name;

  friend bool operator==(const ImageInfo&, const ImageInfo&) = default;
};

struct Category {
  Id id;
  std::string name;

  friend bool operator==(const Category&, const Category&) = default;
};

struct GroundTruth {
  Id id;
  Id image_id;
  Id category_id;
  BBox bbox;
  // Mask area when the source provides one.
  std::optional<double> area;
  bool iscrowd = false;

  // Area thresholded by AP_S/M/L: the stored area if present, else w*h.
  double effective_area() const { return area ? *area : bbox.area(); }

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Detection {
  Id image_id;
  Id category_id;
  BBox bbox;
  double score = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// One dataset split. Validated on construction and immutable afterwards:
// ids are unique, every ground truth references an existing image and
// category, boxes are valid, and there is at least one category.
class DatasetAnnotations {
 public:
  DatasetAnnotations(std::string dataset_id, std::vector<ImageInfo> images,
                     std::vector<Category> categories,
                     std::vector<GroundTruth> ground_truths);

  const std::string& dataset_id() const { return dataset_id_; }
  const std::vector<ImageInfo>& images() const { return images_; }
  const std::vector<Category>& categories() const { return categories_; }
  const std::vector<GroundTruth>& ground_truths() const {
    return ground_truths_;
  }

  std::optional<std::size_t> image_index(const Id& id) const;
  std::optional<std::size_t> category_index(const Id& id) const;
  std::optional<std::size_t> category_index_by_name(
      const std::string& name) const;

  friend bool operator==(const DatasetAnnotations& a,
                         const DatasetAnnotations& b) {
    return a.dataset_id_ == b.dataset_id_ && a.images_ == b.images_ &&
           a.categories_ == b.categories_ &&
           a.ground_truths_ == b.ground_truths_;
  }

 private:
  std::string dataset_id_;
  std::vector<ImageInfo> images_;
  std::vector<Category> categories_;
  std::vector<GroundTruth> ground_truths_;
  std::unordered_map<Id, std::size_t> image_lookup_;
  std::unordered_map<Id, std::size_t> category_lookup_;
};

}  // namespace usbench

#endif  // USBENCH_TYPES_HPP_
