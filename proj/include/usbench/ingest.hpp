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

#ifndef USBENCH_INGEST_HPP_
#define USBENCH_INGEST_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "usbench/types.hpp"

namespace usbench {

inline constexpr std::size_t kDefaultMaxDetections = 100;

// Parses a COCO-style annotation document:
//   {"images": [{id, width, height, file_name?}],
//    "annotations": [{id, image_id, category_id, bbox: [x,y,w,h],
//                     area?, iscrowd?}],
//    "categories": [{id, name}],
//    "dataset_id"?: text}
// Unknown fields are ignored. `fallback_dataset_id` is used when the
// document has no dataset_id. Throws ParseError (with byte offset or JSON
// path) and IntegrityError (naming the offending id).
DatasetAnnotations parse_dataset(std::string_view document,
                                 const std::string& fallback_dataset_id = "");

// Canonical document: fixed key order, optional fields written only when
// present. parse_dataset(serialize_dataset(d)) == d.
std::string serialize_dataset(const DatasetAnnotations& dataset);

// Parses a flat result list [{image_id, category_id, bbox, score}].
// Input order is preserved. Throws IntegrityError for unknown ids and
// ValueError for non-finite scores or invalid boxes.
std::vector<Detection> parse_detections(std::string_view document,
                                        const DatasetAnnotations& dataset);

std::string serialize_detections(const std::vector<Detection>& detections);

// Keeps, per image, the `limit` highest-scoring detections across all
// categories. Score ties go to the earlier detection; survivors keep their
// input order. Throws DomainError for limit == 0.
std::vector<Detection> cap_detections_per_image(
    const std::vector<Detection>& detections, std::size_t limit);

// Whole-file read; throws Error when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace usbench

#endif  // USBENCH_INGEST_HPP_
