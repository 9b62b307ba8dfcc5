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

#include "usbench/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "json_util.hpp"
#include "usbench/errors.hpp"

namespace usbench {

namespace {

using json_util::Json;
using json_util::OrderedJson;

BBox read_bbox(const Json& node, const std::string& path) {
  if (!node.is_array() || node.size() != 4) {
    throw ParseError(path + ": expected [x, y, w, h]");
  }
  BBox box;
  box.x = json_util::read_number(node[0], path + "[0]");
  box.y = json_util::read_number(node[1], path + "[1]");
  box.w = json_util::read_number(node[2], path + "[2]");
  box.h = json_util::read_number(node[3], path + "[3]");
  return box;
}

bool read_flag(const Json& node, const std::string& path) {
  if (node.is_boolean()) return node.get<bool>();
  if (node.is_number_integer() || node.is_number_unsigned()) {
    return node.get<std::int64_t>() != 0;
  }
  throw ParseError(path + ": expected 0/1 or a boolean");
}

const Json& require_array(const Json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_array()) {
    throw ParseError(std::string("$.") + key + ": missing or not an array");
  }
  return *it;
}

}  // namespace

DatasetAnnotations parse_dataset(std::string_view document,
                                 const std::string& fallback_dataset_id) {
  const Json doc = json_util::parse(document);
  if (!doc.is_object()) throw ParseError("$: expected an object");

  std::string dataset_id = fallback_dataset_id;
  if (auto it = doc.find("dataset_id"); it != doc.end() && it->is_string()) {
    dataset_id = it->get<std::string>();
  }

  std::vector<ImageInfo> images;
  const Json& jimages = require_array(doc, "images");
  images.reserve(jimages.size());
  for (std::size_t i = 0; i < jimages.size(); ++i) {
    const std::string path = "$.images[" + std::to_string(i) + "]";
    const Json& node = jimages[i];
    ImageInfo img;
    img.id = json_util::read_id(json_util::field(node, "id", path), path + ".id");
    img.width = json_util::read_int(json_util::field(node, "width", path),
                                    path + ".width");
    img.height = json_util::read_int(json_util::field(node, "height", path),
                                     path + ".height");
    if (auto it = node.find("file_name"); it != node.end() && it->is_string()) {
      img.file_name = it->get<std::string>();
    }
    images.push_back(std::move(img));
  }

  std::vector<Category> categories;
  const Json& jcats = require_array(doc, "categories");
  for (std::size_t i = 0; i < jcats.size(); ++i) {
    const std::string path = "$.categories[" + std::to_string(i) + "]";
    const Json& node = jcats[i];
    Category cat;
    cat.id = json_util::read_id(json_util::field(node, "id", path), path + ".id");
    const Json& name = json_util::field(node, "name", path);
    if (!name.is_string()) throw ParseError(path + ".name: expected a string");
    cat.name = name.get<std::string>();
    categories.push_back(std::move(cat));
  }

  std::vector<GroundTruth> gts;
  if (doc.contains("annotations")) {
    const Json& janns = require_array(doc, "annotations");
    gts.reserve(janns.size());
    for (std::size_t i = 0; i < janns.size(); ++i) {
      const std::string path = "$.annotations[" + std::to_string(i) + "]";
      const Json& node = janns[i];
      GroundTruth gt;
      gt.id = json_util::read_id(json_util::field(node, "id", path), path + ".id");
      gt.image_id = json_util::read_id(json_util::field(node, "image_id", path),
                                       path + ".image_id");
      gt.category_id = json_util::read_id(
          json_util::field(node, "category_id", path), path + ".category_id");
      gt.bbox = read_bbox(json_util::field(node, "bbox", path), path + ".bbox");
      if (auto it = node.find("area"); it != node.end() && !it->is_null()) {
        gt.area = json_util::read_number(*it, path + ".area");
      }
      if (auto it = node.find("iscrowd"); it != node.end() && !it->is_null()) {
        gt.iscrowd = read_flag(*it, path + ".iscrowd");
      }
      gts.push_back(std::move(gt));
    }
  }

  return DatasetAnnotations(std::move(dataset_id), std::move(images),
                            std::move(categories), std::move(gts));
}

std::string serialize_dataset(const DatasetAnnotations& dataset) {
  OrderedJson doc = OrderedJson::object();
  doc["dataset_id"] = dataset.dataset_id();
  OrderedJson images = OrderedJson::array();
  for (const auto& img : dataset.images()) {
    OrderedJson j = OrderedJson::object();
    j["id"] = json_util::write_id(img.id);
    j["width"] = img.width;
    j["height"] = img.height;
    if (img.file_name) j["file_name"] = *img.file_name;
    images.push_back(std::move(j));
  }
  OrderedJson anns = OrderedJson::array();
  for (const auto& gt : dataset.ground_truths()) {
    OrderedJson j = OrderedJson::object();
    j["id"] = json_util::write_id(gt.id);
    j["image_id"] = json_util::write_id(gt.image_id);
    j["category_id"] = json_util::write_id(gt.category_id);
    j["bbox"] = {gt.bbox.x, gt.bbox.y, gt.bbox.w, gt.bbox.h};
    if (gt.area) j["area"] = *gt.area;
    j["iscrowd"] = gt.iscrowd ? 1 : 0;
    anns.push_back(std::move(j));
  }
  OrderedJson cats = OrderedJson::array();
  for (const auto& cat : dataset.categories()) {
    OrderedJson j = OrderedJson::object();
    j["id"] = json_util::write_id(cat.id);
    j["name"] = cat.name;
    cats.push_back(std::move(j));
  }
  doc["images"] = std::move(images);
  doc["annotations"] = std::move(anns);
  doc["categories"] = std::move(cats);
  return doc.dump(1) + "\n";
}

std::vector<Detection> parse_detections(std::string_view document,
                                        const DatasetAnnotations& dataset) {
  const Json doc = json_util::parse(document);
  if (!doc.is_array()) throw ParseError("$: expected a list of detections");
  std::vector<Detection> dets;
  dets.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string path = "$[" + std::to_string(i) + "]";
    const Json& node = doc[i];
    Detection det;
    det.image_id = json_util::read_id(json_util::field(node, "image_id", path),
                                      path + ".image_id");
    det.category_id = json_util::read_id(
        json_util::field(node, "category_id", path), path + ".category_id");
    det.bbox = read_bbox(json_util::field(node, "bbox", path), path + ".bbox");
    const Json& score = json_util::field(node, "score", path);
    if (score.is_null()) throw ValueError(path + ".score: not a finite number");
    det.score = json_util::read_number(score, path + ".score");
    if (!std::isfinite(det.score)) {
      throw ValueError(path + ".score: not a finite number");
    }
    if (!det.bbox.valid()) {
      throw ValueError(path + ".bbox: w and h must be finite and > 0");
    }
    if (!dataset.image_index(det.image_id)) {
      throw IntegrityError(path + ": unknown image_id " +
                           to_string(det.image_id));
    }
    if (!dataset.category_index(det.category_id)) {
      throw IntegrityError(path + ": unknown category_id " +
                           to_string(det.category_id));
    }
    dets.push_back(std::move(det));
  }
  return dets;
}

std::string serialize_detections(const std::vector<Detection>& detections) {
  OrderedJson doc = OrderedJson::array();
  for (const auto& det : detections) {
    OrderedJson j = OrderedJson::object();
    j["image_id"] = json_util::write_id(det.image_id);
    j["category_id"] = json_util::write_id(det.category_id);
    j["bbox"] = {det.bbox.x, det.bbox.y, det.bbox.w, det.bbox.h};
    j["score"] = det.score;
    doc.push_back(std::move(j));
  }
  return doc.dump() + "\n";
}

std::vector<Detection> cap_detections_per_image(
    const std::vector<Detection>& detections, std::size_t limit) {
  if (limit == 0) throw DomainError("detection limit must be >= 1");
  std::unordered_map<Id, std::vector<std::size_t>> by_image;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    by_image[detections[i].image_id].push_back(i);
  }
  std::vector<bool> keep(detections.size(), true);
  for (auto& [image, indices] : by_image) {
    if (indices.size() <= limit) continue;
    std::stable_sort(indices.begin(), indices.end(),
                     [&](std::size_t a, std::size_t b) {
                       return detections[a].score > detections[b].score;
                     });
    for (std::size_t k = limit; k < indices.size(); ++k) keep[indices[k]] = false;
  }
  std::vector<Detection> out;
  out.reserve(detections.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (keep[i]) out.push_back(detections[i]);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace usbench
