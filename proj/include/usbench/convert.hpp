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

// Converters from the Manga109 XML layout and from a line-delimited Waymo
// Open Dataset intermediate format into DatasetAnnotations.

#ifndef USBENCH_CONVERT_HPP_
#define USBENCH_CONVERT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "usbench/types.hpp"

namespace usbench {

// A named split and the volume titles / sequence ids that belong to it.
// Keys match volume names loosely (case, spaces and punctuation ignored,
// "vol. 1" == "vol01").
struct SplitSpec {
  std::string name;
  std::vector<std::string> member_keys;
};

// Normalized form used to compare volume keys.
std::string normalize_volume_key(std::string_view key);

// Throws ConfigError if a split is empty or two splits share a member.
void validate_splits(const std::vector<SplitSpec>& splits);

// Volumes of the fixed Manga109-s evaluation splits. Each entry lists the
// published title followed by the dataset directory key.
const std::vector<std::vector<std::string>>& manga109s_test_volumes();
const std::vector<std::vector<std::string>>& manga109s_val_volumes();

// "68train", "4val", "15test". The training split is every volume of
// `all_volumes` that is in neither evaluation split.
std::vector<SplitSpec> manga109s_splits(
    const std::vector<std::string>& all_volumes);

// Name of the split containing `volume`, or empty if none does.
std::string split_of(const std::vector<SplitSpec>& splits,
                     std::string_view volume);

struct Manga109Book {
  std::string title;  // falls back to the <book title=...> attribute if empty
  std::string xml;
};

// Category ids are fixed: body=1, face=2, frame=3, text=4. Books are
// emitted sorted by title and pages in document order; pages without boxes
// are dropped. Image and annotation ids are sequential from 1.
// Throws GeometryError for xmax <= xmin or ymax <= ymin, ConfigError when
// a book is in no split or `split_name` is not a split.
DatasetAnnotations convert_manga109(const std::vector<Manga109Book>& books,
                                    const std::vector<SplitSpec>& splits,
                                    const std::string& split_name);

// Reads <root>/annotations/*.xml (or a single .xml file, or a directory of
// .xml files) into books titled by file stem.
std::vector<Manga109Book> load_manga109_books(
    const std::filesystem::path& path);

struct WodFrameRecord {
  std::string sequence_id;
  std::int64_t frame_index = 0;
  std::string camera_id;
  ImageInfo image;
  std::vector<GroundTruth> boxes;
};

// One JSON object per line:
//   {"sequence_id", "frame_index", "camera_id", "width", "height",
//    "boxes": [{"category", "x", "y", "w", "h"}]}
// Blank lines are skipped. Image id is "<sequence>/<frame>/<camera>".
// Categories vehicle=1, pedestrian=2, cyclist=3; "sign" boxes are skipped.
std::vector<WodFrameRecord> parse_wod_intermediate(std::string_view document);

// Keeps frames whose index is a multiple of 10, in input order.
DatasetAnnotations extract_wod_f0_subset(
    const std::vector<WodFrameRecord>& records,
    const std::string& dataset_id);

}  // namespace usbench

#endif  // USBENCH_CONVERT_HPP_
