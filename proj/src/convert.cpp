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

#include "usbench/convert.hpp"

#include <algorithm>
#include <span>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "json_util.hpp"
#include "usbench/errors.hpp"
#include "usbench/ingest.hpp"

namespace usbench {

namespace {

namespace pt = boost::property_tree;

constexpr const char* kMangaCategories[] = {"body", "face", "frame", "text"};
constexpr const char* kWodCategories[] = {"vehicle", "pedestrian", "cyclist"};

std::vector<Category> fixed_categories(std::span<const char* const> names) {
  std::vector<Category> cats;
  for (std::size_t i = 0; i < names.size(); ++i) {
    cats.push_back({Id{static_cast<std::int64_t>(i + 1)}, names[i]});
  }
  return cats;
}

std::string page_file_name(const std::string& title, std::int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%03lld", static_cast<long long>(index));
  return title + "/" + buf + ".jpg";
}

double attr_number(const pt::ptree& node, const std::string& name,
                   const std::string& where) {
  auto v = node.get_optional<std::string>("<xmlattr>." + name);
  if (!v) throw ParseError(where + ": missing attribute '" + name + "'");
  try {
    std::size_t pos = 0;
    const double d = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ParseError(where + ": attribute '" + name + "' is not a number");
  }
}

}  // namespace

std::string normalize_volume_key(std::string_view key) {
  std::string out;
  std::size_t i = 0;
  while (i < key.size()) {
    const unsigned char c = static_cast<unsigned char>(key[i]);
    if (std::isdigit(c)) {
      std::size_t j = i;
      while (j < key.size() && key[j] == '0') ++j;
      std::size_t k = j;
      while (k < key.size() && std::isdigit(static_cast<unsigned char>(key[k]))) ++k;
      if (k == j) {
        out.push_back('0');  // run of zeros only
      } else {
        out.append(key.substr(j, k - j));
      }
      i = std::max(k, i + 1);
    } else {
      if (std::isalpha(c)) out.push_back(static_cast<char>(std::tolower(c)));
      ++i;
    }
  }
  return out;
}

void validate_splits(const std::vector<SplitSpec>& splits) {
  std::map<std::string, std::string> owner;
  std::set<std::string> names;
  for (const auto& split : splits) {
    if (!names.insert(split.name).second) {
      throw ConfigError("split '" + split.name + "' is defined twice");
    }
    if (split.member_keys.empty()) {
      throw ConfigError("split '" + split.name + "' has no members");
    }
    std::set<std::string> own;
    for (const auto& key : split.member_keys) {
      const auto norm = normalize_volume_key(key);
      own.insert(norm);
      auto [it, inserted] = owner.emplace(norm, split.name);
      if (!inserted && it->second != split.name) {
        throw ConfigError("'" + key + "' is in both '" + it->second +
                          "' and '" + split.name + "'");
      }
    }
  }
}

const std::vector<std::vector<std::string>>& manga109s_test_volumes() {
  static const std::vector<std::vector<std::string>> kVolumes = {
      {"Aku-Ham", "Akuhamu"},
      {"Bakuretsu! Kung Fu Girl", "BakuretsuKungFuGirl"},
      {"Doll Gun", "DollGun"},
      {"Eva Lady", "EvaLady"},
      {"Hinagiku Kenzan!", "HinagikuKenzan"},
      {"Kyokugen Cyclone", "KyokugenCyclone"},
      {"Love Hina vol. 1", "LoveHina_vol01"},
      {"Momoyama Haikagura", "MomoyamaHaikagura"},
      {"Tennen Senshi G", "TennenSenshiG"},
      {"Uchi no Nyan's Diary", "UchiNoNyan'sDiary"},
      {"Unbalance Tokyo", "UnbalanceTokyo"},
      {"Yamato no Hane", "YamatoNoHane"},
      {"Youma Kourin", "YoumaKourin"},
      {"Yume no Kayoiji", "YumeNoKayoiji"},
      {"Yumeiro Cooking", "YumeiroCooking"},
  };
  return kVolumes;
}

const std::vector<std::vector<std::string>>& manga109s_val_volumes() {
  static const std::vector<std::vector<std::string>> kVolumes = {
      {"Healing Planet", "HealingPlanet"},
      {"Love Hina vol. 14", "LoveHina_vol14"},
      {"Seijinki Vulnus", "SeisinkiVulnus"},
      {"That's! Izumiko", "That'sIzumiko"},
  };
  return kVolumes;
}

std::vector<SplitSpec> manga109s_splits(
    const std::vector<std::string>& all_volumes) {
  SplitSpec test{"15test", {}};
  SplitSpec val{"4val", {}};
  std::set<std::string> reserved;
  for (const auto& aliases : manga109s_test_volumes()) {
    for (const auto& a : aliases) {
      test.member_keys.push_back(a);
      reserved.insert(normalize_volume_key(a));
    }
  }
  for (const auto& aliases : manga109s_val_volumes()) {
    for (const auto& a : aliases) {
      val.member_keys.push_back(a);
      reserved.insert(normalize_volume_key(a));
    }
  }
  SplitSpec train{"68train", {}};
  for (const auto& v : all_volumes) {
    if (!reserved.contains(normalize_volume_key(v))) {
      train.member_keys.push_back(v);
    }
  }
  std::vector<SplitSpec> splits;
  if (!train.member_keys.empty()) splits.push_back(std::move(train));
  splits.push_back(std::move(val));
  splits.push_back(std::move(test));
  return splits;
}

std::string split_of(const std::vector<SplitSpec>& splits,
                     std::string_view volume) {
  const auto norm = normalize_volume_key(volume);
  for (const auto& split : splits) {
    for (const auto& key : split.member_keys) {
      if (normalize_volume_key(key) == norm) return split.name;
    }
  }
  return {};
}

DatasetAnnotations convert_manga109(const std::vector<Manga109Book>& books,
                                    const std::vector<SplitSpec>& splits,
                                    const std::string& split_name) {
  validate_splits(splits);
  if (std::none_of(splits.begin(), splits.end(),
                   [&](const SplitSpec& s) { return s.name == split_name; })) {
    throw ConfigError("no split named '" + split_name + "'");
  }

  struct Parsed {
    std::string title;
    pt::ptree tree;
  };
  std::vector<Parsed> parsed;
  for (const auto& book : books) {
    Parsed p;
    std::istringstream in(book.xml);
    try {
      pt::read_xml(in, p.tree);
    } catch (const pt::xml_parser_error& e) {
      throw ParseError("book '" + book.title + "': malformed XML at line " +
                       std::to_string(e.line()) + ": " + e.message());
    }
    p.title = book.title.empty()
                  ? p.tree.get<std::string>("book.<xmlattr>.title", "")
                  : book.title;
    if (p.title.empty()) throw ParseError("book without a title");
    const std::string split = split_of(splits, p.title);
    if (split.empty()) {
      throw ConfigError("book '" + p.title + "' is not in any split");
    }
    if (split == split_name) parsed.push_back(std::move(p));
  }
  std::stable_sort(parsed.begin(), parsed.end(),
                   [](const Parsed& a, const Parsed& b) { return a.title < b.title; });

  std::vector<ImageInfo> images;
  std::vector<GroundTruth> gts;
  std::int64_t next_image = 1;
  std::int64_t next_ann = 1;
  for (const auto& book : parsed) {
    const auto pages = book.tree.get_child_optional("book.pages");
    if (!pages) continue;
    for (const auto& [tag, page] : *pages) {
      if (tag != "page") continue;
      const std::string page_where =
          "book '" + book.title + "' page " +
          page.get<std::string>("<xmlattr>.index", "?");
      const auto index = static_cast<std::int64_t>(
          attr_number(page, "index", page_where));
      ImageInfo img{Id{next_image},
                    static_cast<std::int64_t>(attr_number(page, "width", page_where)),
                    static_cast<std::int64_t>(attr_number(page, "height", page_where)),
                    page_file_name(book.title, index)};
      std::vector<GroundTruth> page_boxes;
      for (const auto& [box_tag, box] : page) {
        const auto* cat = std::find_if(
            std::begin(kMangaCategories), std::end(kMangaCategories),
            [&](const char* c) { return box_tag == c; });
        if (cat == std::end(kMangaCategories)) continue;
        const std::string where =
            page_where + " " + box_tag + " id=" +
            box.get<std::string>("<xmlattr>.id", "?");
        const double xmin = attr_number(box, "xmin", where);
        const double ymin = attr_number(box, "ymin", where);
        const double xmax = attr_number(box, "xmax", where);
        const double ymax = attr_number(box, "ymax", where);
        if (xmax <= xmin || ymax <= ymin) {
          throw GeometryError(where + ": degenerate box (xmax <= xmin or "
                              "ymax <= ymin)");
        }
        GroundTruth gt;
        gt.image_id = img.id;
        gt.category_id =
            Id{static_cast<std::int64_t>(cat - std::begin(kMangaCategories) + 1)};
        gt.bbox = {xmin, ymin, xmax - xmin, ymax - ymin};
        page_boxes.push_back(std::move(gt));
      }
      // Pages without annotations are irregular pages and are not used.
      if (page_boxes.empty()) continue;
      for (auto& gt : page_boxes) {
        gt.id = Id{next_ann++};
        gts.push_back(std::move(gt));
      }
      images.push_back(std::move(img));
      ++next_image;
    }
  }
  return DatasetAnnotations("manga109s_" + split_name, std::move(images),
                            fixed_categories(kMangaCategories), std::move(gts));
}

std::vector<Manga109Book> load_manga109_books(
    const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_regular_file(path)) {
    files.push_back(path);
  } else {
    fs::path dir = path;
    if (fs::is_directory(path / "annotations")) dir = path / "annotations";
    if (!fs::is_directory(dir)) {
      throw Error("'" + path.string() + "' is not a file or directory");
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".xml") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  }
  std::vector<Manga109Book> books;
  for (const auto& f : files) {
    books.push_back({f.stem().string(), read_file(f)});
  }
  return books;
}

std::vector<WodFrameRecord> parse_wod_intermediate(std::string_view document) {
  using json_util::Json;
  std::vector<WodFrameRecord> records;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= document.size()) {
    std::size_t end = document.find('\n', start);
    if (end == std::string_view::npos) end = document.size();
    std::string_view line = document.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == document.size()) break;
      continue;
    }
    const std::string where = "line " + std::to_string(line_no);
    Json node;
    try {
      node = json_util::parse(line);
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
    WodFrameRecord rec;
    const Json& seq = json_util::field(node, "sequence_id", where);
    const Json& cam = json_util::field(node, "camera_id", where);
    auto as_text = [&](const Json& j, const char* name) {
      if (j.is_string()) return j.get<std::string>();
      if (j.is_number_integer()) return std::to_string(j.get<std::int64_t>());
      throw ParseError(where + ": " + name + " must be a string or integer");
    };
    rec.sequence_id = as_text(seq, "sequence_id");
    rec.camera_id = as_text(cam, "camera_id");
    rec.frame_index = json_util::read_int(
        json_util::field(node, "frame_index", where), where + ".frame_index");
    if (rec.frame_index < 0) {
      throw ParseError(where + ": frame_index must be >= 0");
    }
    const std::string image_key = rec.sequence_id + "/" +
                                  std::to_string(rec.frame_index) + "/" +
                                  rec.camera_id;
    rec.image.id = Id{image_key};
    rec.image.width = json_util::read_int(json_util::field(node, "width", where),
                                          where + ".width");
    rec.image.height = json_util::read_int(
        json_util::field(node, "height", where), where + ".height");
    rec.image.file_name = image_key + ".jpg";
    if (auto it = node.find("boxes"); it != node.end()) {
      if (!it->is_array()) throw ParseError(where + ".boxes: expected a list");
      for (std::size_t b = 0; b < it->size(); ++b) {
        const std::string bwhere = where + ".boxes[" + std::to_string(b) + "]";
        const Json& jb = (*it)[b];
        const Json& jcat = json_util::field(jb, "category", bwhere);
        if (!jcat.is_string()) throw ParseError(bwhere + ".category: expected text");
        std::string cat = jcat.get<std::string>();
        std::transform(cat.begin(), cat.end(), cat.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (cat.rfind("type_", 0) == 0) cat = cat.substr(5);
        if (cat == "sign") continue;
        const auto* found = std::find_if(
            std::begin(kWodCategories), std::end(kWodCategories),
            [&](const char* c) { return cat == c; });
        if (found == std::end(kWodCategories)) {
          throw ParseError(bwhere + ": unknown category '" + cat + "'");
        }
        GroundTruth gt;
        gt.image_id = rec.image.id;
        gt.category_id =
            Id{static_cast<std::int64_t>(found - std::begin(kWodCategories) + 1)};
        gt.bbox = {json_util::read_number(json_util::field(jb, "x", bwhere), bwhere + ".x"),
                   json_util::read_number(json_util::field(jb, "y", bwhere), bwhere + ".y"),
                   json_util::read_number(json_util::field(jb, "w", bwhere), bwhere + ".w"),
                   json_util::read_number(json_util::field(jb, "h", bwhere), bwhere + ".h")};
        if (!gt.bbox.valid()) {
          throw GeometryError(bwhere + ": w and h must be > 0");
        }
        rec.boxes.push_back(std::move(gt));
      }
    }
    records.push_back(std::move(rec));
    if (end == document.size()) break;
  }
  return records;
}

DatasetAnnotations extract_wod_f0_subset(
    const std::vector<WodFrameRecord>& records, const std::string& dataset_id) {
  std::vector<ImageInfo> images;
  std::vector<GroundTruth> gts;
  std::int64_t next_ann = 1;
  for (const auto& rec : records) {
    if (rec.frame_index % 10 != 0) continue;
    images.push_back(rec.image);
    for (const auto& box : rec.boxes) {
      GroundTruth gt = box;
      gt.id = Id{next_ann++};
      gt.image_id = rec.image.id;
      gts.push_back(std::move(gt));
    }
  }
  return DatasetAnnotations(dataset_id, std::move(images),
                            fixed_categories(kWodCategories), std::move(gts));
}

}  // namespace usbench
