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

#include "usbench/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json_util.hpp"
#include "usbench/errors.hpp"

namespace usbench {

namespace {

using json_util::Json;
using json_util::OrderedJson;
using json_util::write_real;

OrderedJson write_bin(const ScaleBin& bin) {
  OrderedJson j;
  j["lower"] = write_real(bin.lower);
  j["upper"] = write_real(bin.upper);
  return j;
}

OrderedJson write_reals(const std::vector<std::optional<double>>& values) {
  OrderedJson arr = OrderedJson::array();
  for (const auto& v : values) arr.push_back(write_real(v));
  return arr;
}

OrderedJson write_bin_values(const std::vector<BinValue>& values) {
  OrderedJson arr = OrderedJson::array();
  for (const auto& v : values) {
    OrderedJson j = write_bin(v.bin);
    j["ap"] = write_real(v.ap);
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<BinValue> bin_values(const PartitionAp* p,
                                 const std::vector<std::optional<double>>& aps) {
  std::vector<BinValue> out;
  if (!p) return out;
  for (std::size_t b = 0; b < aps.size(); ++b) {
    out.push_back({p->partition().bins[b], aps[b]});
  }
  return out;
}

std::optional<double> read_opt(const Json& node, const char* key,
                               const std::string& path) {
  auto it = node.find(key);
  if (it == node.end()) return std::nullopt;
  return json_util::read_real(*it, path + "." + key);
}

std::vector<std::optional<double>> read_reals(const Json& node, const char* key,
                                              const std::string& path) {
  std::vector<std::optional<double>> out;
  auto it = node.find(key);
  if (it == node.end() || it->is_null()) return out;
  if (!it->is_array()) throw ParseError(path + "." + key + ": expected a list");
  for (std::size_t i = 0; i < it->size(); ++i) {
    out.push_back(json_util::read_real(
        (*it)[i], path + "." + key + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<BinValue> read_bin_values(const Json& node, const char* key,
                                      const std::string& path) {
  std::vector<BinValue> out;
  auto it = node.find(key);
  if (it == node.end() || it->is_null()) return out;
  if (!it->is_array()) throw ParseError(path + "." + key + ": expected a list");
  for (std::size_t i = 0; i < it->size(); ++i) {
    const std::string p = path + "." + key + "[" + std::to_string(i) + "]";
    const Json& j = (*it)[i];
    BinValue v;
    auto lower = json_util::read_real(json_util::field(j, "lower", p), p + ".lower");
    auto upper = json_util::read_real(json_util::field(j, "upper", p), p + ".upper");
    if (!lower || !upper) throw ParseError(p + ": bin edges must be set");
    v.bin = {*lower, *upper};
    v.ap = read_opt(j, "ap", p);
    out.push_back(v);
  }
  return out;
}

std::optional<double> mean_defined(const std::vector<std::optional<double>>& v) {
  return aggregate_ap(v, UndefinedPolicy::kExcludeFromMean);
}

// Per-bin zero-filled mean across datasets. Datasets without the partition
// are skipped; the remaining ones must agree on the bins.
std::vector<BinValue> mean_bins(const Summary& s,
                                std::vector<BinValue> DatasetSummary::*member) {
  std::vector<BinValue> out;
  std::size_t n = 0;
  for (const auto& d : s.datasets) {
    const auto& bins = d.*member;
    if (bins.empty()) continue;
    if (n == 0) {
      out = bins;
      for (auto& b : out) b.ap = 0.0;
    } else if (bins.size() != out.size() ||
               !std::equal(bins.begin(), bins.end(), out.begin(),
                           [](const BinValue& a, const BinValue& b) {
                             return a.bin == b.bin;
                           })) {
      throw ParseError("summary '" + s.method +
                       "': scale bins differ between datasets");
    }
    for (std::size_t b = 0; b < bins.size(); ++b) {
      *out[b].ap += bins[b].ap.value_or(0.0);
    }
    ++n;
  }
  for (auto& b : out) *b.ap /= static_cast<double>(n);
  return out;
}

std::string shortest(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

std::string write_eval_result(const EvalResult& r) {
  OrderedJson doc;
  doc["schema"] = kEvalSchema;
  doc["dataset_id"] = r.dataset_id;

  OrderedJson params;
  params["iou_thresholds"] = r.params.iou_thresholds;
  params["recall_thresholds"] = r.params.recall_thresholds;
  params["max_dets"] = r.params.max_dets;
  params["category_policy"] =
      r.params.category_policy == UndefinedPolicy::kZeroFill ? "zero_fill"
                                                             : "exclude";
  OrderedJson parts = OrderedJson::array();
  for (const auto& p : r.params.partitions) {
    OrderedJson j;
    j["name"] = p.name;
    j["basis"] = to_string(p.basis);
    j["bins"] = OrderedJson::array();
    for (const auto& b : p.bins) j["bins"].push_back(write_bin(b));
    parts.push_back(std::move(j));
  }
  params["partitions"] = std::move(parts);
  if (r.params.category_iou_overrides) {
    params["category_iou_overrides"] = *r.params.category_iou_overrides;
  } else {
    params["category_iou_overrides"] = nullptr;
  }
  doc["params"] = std::move(params);
  doc["categories"] = r.category_names;

  OrderedJson metrics;
  metrics["cap"] = write_real(r.cap);
  metrics["ap50"] = write_real(r.ap50);
  metrics["ap75"] = write_real(r.ap75);
  metrics["ap_sml"] = write_reals(r.ap_sml);
  metrics["asap"] = write_bin_values(bin_values(r.find_partition(kAsapPartition), r.asap));
  metrics["rsap"] = write_bin_values(bin_values(r.find_partition(kRsapPartition), r.rsap));
  OrderedJson per_cat = OrderedJson::object();
  for (std::size_t c = 0; c < r.per_category_cap.size(); ++c) {
    per_cat[r.category_names[c]] = write_real(r.per_category_cap[c]);
  }
  metrics["per_category_cap"] = std::move(per_cat);
  if (r.kap) {
    OrderedJson kap;
    kap["kap"] = write_real(r.kap->kap);
    kap["per_category"] = OrderedJson::array();
    for (const auto& c : r.kap->per_category) {
      OrderedJson j;
      j["category"] = c.category;
      j["iou_threshold"] = c.iou_threshold;
      j["ap"] = write_real(c.ap);
      kap["per_category"].push_back(std::move(j));
    }
    metrics["kap"] = std::move(kap);
  } else {
    metrics["kap"] = nullptr;
  }
  doc["metrics"] = std::move(metrics);

  // values[t][c][b]
  OrderedJson tensor = OrderedJson::array();
  for (const auto& p : r.ap_tensor) {
    OrderedJson j;
    j["partition"] = p.partition().name;
    OrderedJson values = OrderedJson::array();
    for (std::size_t t = 0; t < p.num_thresholds(); ++t) {
      OrderedJson per_t = OrderedJson::array();
      for (std::size_t c = 0; c < p.num_categories(); ++c) {
        OrderedJson per_c = OrderedJson::array();
        for (std::size_t b = 0; b < p.num_bins(); ++b) {
          per_c.push_back(write_real(p.at(t, c, b)));
        }
        per_t.push_back(std::move(per_c));
      }
      values.push_back(std::move(per_t));
    }
    j["values"] = std::move(values);
    tensor.push_back(std::move(j));
  }
  doc["ap_tensor"] = std::move(tensor);
  return doc.dump(1) + "\n";
}

DatasetSummary summarize(const EvalResult& r) {
  DatasetSummary s;
  s.dataset_id = r.dataset_id;
  s.cap = r.cap;
  s.ap50 = r.ap50;
  s.ap75 = r.ap75;
  s.ap_sml = r.ap_sml;
  s.asap = bin_values(r.find_partition(kAsapPartition), r.asap);
  s.rsap = bin_values(r.find_partition(kRsapPartition), r.rsap);
  if (r.kap) s.kap = r.kap->kap;
  return s;
}

std::string write_summary(const Summary& summary) {
  OrderedJson doc;
  doc["schema"] = kSummarySchema;
  doc["method"] = summary.method;
  doc["protocol_label"] = summary.protocol_label;
  doc["datasets"] = OrderedJson::array();
  for (const auto& d : summary.datasets) {
    OrderedJson j;
    j["dataset_id"] = d.dataset_id;
    j["cap"] = write_real(d.cap);
    j["ap50"] = write_real(d.ap50);
    j["ap75"] = write_real(d.ap75);
    j["ap_sml"] = write_reals(d.ap_sml);
    j["asap"] = write_bin_values(d.asap);
    j["rsap"] = write_bin_values(d.rsap);
    j["kap"] = write_real(d.kap);
    doc["datasets"].push_back(std::move(j));
  }
  if (!summary.datasets.empty()) {
    const ReportRow row = make_report_row(summary);
    doc["mcap"] = write_real(row.mcap);
    doc["ap50"] = write_real(row.ap50);
    doc["ap75"] = write_real(row.ap75);
    doc["ap_sml"] = write_reals(row.ap_sml);
    doc["asap"] = write_bin_values(row.asap);
    doc["rsap"] = write_bin_values(row.rsap);
  }
  return doc.dump(1) + "\n";
}

Summary parse_summary(std::string_view document) {
  const Json doc = json_util::parse(document);
  if (!doc.is_object()) throw ParseError("$: expected an object");
  auto schema = doc.find("schema");
  if (schema == doc.end() || *schema != kSummarySchema) {
    throw ParseError(std::string("$.schema: expected \"") + kSummarySchema + "\"");
  }
  Summary s;
  const Json& method = json_util::field(doc, "method", "$");
  if (!method.is_string()) throw ParseError("$.method: expected text");
  s.method = method.get<std::string>();
  if (auto it = doc.find("protocol_label"); it != doc.end() && it->is_string()) {
    s.protocol_label = it->get<std::string>();
  }
  const Json& datasets = json_util::field(doc, "datasets", "$");
  if (!datasets.is_array()) throw ParseError("$.datasets: expected a list");
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    const std::string path = "$.datasets[" + std::to_string(i) + "]";
    const Json& j = datasets[i];
    DatasetSummary d;
    const Json& id = json_util::field(j, "dataset_id", path);
    if (!id.is_string()) throw ParseError(path + ".dataset_id: expected text");
    d.dataset_id = id.get<std::string>();
    d.cap = read_opt(j, "cap", path);
    d.ap50 = read_opt(j, "ap50", path);
    d.ap75 = read_opt(j, "ap75", path);
    d.ap_sml = read_reals(j, "ap_sml", path);
    d.asap = read_bin_values(j, "asap", path);
    d.rsap = read_bin_values(j, "rsap", path);
    d.kap = read_opt(j, "kap", path);
    s.datasets.push_back(std::move(d));
  }
  return s;
}

ReportRow make_report_row(const Summary& summary) {
  ReportRow row;
  row.method = summary.method;
  row.protocol_label = summary.protocol_label;
  std::vector<std::optional<double>> ap50, ap75;
  std::size_t sml = 0;
  for (const auto& d : summary.datasets) {
    row.dataset_ids.push_back(d.dataset_id);
    row.dataset_caps.push_back(d.cap);
    ap50.push_back(d.ap50);
    ap75.push_back(d.ap75);
    sml = std::max(sml, d.ap_sml.size());
  }
  row.mcap = mean_defined(row.dataset_caps);
  row.ap50 = mean_defined(ap50);
  row.ap75 = mean_defined(ap75);
  for (std::size_t k = 0; k < sml; ++k) {
    std::vector<std::optional<double>> vals;
    for (const auto& d : summary.datasets) {
      if (k < d.ap_sml.size()) vals.push_back(d.ap_sml[k]);
    }
    row.ap_sml.push_back(mean_defined(vals));
  }
  row.asap = mean_bins(summary, &DatasetSummary::asap);
  row.rsap = mean_bins(summary, &DatasetSummary::rsap);
  return row;
}

std::vector<ReportRow> make_leaderboard(std::span<const Summary> summaries) {
  std::vector<ReportRow> rows;
  for (const auto& s : summaries) {
    rows.push_back(make_report_row(s));
    if (rows.back().dataset_ids != rows.front().dataset_ids) {
      throw ParseError("summary '" + s.method +
                       "' covers different datasets than '" +
                       rows.front().method + "'");
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ReportRow& a, const ReportRow& b) {
                     if (a.mcap.has_value() != b.mcap.has_value()) {
                       return a.mcap.has_value();
                     }
                     return a.mcap && *a.mcap > *b.mcap;
                   });
  return rows;
}

std::string format_percent(std::optional<double> value) {
  if (!value || std::isnan(*value)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", *value * 100.0);
  return buf;
}

std::string render_leaderboard(std::span<const ReportRow> rows,
                               TableFormat format) {
  std::vector<std::string> header = {"Method", "mCAP", "AP50", "AP75",
                                     "APS",    "APM",  "APL"};
  if (!rows.empty()) {
    header.insert(header.end(), rows.front().dataset_ids.begin(),
                  rows.front().dataset_ids.end());
  }
  header.push_back("Protocol");

  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    std::vector<std::string> line = {r.method, format_percent(r.mcap),
                                     format_percent(r.ap50),
                                     format_percent(r.ap75)};
    for (std::size_t k = 0; k < 3; ++k) {
      line.push_back(format_percent(k < r.ap_sml.size() ? r.ap_sml[k]
                                                         : std::nullopt));
    }
    for (const auto& cap : r.dataset_caps) line.push_back(format_percent(cap));
    line.push_back(r.protocol_label.empty() ? "-" : r.protocol_label);
    cells.push_back(std::move(line));
  }

  std::ostringstream out;
  if (format == TableFormat::kCsv) {
    auto emit = [&](const std::vector<std::string>& line) {
      for (std::size_t i = 0; i < line.size(); ++i) {
        out << (i ? "," : "") << csv_field(line[i]);
      }
      out << "\n";
    };
    emit(header);
    for (const auto& line : cells) emit(line);
    return out.str();
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], line[i].size());
    }
  }
  auto emit = [&](const std::vector<std::string>& line) {
    out << "|";
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string& s = i < line.size() ? line[i] : std::string();
      // Method and protocol left-aligned, numbers right-aligned.
      const bool left = i == 0 || i + 1 == width.size();
      const std::string pad(width[i] - s.size(), ' ');
      out << " " << (left ? s + pad : pad + s) << " |";
    }
    out << "\n";
  };
  emit(header);
  out << "|";
  for (std::size_t w : width) out << std::string(w + 2, '-') << "|";
  out << "\n";
  for (const auto& line : cells) emit(line);
  return out.str();
}

std::string render_scale_csv(std::span<const ReportRow> rows,
                             ScaleMetric metric) {
  std::ostringstream out;
  out << "bin_upper,method,ap\n";
  for (const auto& r : rows) {
    const auto& bins = metric == ScaleMetric::kAsap ? r.asap : r.rsap;
    for (const auto& b : bins) {
      out << shortest(b.bin.upper) << "," << csv_field(r.method) << ","
          << (b.ap ? shortest(*b.ap) : std::string()) << "\n";
    }
  }
  return out.str();
}

}  // namespace usbench
