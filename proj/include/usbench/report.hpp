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

// Result documents, leaderboard rows and plot-ready scale-wise CSV.

#ifndef USBENCH_REPORT_HPP_
#define USBENCH_REPORT_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "usbench/metrics.hpp"

namespace usbench {

inline constexpr char kEvalSchema[] = "usbench.eval/1";
inline constexpr char kSummarySchema[] = "usbench.summary/1";

// Full-precision EvalResult document with explicit bin edges. Infinite
// edges are written as the string "inf", undefined values as null.
std::string write_eval_result(const EvalResult& result);

struct BinValue {
  ScaleBin bin;
  std::optional<double> ap;
};

struct DatasetSummary {
  std::string dataset_id;
  std::optional<double> cap;
  std::optional<double> ap50;
  std::optional<double> ap75;
  std::vector<std::optional<double>> ap_sml;
  std::vector<BinValue> asap;
  std::vector<BinValue> rsap;
  std::optional<double> kap;
};

// Everything one method reported over a set of datasets.
struct Summary {
  std::string method;
  std::string protocol_label;
  std::vector<DatasetSummary> datasets;
};

DatasetSummary summarize(const EvalResult& result);

std::string write_summary(const Summary& summary);
// Throws ParseError when the document is not a summary document.
Summary parse_summary(std::string_view document);

// One leaderboard line. Cross-dataset means follow the mCAP rule; ASAP and
// RSAP bins without ground truth are zero-filled before averaging.
struct ReportRow {
  std::string method;
  std::vector<std::string> dataset_ids;
  std::vector<std::optional<double>> dataset_caps;
  std::optional<double> mcap;
  std::optional<double> ap50;
  std::optional<double> ap75;
  std::vector<std::optional<double>> ap_sml;
  std::vector<BinValue> asap;
  std::vector<BinValue> rsap;
  std::string protocol_label;
};

ReportRow make_report_row(const Summary& summary);

// Rows sorted by mCAP descending (stable). Throws ParseError when the rows
// do not share one dataset list.
std::vector<ReportRow> make_leaderboard(std::span<const Summary> summaries);

enum class TableFormat { kTable, kCsv };

// Percent with one decimal ("45.9"); "-" for undefined.
std::string format_percent(std::optional<double> value);

std::string render_leaderboard(std::span<const ReportRow> rows,
                               TableFormat format);

enum class ScaleMetric { kAsap, kRsap };

// Columns bin_upper,method,ap (ap as a fraction, full precision).
std::string render_scale_csv(std::span<const ReportRow> rows,
                             ScaleMetric metric);

}  // namespace usbench

#endif  // USBENCH_REPORT_HPP_
