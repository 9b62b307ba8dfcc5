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

#include "usbench/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "CLI11.hpp"
#include "json_util.hpp"
#include "usbench/convert.hpp"
#include "usbench/errors.hpp"
#include "usbench/ingest.hpp"
#include "usbench/metrics.hpp"
#include "usbench/protocol.hpp"
#include "usbench/report.hpp"

namespace usbench::cli {

namespace fs = std::filesystem;

namespace {

// Bad flag combinations found after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("write failed: " + path.string());
}

struct EvaluateOptions {
  std::vector<std::string> ann;
  std::vector<std::string> det;
  std::size_t max_dets = kDefaultMaxDetections;
  std::vector<std::string> partitions = {kAllPartition, kCocoPartition,
                                         kAsapPartition, kRsapPartition};
  bool kitti = false;
  std::string policy = "exclude";
  std::string out_dir;
  int workers = 0;
  std::string method = "method";
  std::string label;
  std::string meta;
};

ScalePartition partition_by_name(const std::string& name) {
  if (name == kAllPartition) return all_scales_partition();
  if (name == kCocoPartition) return coco_area_partition();
  if (name == kAsapPartition) return absolute_octave_partition();
  if (name == kRsapPartition) return relative_octave_partition();
  throw UsageError("unknown partition '" + name +
                   "' (expected all, coco, asap or rsap)");
}

int run_evaluate(const EvaluateOptions& o, std::ostream& out) {
  if (o.det.empty()) throw UsageError("--det is required");
  if (o.ann.size() != o.det.size()) {
    throw UsageError("each --ann needs exactly one --det");
  }
  EvalParams params;
  params.max_dets = o.max_dets;
  params.partitions = {all_scales_partition()};
  for (const auto& name : o.partitions) {
    if (name == kAllPartition) continue;
    params.partitions.push_back(partition_by_name(name));
  }
  if (o.kitti) params.category_iou_overrides = kitti_iou_overrides();
  params.category_policy = o.policy == "zero-fill" ? UndefinedPolicy::kZeroFill
                                                   : UndefinedPolicy::kExcludeFromMean;
  std::string label = o.label;
  if (label.empty() && !o.meta.empty()) {
    label = classify(parse_submission_meta(read_file(o.meta))).text();
  }
  const std::size_t workers = resolve_workers(o.workers);

  Summary summary{o.method, label, {}};
  std::vector<double> caps;
  for (std::size_t i = 0; i < o.ann.size(); ++i) {
    const fs::path ann_path(o.ann[i]);
    const DatasetAnnotations ds =
        parse_dataset(read_file(ann_path), ann_path.stem().string());
    const auto dets = parse_detections(read_file(o.det[i]), ds);
    const EvalResult r = evaluate_dataset(ds, dets, params, workers);
    out << r.dataset_id << "  CAP " << format_percent(r.cap) << "  AP50 "
        << format_percent(r.ap50) << "  AP75 " << format_percent(r.ap75);
    if (r.ap_sml.size() == 3) {
      out << "  APS " << format_percent(r.ap_sml[0]) << "  APM "
          << format_percent(r.ap_sml[1]) << "  APL "
          << format_percent(r.ap_sml[2]);
    }
    if (r.kap) out << "  KAP " << format_percent(r.kap->kap);
    out << "\n";
    if (r.cap) caps.push_back(*r.cap);
    if (!o.out_dir.empty()) {
      write_file(fs::path(o.out_dir) / ("eval_" + r.dataset_id + ".json"),
                 write_eval_result(r));
    }
    summary.datasets.push_back(summarize(r));
  }
  if (caps.empty()) {
    out << "mCAP -\n";
  } else {
    out << "mCAP " << format_percent(aggregate_mcap(caps)) << "\n";
  }
  if (!label.empty()) out << "protocol " << label << "\n";
  if (!o.out_dir.empty()) {
    write_file(fs::path(o.out_dir) / "summary.json", write_summary(summary));
  }
  return kExitOk;
}

struct ConvertOptions {
  std::string from;
  std::string in;
  std::string split;
  std::string out;
  std::string splits;
  std::string dataset_id = "wod_f0";
};

std::vector<SplitSpec> read_splits(const std::string& path) {
  const auto doc = json_util::parse_ordered(read_file(path));
  if (!doc.is_object()) throw ParseError("$: expected {split: [volumes]}");
  std::vector<SplitSpec> splits;
  for (const auto& [name, members] : doc.items()) {
    if (!members.is_array()) throw ParseError("$." + name + ": expected a list");
    SplitSpec s{name, {}};
    for (const auto& m : members) {
      if (!m.is_string()) throw ParseError("$." + name + ": expected text");
      s.member_keys.push_back(m.get<std::string>());
    }
    splits.push_back(std::move(s));
  }
  return splits;
}

int run_convert(const ConvertOptions& o, std::ostream& out) {
  DatasetAnnotations ds = [&] {
    if (o.from == "manga109") {
      if (o.split.empty()) throw UsageError("--split is required for manga109");
      const auto books = load_manga109_books(o.in);
      std::vector<SplitSpec> splits;
      if (!o.splits.empty()) {
        splits = read_splits(o.splits);
      } else {
        std::vector<std::string> titles;
        for (const auto& b : books) titles.push_back(b.title);
        splits = manga109s_splits(titles);
      }
      if (std::none_of(splits.begin(), splits.end(),
                       [&](const SplitSpec& s) { return s.name == o.split; })) {
        std::string names;
        for (const auto& s : splits) names += (names.empty() ? "" : ", ") + s.name;
        throw UsageError("unknown split '" + o.split + "' (have: " + names + ")");
      }
      return convert_manga109(books, splits, o.split);
    }
    std::string id = o.dataset_id;
    if (!o.split.empty()) id += "_" + o.split;
    return extract_wod_f0_subset(parse_wod_intermediate(read_file(o.in)), id);
  }();
  write_file(o.out, serialize_dataset(ds));
  out << ds.dataset_id() << ": " << ds.images().size() << " images, "
      << ds.ground_truths().size() << " boxes -> " << o.out << "\n";
  return kExitOk;
}

int run_classify(const std::string& meta_path, std::ostream& out) {
  const SubmissionMeta meta = parse_submission_meta(read_file(meta_path));
  const ProtocolLabel label = classify(meta);
  out << "label: " << label.text() << "\n";
  out << "training: "
      << (label.training.number_tenths ? "USB " + label.training.number_text()
                                       : std::string("Freestyle"))
      << (label.training.ahpo ? " (AHPO)" : "")
      << (label.training.extra_annotations ? " (extra annotations)" : "")
      << "\n";
  out << "evaluation: " << to_string(label.evaluation) << "\n";
  for (const auto& v : validate_hyperparameter_grids(meta.hyperparameter_grids).violations) {
    out << "grid " << v.grid << ": " << v.reason << "\n";
  }
  const auto missing = check_compatibility(meta);
  std::size_t required = 0;
  for (const auto& ob : missing) {
    const bool req = ob.level == ObligationLevel::kRequired;
    required += req;
    out << (req ? "[required] " : "[advisory] ") << ob.id << ": "
        << ob.description << "\n";
  }
  out << "required: " << required << "  advisory: " << missing.size() - required
      << "\n";
  return kExitOk;
}

struct ReportOptions {
  std::vector<std::string> results;
  std::string format = "table";
  std::string asap_csv;
  std::string rsap_csv;
};

int run_report(const ReportOptions& o, std::ostream& out) {
  std::vector<Summary> summaries;
  for (const auto& r : o.results) {
    fs::path p(r);
    if (fs::is_directory(p)) p /= "summary.json";
    summaries.push_back(parse_summary(read_file(p)));
  }
  const auto rows = make_leaderboard(summaries);
  out << render_leaderboard(rows, o.format == "csv" ? TableFormat::kCsv
                                                    : TableFormat::kTable);
  if (!o.asap_csv.empty()) {
    write_file(o.asap_csv, render_scale_csv(rows, ScaleMetric::kAsap));
  }
  if (!o.rsap_csv.empty()) {
    write_file(o.rsap_csv, render_scale_csv(rows, ScaleMetric::kRsap));
  }
  return kExitOk;
}

}  // namespace

unsigned resolve_workers(int flag_value) {
  if (flag_value > 0) return static_cast<unsigned>(flag_value);
  if (const char* env = std::getenv("USBENCH_WORKERS")) {
    unsigned v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    auto [ptr, ec] = std::from_chars(env, end, v);
    if (ec == std::errc() && ptr == end && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Scale-aware object detection benchmark tools", "usbench"};
  app.set_version_flag("--version", USBENCH_VERSION);
  app.require_subcommand(1);

  EvaluateOptions eval;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate detections");
  evaluate->add_option("--ann", eval.ann, "Annotation JSON (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--det", eval.det, "Detection JSON, one per --ann")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--max-dets", eval.max_dets, "Detections kept per image")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--partitions", eval.partitions,
                       "Scale partitions: all, coco, asap, rsap")
      ->delimiter(',');
  evaluate->add_flag("--kitti", eval.kitti, "Also compute KAP");
  evaluate->add_option("--policy", eval.policy, "Undefined cells in category means")
      ->check(CLI::IsMember({"exclude", "zero-fill"}));
  evaluate->add_option("--out", eval.out_dir, "Write eval_<id>.json and summary.json here");
  evaluate->add_option("--workers", eval.workers, "Worker threads");
  evaluate->add_option("--method", eval.method, "Method name for the summary");
  evaluate->add_option("--label", eval.label, "Protocol label for the summary");
  evaluate->add_option("--meta", eval.meta, "Submission metadata to derive the label")
      ->check(CLI::ExistingFile);

  ConvertOptions conv;
  auto* convert = app.add_subcommand("convert", "Convert source annotations");
  convert->add_option("--from", conv.from, "manga109 or wod-intermediate")
      ->required()
      ->check(CLI::IsMember({"manga109", "wod-intermediate"}));
  convert->add_option("--in", conv.in, "Input file or directory")
      ->required()
      ->check(CLI::ExistingPath);
  convert->add_option("--split", conv.split, "Split name");
  convert->add_option("--out", conv.out, "Output annotation JSON")->required();
  convert->add_option("--splits", conv.splits, "Split definition JSON")
      ->check(CLI::ExistingFile);
  convert->add_option("--dataset-id", conv.dataset_id, "WOD dataset id prefix");

  std::string meta_path;
  auto* cls = app.add_subcommand("classify", "Label a submission");
  cls->add_option("--meta", meta_path, "Submission metadata JSON")
      ->required()
      ->check(CLI::ExistingFile);

  ReportOptions rep;
  auto* report = app.add_subcommand("report", "Render a leaderboard");
  report->add_option("--results", rep.results, "summary.json files or directories")
      ->required();
  report->add_option("--format", rep.format, "table or csv")
      ->check(CLI::IsMember({"table", "csv"}));
  report->add_option("--asap-csv", rep.asap_csv, "Write ASAP CSV");
  report->add_option("--rsap-csv", rep.rsap_csv, "Write RSAP CSV");

  std::vector<const char*> argv = {"usbench"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*evaluate) return run_evaluate(eval, out);
    if (*convert) return run_convert(conv, out);
    if (*cls) return run_classify(meta_path, out);
    return run_report(rep, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
}

}  // namespace usbench::cli
