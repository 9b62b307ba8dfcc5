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

#include "usbench/protocol.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>

#include "json_util.hpp"
#include "usbench/errors.hpp"

namespace usbench {

namespace {

struct ResolutionClass {
  EvaluationClass cls;
  std::int64_t max_area;
};

constexpr std::array<ResolutionClass, 5> kResolutionClasses = {{
    {EvaluationClass::kMicro, 50'176},
    {EvaluationClass::kMini, 262'144},
    {EvaluationClass::kStandard, 1'066'667},
    {EvaluationClass::kLarge, 2'457'600},
    {EvaluationClass::kHuge, 7'526'400},
}};

// Ratio comparisons on decimal grids such as {0.1, 0.2} land a few ulps
// either side of 2.
constexpr double kRatioSlack = 1e-9;

bool within_epoch_bound(double epochs, double bound) {
  if (epochs <= bound) return true;
  const bool fractional = std::floor(epochs) != epochs;
  return fractional && epochs - bound <= kEpochRoundingTolerance;
}

// Division number (1, 2, 3) of a reported label, 0 for Freestyle, -1 if
// unreadable.
int reported_division(const std::string& label) {
  std::string lower;
  for (unsigned char c : label) lower.push_back(static_cast<char>(std::tolower(c)));
  if (lower.find("freestyle") != std::string::npos) return 0;
  // Last numeric token.
  std::size_t end = label.find_last_of("0123456789");
  if (end == std::string::npos) return -1;
  std::size_t begin = end;
  while (begin > 0 && (std::isdigit(static_cast<unsigned char>(label[begin - 1])) ||
                       label[begin - 1] == '.')) {
    --begin;
  }
  try {
    return static_cast<int>(std::floor(std::stod(label.substr(begin, end - begin + 1))));
  } catch (const std::exception&) {
    return -1;
  }
}

int division_number(TrainingDivision d) {
  switch (d) {
    case TrainingDivision::kUsb1_0:
      return 1;
    case TrainingDivision::kUsb2_0:
      return 2;
    case TrainingDivision::kUsb3_0:
    case TrainingDivision::kUsb3_1:
      return 3;
    case TrainingDivision::kFreestyle:
      return 0;
  }
  return 0;
}

std::string lower_alnum(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

}  // namespace

std::string TrainingLabel::number_text() const {
  if (!number_tenths) return "Freestyle";
  return std::to_string(*number_tenths / 10) + "." +
         std::to_string(*number_tenths % 10);
}

std::string ProtocolLabel::text() const {
  if (!training.number_tenths) return "Freestyle";
  return std::string(to_string(evaluation)) + " USB " + training.number_text();
}

const char* to_string(TrainingDivision division) {
  switch (division) {
    case TrainingDivision::kUsb1_0:
      return "USB 1.0";
    case TrainingDivision::kUsb2_0:
      return "USB 2.0";
    case TrainingDivision::kUsb3_0:
      return "USB 3.0";
    case TrainingDivision::kUsb3_1:
      return "USB 3.1";
    case TrainingDivision::kFreestyle:
      return "Freestyle";
  }
  return "?";
}

const char* to_string(EvaluationClass cls) {
  switch (cls) {
    case EvaluationClass::kMicro:
      return "Micro";
    case EvaluationClass::kMini:
      return "Mini";
    case EvaluationClass::kStandard:
      return "Standard";
    case EvaluationClass::kLarge:
      return "Large";
    case EvaluationClass::kHuge:
      return "Huge";
    case EvaluationClass::kFreestyle:
      return "Freestyle";
  }
  return "?";
}

std::optional<std::int64_t> max_resolution(EvaluationClass cls) {
  for (const auto& rc : kResolutionClasses) {
    if (rc.cls == cls) return rc.max_area;
  }
  return std::nullopt;
}

GridCheck validate_hyperparameter_grids(
    const std::vector<HyperparameterGrid>& grids) {
  GridCheck check;
  for (const auto& grid : grids) {
    const auto& c = grid.choices;
    if (std::adjacent_find(c.begin(), c.end(), std::greater_equal<>()) != c.end()) {
      throw ValueError("grid '" + grid.name +
                       "': choices must be strictly ascending");
    }
    if (grid.kind == GridKind::kExponential) {
      for (double v : c) {
        if (!(v > 0.0)) {
          throw ValueError("grid '" + grid.name +
                           "': exponential choices must be positive");
        }
      }
      for (std::size_t i = 1; i < c.size(); ++i) {
        const double ratio = c[i] / c[i - 1];
        if (ratio < kMinExponentialRatio - kRatioSlack) {
          check.compliant = false;
          check.violations.push_back(
              {grid.name, "adjacent ratio " + std::to_string(ratio) + " < 2"});
        }
      }
    } else if (c.size() > kMaxLinearChoices) {
      check.compliant = false;
      check.violations.push_back(
          {grid.name, std::to_string(c.size()) + " linear choices > 11"});
    }
  }
  return check;
}

bool effective_ahpo(const SubmissionMeta& meta) {
  return meta.ahpo ||
         !validate_hyperparameter_grids(meta.hyperparameter_grids).compliant ||
         meta.augmentation_epoch_time_factor > kAugmentationTimeFactorLimit;
}

TrainingDivision training_division(double max_epochs, bool ahpo) {
  if (!(max_epochs > 0.0)) throw ValueError("max_epochs must be > 0");
  if (within_epoch_bound(max_epochs, 24)) return TrainingDivision::kUsb1_0;
  if (within_epoch_bound(max_epochs, 73)) return TrainingDivision::kUsb2_0;
  if (within_epoch_bound(max_epochs, 300)) {
    return ahpo ? TrainingDivision::kUsb3_1 : TrainingDivision::kUsb3_0;
  }
  return TrainingDivision::kFreestyle;
}

TrainingLabel classify_training(const SubmissionMeta& meta) {
  TrainingLabel label;
  label.ahpo = effective_ahpo(meta);
  label.extra_annotations = meta.uses_extra_annotation_types;
  label.base = training_division(meta.max_epochs, label.ahpo);
  int tenths = 0;
  switch (label.base) {
    case TrainingDivision::kUsb1_0:
      tenths = 10;
      break;
    case TrainingDivision::kUsb2_0:
      tenths = 20;
      break;
    case TrainingDivision::kUsb3_0:
      tenths = 30;
      break;
    case TrainingDivision::kUsb3_1:
      tenths = 31;
      break;
    case TrainingDivision::kFreestyle:
      return label;
  }
  if (label.ahpo && label.base != TrainingDivision::kUsb3_1) tenths += 1;
  if (label.extra_annotations) tenths += 5;
  label.number_tenths = tenths;
  return label;
}

EvaluationClass classify_evaluation(std::int64_t test_width,
                                    std::int64_t test_height,
                                    const std::optional<TestTimeAugmentation>&) {
  if (test_width < 1 || test_height < 1) {
    throw ValueError("test dimensions must be >= 1");
  }
  const std::int64_t area = test_width * test_height;
  const std::int64_t reduced =
      std::max<std::int64_t>(test_width - kResolutionSlackPixels, 0) *
      std::max<std::int64_t>(test_height - kResolutionSlackPixels, 0);
  for (const auto& rc : kResolutionClasses) {
    if (area <= rc.max_area || reduced <= rc.max_area) return rc.cls;
  }
  return EvaluationClass::kFreestyle;
}

ProtocolLabel classify(const SubmissionMeta& meta) {
  return {classify_training(meta),
          classify_evaluation(meta.test_width, meta.test_height, meta.tta)};
}

bool is_standard_pretraining_dataset(std::string_view name) {
  static const std::set<std::string> kAllowed = {
      "coco",  "wod",         "waymoopendataset", "m109s",
      "manga109s", "imagenet1k", "in1k",            "ilsvrc",
      "ilsvrc2012"};
  return kAllowed.contains(lower_alnum(name));
}

std::vector<Obligation> check_compatibility(const SubmissionMeta& meta) {
  const TrainingLabel label = classify_training(meta);
  const auto& reported = meta.reported_results;
  std::vector<Obligation> missing;

  auto has_division = [&](int division) {
    return std::any_of(reported.begin(), reported.end(), [&](const auto& r) {
      return reported_division(r.training_label) == division;
    });
  };
  auto any_of = [&](auto pred) {
    return std::any_of(reported.begin(), reported.end(), pred);
  };

  const int division = division_number(label.base);
  const int highest_lower = division == 0 ? 3 : division - 1;
  const ObligationLevel division_level =
      division == 0 ? ObligationLevel::kAdvisory : ObligationLevel::kRequired;
  for (int d = 1; d <= highest_lower; ++d) {
    if (!has_division(d)) {
      const std::string num = std::to_string(d) + ".0";
      missing.push_back({"division-" + num, division_level,
                         "report a result trained under USB " + num});
    }
  }
  if (label.ahpo && !any_of([](const auto& r) { return !r.has_ahpo; })) {
    missing.push_back({"without-ahpo", ObligationLevel::kRequired,
                       "report a result without aggressive hyperparameter "
                       "optimization"});
  }
  if (label.extra_annotations &&
      !any_of([](const auto& r) { return !r.has_extra_annotations; })) {
    missing.push_back({"without-extra-annotations", ObligationLevel::kAdvisory,
                       "report a result trained without annotations beyond "
                       "2D boxes, if the method allows it"});
  }
  if (meta.tta) {
    if (!any_of([](const auto& r) { return !r.has_tta; })) {
      missing.push_back({"without-tta", ObligationLevel::kRequired,
                         "report a result without test-time augmentation"});
    }
    if (meta.tta->n_scales <= 0) {
      missing.push_back({"tta-scales", ObligationLevel::kRequired,
                         "disclose the number of test-time scales"});
    }
  }
  const bool extra_pretraining = std::any_of(
      meta.pretrain_datasets.begin(), meta.pretrain_datasets.end(),
      [](const std::string& d) { return !is_standard_pretraining_dataset(d); });
  if (extra_pretraining &&
      !(any_of([](const auto& r) { return r.has_extra_pretraining; }) &&
        any_of([](const auto& r) { return !r.has_extra_pretraining; }))) {
    missing.push_back({"pretraining-pair", ObligationLevel::kRequired,
                       "report results both with and without the additional "
                       "pre-training datasets"});
  }
  return missing;
}

SubmissionMeta parse_submission_meta(std::string_view document) {
  using json_util::Json;
  const Json doc = json_util::parse(document);
  if (!doc.is_object()) throw ParseError("$: expected an object");
  SubmissionMeta meta;
  auto opt_bool = [&](const Json& node, const char* key, const std::string& path,
                      bool fallback) {
    auto it = node.find(key);
    if (it == node.end() || it->is_null()) return fallback;
    if (!it->is_boolean()) throw ParseError(path + "." + key + ": expected a boolean");
    return it->get<bool>();
  };
  meta.max_epochs = json_util::read_number(json_util::field(doc, "max_epochs", "$"),
                                           "$.max_epochs");
  if (!(meta.max_epochs > 0.0)) throw ParseError("$.max_epochs: must be > 0");
  meta.test_width = json_util::read_int(json_util::field(doc, "test_width", "$"),
                                        "$.test_width");
  meta.test_height = json_util::read_int(json_util::field(doc, "test_height", "$"),
                                         "$.test_height");
  if (meta.test_width < 1 || meta.test_height < 1) {
    throw ParseError("$.test_width/test_height: must be >= 1");
  }
  meta.uses_extra_annotation_types =
      opt_bool(doc, "uses_extra_annotation_types", "$", false);
  meta.ahpo = opt_bool(doc, "ahpo", "$", false);
  if (auto it = doc.find("augmentation_epoch_time_factor");
      it != doc.end() && !it->is_null()) {
    meta.augmentation_epoch_time_factor =
        json_util::read_number(*it, "$.augmentation_epoch_time_factor");
    if (meta.augmentation_epoch_time_factor < 1.0) {
      throw ParseError("$.augmentation_epoch_time_factor: must be >= 1");
    }
  }
  if (auto it = doc.find("hyperparameter_grids"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError("$.hyperparameter_grids: expected a list");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "$.hyperparameter_grids[" + std::to_string(i) + "]";
      const Json& node = (*it)[i];
      HyperparameterGrid grid;
      if (auto n = node.find("name"); n != node.end() && n->is_string()) {
        grid.name = n->get<std::string>();
      }
      const Json& kind = json_util::field(node, "kind", path);
      if (kind == "exponential") {
        grid.kind = GridKind::kExponential;
      } else if (kind == "linear") {
        grid.kind = GridKind::kLinear;
      } else {
        throw ParseError(path + ".kind: expected \"exponential\" or \"linear\"");
      }
      const Json& choices = json_util::field(node, "choices", path);
      if (!choices.is_array()) throw ParseError(path + ".choices: expected a list");
      for (std::size_t k = 0; k < choices.size(); ++k) {
        grid.choices.push_back(json_util::read_number(
            choices[k], path + ".choices[" + std::to_string(k) + "]"));
      }
      meta.hyperparameter_grids.push_back(std::move(grid));
    }
  }
  if (auto it = doc.find("tta"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) throw ParseError("$.tta: expected an object or null");
    TestTimeAugmentation tta;
    if (auto n = it->find("n_scales"); n != it->end() && !n->is_null()) {
      tta.n_scales = static_cast<int>(json_util::read_int(*n, "$.tta.n_scales"));
    }
    tta.flip = opt_bool(*it, "flip", "$.tta", false);
    meta.tta = tta;
  }
  if (auto it = doc.find("pretrain_datasets"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError("$.pretrain_datasets: expected a list");
    for (const auto& d : *it) {
      if (!d.is_string()) throw ParseError("$.pretrain_datasets: expected text");
      meta.pretrain_datasets.push_back(d.get<std::string>());
    }
  }
  if (auto it = doc.find("reported_results"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError("$.reported_results: expected a list");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "$.reported_results[" + std::to_string(i) + "]";
      const Json& node = (*it)[i];
      ReportedResult r;
      const Json& tl = json_util::field(node, "training_label", path);
      if (tl.is_string()) {
        r.training_label = tl.get<std::string>();
      } else if (tl.is_number()) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.1f", tl.get<double>());
        r.training_label = buf;
      } else {
        throw ParseError(path + ".training_label: expected text");
      }
      r.has_tta = opt_bool(node, "has_tta", path, false);
      r.has_ahpo = opt_bool(node, "has_ahpo", path, false);
      r.has_extra_annotations = opt_bool(node, "has_extra_annotations", path, false);
      r.has_extra_pretraining = opt_bool(node, "has_extra_pretraining", path, false);
      meta.reported_results.push_back(std::move(r));
    }
  }
  return meta;
}

}  // namespace usbench
