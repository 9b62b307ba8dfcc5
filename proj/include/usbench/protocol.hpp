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

// Training-division and test-resolution classification of benchmark
// submissions, plus the compatibility reporting checklist.

#ifndef USBENCH_PROTOCOL_HPP_
#define USBENCH_PROTOCOL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace usbench {

enum class GridKind { kExponential, kLinear };

struct HyperparameterGrid {
  std::string name;
  GridKind kind = GridKind::kExponential;
  std::vector<double> choices;
};

struct TestTimeAugmentation {
  // 0 means the number of scales was not disclosed.
  int n_scales = 0;
  bool flip = false;
};

struct ReportedResult {
  std::string training_label;  // "1.0", "USB 2.0", "Standard USB 3.0", ...
  bool has_tta = false;
  bool has_ahpo = false;
  bool has_extra_annotations = false;
  bool has_extra_pretraining = false;
};

struct SubmissionMeta {
  double max_epochs = 0.0;
  bool uses_extra_annotation_types = false;
  bool ahpo = false;
  std::vector<HyperparameterGrid> hyperparameter_grids;
  double augmentation_epoch_time_factor = 1.0;
  std::int64_t test_width = 0;
  std::int64_t test_height = 0;
  std::optional<TestTimeAugmentation> tta;
  std::vector<std::string> pretrain_datasets;
  std::vector<ReportedResult> reported_results;
};

enum class TrainingDivision { kUsb1_0, kUsb2_0, kUsb3_0, kUsb3_1, kFreestyle };

enum class EvaluationClass { kMicro, kMini, kStandard, kLarge, kHuge, kFreestyle };

struct TrainingLabel {
  TrainingDivision base = TrainingDivision::kUsb1_0;
  bool ahpo = false;              // effective flag, after implied AHPO
  bool extra_annotations = false;
  // Protocol number in tenths (10 = 1.0, 25 = 2.5, 31 = 3.1). Unset for
  // Freestyle.
  std::optional<int> number_tenths;

  std::string number_text() const;  // "2.5", or "Freestyle"
};

struct ProtocolLabel {
  TrainingLabel training;
  EvaluationClass evaluation = EvaluationClass::kStandard;

  // "Standard USB 1.0", "Huge USB 2.5", "Freestyle".
  std::string text() const;
};

const char* to_string(TrainingDivision division);
const char* to_string(EvaluationClass cls);

// Largest admitted test area (width * height) of a class; Freestyle has none.
std::optional<std::int64_t> max_resolution(EvaluationClass cls);

// Epochs a fractional schedule may overshoot a division bound.
inline constexpr double kEpochRoundingTolerance = 1.0;
// Per-side slack when comparing against a resolution bound.
inline constexpr std::int64_t kResolutionSlackPixels = 8;
// Augmentation that more than doubles the time per epoch counts as AHPO.
inline constexpr double kAugmentationTimeFactorLimit = 2.0;
inline constexpr double kMinExponentialRatio = 2.0;
inline constexpr std::size_t kMaxLinearChoices = 11;

struct GridViolation {
  std::string grid;
  std::string reason;
};

struct GridCheck {
  bool compliant = true;
  std::vector<GridViolation> violations;
};

// Exponential grids need every adjacent ratio >= 2, linear grids at most 11
// choices. Throws ValueError for a non-positive exponential choice or
// unsorted choices.
GridCheck validate_hyperparameter_grids(
    const std::vector<HyperparameterGrid>& grids);

// True when declared, implied by a non-compliant grid, or implied by
// augmentation more than doubling epoch time.
bool effective_ahpo(const SubmissionMeta& meta);

TrainingDivision training_division(double max_epochs, bool ahpo);
TrainingLabel classify_training(const SubmissionMeta& meta);
EvaluationClass classify_evaluation(
    std::int64_t test_width, std::int64_t test_height,
    const std::optional<TestTimeAugmentation>& tta = std::nullopt);
ProtocolLabel classify(const SubmissionMeta& meta);

enum class ObligationLevel { kRequired, kAdvisory };

struct Obligation {
  std::string id;  // stable key, e.g. "division-1.0", "without-tta"
  ObligationLevel level = ObligationLevel::kRequired;
  std::string description;
};

// Reporting obligations the submission's reported_results do not yet meet.
std::vector<Obligation> check_compatibility(const SubmissionMeta& meta);

// Pre-training datasets accepted without paired results: COCO, WOD,
// Manga109-s and ImageNet-1k (loose spelling).
bool is_standard_pretraining_dataset(std::string_view name);

// JSON metadata document with the SubmissionMeta field names. Requires
// max_epochs, test_width and test_height; throws ParseError otherwise.
SubmissionMeta parse_submission_meta(std::string_view document);

}  // namespace usbench

#endif  // USBENCH_PROTOCOL_HPP_
