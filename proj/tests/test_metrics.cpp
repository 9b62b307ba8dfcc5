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

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle/naive_eval.hpp"
#include "random_instances.hpp"
#include "usbench/errors.hpp"
#include "usbench/ingest.hpp"
#include "usbench/metrics.hpp"

namespace usbench {
namespace {

const std::string kFixtures = USBENCH_FIXTURES;

Eigen::ArrayXd array(std::initializer_list<double> v) {
  Eigen::ArrayXd a(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) a(i++) = x;
  return a;
}

TEST_CASE("linspace matches numpy") {
  const auto t = linspace(0.5, 0.95, 10);
  REQUIRE(t.size() == 10);
  CHECK(t[7] == 0.85);
  CHECK(t[9] == 0.95);
  const auto r = linspace(0.0, 1.0, 101);
  CHECK(r[100] == 1.0);
  CHECK(r[1] == 0.01);
}

TEST_CASE("average precision samples the envelope") {
  const auto r = linspace(0.0, 1.0, 101);
  CHECK(average_precision(array({1.0}), array({1.0}), r) == 1.0);
  // FP then TP: precision 0, 1/2 at recall 0, 1.
  CHECK(average_precision(array({0.0, 0.5}), array({0.0, 1.0}), r) ==
        doctest::Approx(0.5));
  // Recall only reaches 0.5: the upper half samples past the end.
  CHECK(average_precision(array({1.0, 0.5}), array({0.5, 0.5}), r) ==
        doctest::Approx(51.0 / 101.0));
  CHECK(average_precision(Eigen::ArrayXd(), Eigen::ArrayXd(), r) == 0.0);
}

TEST_CASE("aggregate policies") {
  const std::vector<std::optional<double>> v = {0.5, std::nullopt, 1.0};
  CHECK(*aggregate_ap(v, UndefinedPolicy::kExcludeFromMean) == 0.75);
  CHECK(*aggregate_ap(v, UndefinedPolicy::kZeroFill) == 0.5);
  const std::vector<std::optional<double>> none = {std::nullopt};
  CHECK_FALSE(aggregate_ap(none, UndefinedPolicy::kExcludeFromMean).has_value());
}

TEST_CASE("mCAP") {
  const double caps[] = {37.4, 34.5, 65.8};
  CHECK(aggregate_mcap(caps) == doctest::Approx(45.9).epsilon(0.001));
  CHECK_THROWS_AS(aggregate_mcap(std::span<const double>()), DomainError);
}

TEST_CASE("tiny fixture") {
  const auto ds = parse_dataset(read_file(kFixtures + "/tiny_ann.json"));
  const auto dets = parse_detections(read_file(kFixtures + "/tiny_det.json"), ds);
  const auto r = evaluate_dataset(ds, dets, EvalParams{});
  const auto want = oracle::naive_evaluate(ds, dets);
  REQUIRE(r.cap.has_value());
  CHECK(*r.cap == doctest::Approx(*want.cap).epsilon(1e-12));
  CHECK(*r.ap50 == 1.0);
  REQUIRE(r.ap_sml.size() == 3);
  REQUIRE(r.asap.size() == 9);
  REQUIRE(r.rsap.size() == 9);
  CHECK(r.per_category_cap.size() == 2);
  CHECK_FALSE(r.kap.has_value());
}

TEST_CASE("no ground truth means undefined, not zero") {
  const DatasetAnnotations ds("empty", {{Id{std::int64_t{1}}, 100, 100, std::nullopt}},
                             {{Id{std::int64_t{1}}, "a"}}, {});
  const std::vector<Detection> dets = {
      {Id{std::int64_t{1}}, Id{std::int64_t{1}}, BBox{0, 0, 5, 5}, 0.5}};
  const auto r = evaluate_dataset(ds, dets, EvalParams{});
  CHECK_FALSE(r.cap.has_value());
  EvalParams strict;
  strict.category_policy = UndefinedPolicy::kZeroFill;
  CHECK(*evaluate_dataset(ds, dets, strict).cap == 0.0);
}

TEST_CASE("params validation") {
  EvalParams p;
  p.max_dets = 0;
  CHECK_THROWS_AS(validate_params(p), ConfigError);
  p = EvalParams{};
  p.iou_thresholds = {0.7, 0.5};
  CHECK_THROWS_AS(validate_params(p), ConfigError);
  p = EvalParams{};
  p.partitions = {coco_area_partition()};
  CHECK_THROWS_AS(validate_params(p), ConfigError);
}

TEST_CASE("KAP uses one threshold per category") {
  const auto o = kitti_iou_overrides();
  CHECK(o.at("vehicle") == 0.7);
  CHECK(o.at("pedestrian") == 0.5);
  CHECK(o.at("cyclist") == 0.5);
  std::vector<GroundTruth> gts;
  GroundTruth g;
  g.id = Id{std::int64_t{1}};
  g.image_id = Id{std::int64_t{1}};
  g.category_id = Id{std::int64_t{1}};
  g.bbox = {0, 0, 100, 100};
  gts.push_back(g);
  g.id = Id{std::int64_t{2}};
  g.category_id = Id{std::int64_t{2}};
  g.bbox = {300, 300, 100, 100};
  gts.push_back(g);
  const DatasetAnnotations ds("k", {{Id{std::int64_t{1}}, 1000, 1000, std::nullopt}},
                             {{Id{std::int64_t{1}}, "vehicle"},
                              {Id{std::int64_t{2}}, "pedestrian"}},
                             gts);
  // IoU 0.6 for both: a hit for pedestrians only.
  const std::vector<Detection> dets = {
      {Id{std::int64_t{1}}, Id{std::int64_t{1}}, BBox{0, 0, 100, 60}, 0.9},
      {Id{std::int64_t{1}}, Id{std::int64_t{2}}, BBox{300, 300, 100, 60}, 0.9}};
  const auto k = kitti_style_ap(ds, dets, o);
  REQUIRE(k.per_category.size() == 2);
  CHECK(*k.per_category[0].ap == 0.0);
  CHECK(*k.per_category[1].ap == 1.0);
  CHECK(*k.kap == 0.5);
  CHECK_THROWS_AS(kitti_style_ap(ds, dets, {{"vehicle", 0.7}}), ConfigError);
}

TEST_CASE("engine agrees with the naive evaluator on random data") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto inst = testing::random_instance(rng);
    const auto r = evaluate_dataset(inst.dataset, inst.detections, EvalParams{});
    const auto want = oracle::naive_evaluate(inst.dataset, inst.detections);
    REQUIRE(r.cap.has_value() == want.cap.has_value());
    if (r.cap) CHECK(std::abs(*r.cap - *want.cap) <= 1e-9);
  }
}

TEST_CASE("max_dets cap agrees with the naive evaluator") {
  std::mt19937_64 rng(2);
  EvalParams p;
  p.max_dets = 3;
  for (int i = 0; i < 100; ++i) {
    const auto inst = testing::random_instance(rng);
    const auto r = evaluate_dataset(inst.dataset, inst.detections, p);
    const auto want = oracle::naive_evaluate(inst.dataset, inst.detections, 3, false);
    REQUIRE(r.cap.has_value() == want.cap.has_value());
    if (r.cap) CHECK(std::abs(*r.cap - *want.cap) <= 1e-9);
  }
}

TEST_CASE("worker count does not change results") {
  std::mt19937_64 rng(3);
  const auto inst = testing::random_instance(rng, {5, 3, 8});
  const auto a = evaluate_dataset(inst.dataset, inst.detections, EvalParams{}, 1);
  const auto b = evaluate_dataset(inst.dataset, inst.detections, EvalParams{}, 4);
  CHECK(a.cap == b.cap);
  CHECK(a.asap == b.asap);
}

}  // namespace
}  // namespace usbench
