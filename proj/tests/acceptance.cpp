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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle/naive_eval.hpp"
#include "random_instances.hpp"
#include "usbench/convert.hpp"
#include "usbench/ingest.hpp"
#include "usbench/match.hpp"
#include "usbench/metrics.hpp"
#include "usbench/protocol.hpp"
#include "usbench/report.hpp"
#include "usbench/scale.hpp"

namespace {

using namespace usbench;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  const char* name;
  double time_limit_s;  // 0: no limit
  std::function<Outcome()> run;
};

// Appends a failure note; keeps the first few only.
void fail(Outcome& o, const std::string& what) {
  if (o.pass || std::count(o.detail.begin(), o.detail.end(), ';') < 4) {
    o.detail += (o.detail.empty() ? "" : "; ") + what;
  }
  o.pass = false;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

Outcome mcap_arithmetic() {
  struct Row {
    const char* method;
    double coco, wod, m109s, mcap;
  };
  const Row rows[] = {
      {"Faster R-CNN", 37.4, 34.5, 65.8, 45.9},
      {"Cascade R-CNN", 40.3, 36.4, 67.6, 48.1},
      {"RetinaNet", 36.5, 32.5, 65.3, 44.8},
      {"ATSS", 39.4, 35.4, 66.5, 47.1},
      {"ATSEPC", 42.1, 35.0, 67.1, 48.1},
      {"GFL", 40.2, 35.7, 67.3, 47.7},
      {"UniverseNet", 46.7, 38.6, 68.9, 51.4},
      {"UniverseNet-20.08", 47.5, 39.0, 69.9, 52.1},
  };
  Outcome o;
  double worst = 0.0;
  for (const auto& r : rows) {
    const double caps[] = {r.coco, r.wod, r.m109s};
    const double got = aggregate_mcap(caps);
    worst = std::max(worst, std::abs(got - r.mcap));
    if (std::abs(got - r.mcap) > 0.05 + 1e-12) {
      fail(o, std::string(r.method) + " " + fmt("%.3f", got));
    }
  }
  o.detail = "8 rows, max |diff| " + fmt("%.4f", worst) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome protocol_reproduction() {
  struct Row {
    double epochs;
    std::int64_t w, h;
    bool ahpo, extra_annotations;
    int tta_scales;  // 0: no TTA
    const char* label;
  };
  const Row rows[] = {
      {22, 1333, 800, false, false, 0, "Standard USB 1.0"},
      {19, 1312, 800, false, false, 0, "Standard USB 1.0"},
      {18, 1333, 800, false, false, 0, "Standard USB 1.0"},
      {24, 1333, 800, false, false, 0, "Standard USB 1.0"},
      {20, 1493, 896, false, false, 0, "Large USB 1.0"},
      {20, 2000, 1200, false, false, 5, "Large USB 1.0"},
      {24, 3000, 1800, false, false, 13, "Huge USB 1.0"},
      {34, 2000, 1400, false, false, 0, "Huge USB 2.0"},
      {40, 2400, 1600, false, true, 0, "Huge USB 2.5"},
      {300, 512, 512, false, false, 0, "Mini USB 3.0"},
      {273, 512, 512, true, false, 0, "Mini USB 3.1"},
      {300, 768, 768, false, false, 0, "Standard USB 3.0"},
      {300, 1024, 1024, false, false, 0, "Standard USB 3.0"},
      {273, 608, 608, true, false, 0, "Standard USB 3.1"},
      {300, 1280, 1280, false, false, 0, "Large USB 3.0"},
      {300, 1536, 1536, false, false, 0, "Large USB 3.0"},
      {400, 1280, 1280, false, false, 0, "Freestyle"},
      {600, 1536, 1536, false, false, 0, "Freestyle"},
  };
  Outcome o;
  int matched = 0;
  for (const auto& r : rows) {
    SubmissionMeta meta;
    meta.max_epochs = r.epochs;
    meta.test_width = r.w;
    meta.test_height = r.h;
    meta.ahpo = r.ahpo;
    meta.uses_extra_annotation_types = r.extra_annotations;
    if (r.tta_scales) meta.tta = TestTimeAugmentation{r.tta_scales, true};
    const ProtocolLabel label{classify_training(meta),
                              classify_evaluation(r.w, r.h, meta.tta)};
    if (label.text() == r.label) {
      ++matched;
    } else {
      fail(o, std::to_string(r.w) + "x" + std::to_string(r.h) + " got '" +
                  label.text() + "' want '" + r.label + "'");
    }
  }
  o.detail = std::to_string(matched) + "/" + std::to_string(std::size(rows)) +
             " rows exact" + (o.detail.empty() ? "" : "; " + o.detail);
  if (matched < 10) o.pass = false;
  return o;
}

bool close(const std::optional<double>& a, const std::optional<double>& b,
           double tol) {
  if (a.has_value() != b.has_value()) return false;
  return !a || std::abs(*a - *b) <= tol;
}

Outcome oracle_equivalence() {
  constexpr int kInstances = 1000;
  std::mt19937_64 rng(20260101);
  EvalParams params;
  Outcome o;
  int defined = 0;
  for (int i = 0; i < kInstances; ++i) {
    const auto inst = testing::random_instance(rng);
    const EvalResult got = evaluate_dataset(inst.dataset, inst.detections, params);
    const auto want = oracle::naive_evaluate(inst.dataset, inst.detections);
    struct Pair {
      const char* name;
      std::optional<double> got, want;
    };
    std::vector<Pair> pairs = {{"CAP", got.cap, want.cap},
                               {"AP50", got.ap50, want.ap50},
                               {"AP75", got.ap75, want.ap75},
                               {"APS", got.ap_sml[0], want.ap_s},
                               {"APM", got.ap_sml[1], want.ap_m},
                               {"APL", got.ap_sml[2], want.ap_l}};
    for (std::size_t b = 0; b < 9; ++b) {
      pairs.push_back({"ASAP", got.asap[b], want.asap[b]});
      pairs.push_back({"RSAP", got.rsap[b], want.rsap[b]});
    }
    for (const auto& p : pairs) {
      if (!close(p.got, p.want, 1e-9)) {
        fail(o, "instance " + std::to_string(i) + " " + p.name);
      }
    }
    defined += got.cap.has_value();
  }
  o.detail = std::to_string(kInstances) + " instances (" +
             std::to_string(defined) + " with ground truth), CAP/AP50/AP75/" +
             "APS/APM/APL/ASAP/RSAP within 1e-9" +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

testing::Instance large_instance() {
  std::mt19937_64 rng(7);
  std::vector<ImageInfo> images;
  std::vector<GroundTruth> gts;
  std::vector<Detection> dets;
  std::int64_t next = 1;
  for (std::int64_t i = 1; i <= 1000; ++i) {
    ImageInfo img{Id{i}, testing::uniform_int(rng, 320, 1920),
                  testing::uniform_int(rng, 240, 1280), std::nullopt};
    std::vector<BBox> boxes;
    for (int g = 0; g < 8; ++g) {
      GroundTruth gt;
      gt.id = Id{next++};
      gt.image_id = img.id;
      gt.category_id = Id{std::int64_t{testing::uniform_int(rng, 1, 3)}};
      gt.bbox = testing::random_box(rng, img.width, img.height);
      gt.iscrowd = testing::uniform(rng, 0, 1) < 0.05;
      boxes.push_back(gt.bbox);
      gts.push_back(gt);
    }
    for (int d = 0; d < 30; ++d) {
      Detection det;
      det.image_id = img.id;
      det.category_id = Id{std::int64_t{testing::uniform_int(rng, 1, 3)}};
      det.bbox = d < 16 ? testing::jitter(rng, boxes[static_cast<std::size_t>(d % 8)])
                        : testing::random_box(rng, img.width, img.height);
      det.score = testing::uniform(rng, 0, 1);
      dets.push_back(det);
    }
    images.push_back(img);
  }
  return {DatasetAnnotations("synthetic1000", std::move(images),
                             {{Id{std::int64_t{1}}, "a"},
                              {Id{std::int64_t{2}}, "b"},
                              {Id{std::int64_t{3}}, "c"}},
                             std::move(gts)),
          std::move(dets)};
}

Outcome determinism() {
  const auto inst = large_instance();
  EvalParams params;
  std::string reference;
  Outcome o;
  for (std::size_t workers : {1u, 2u, 8u}) {
    const EvalResult r = evaluate_dataset(inst.dataset, inst.detections, params, workers);
    const std::string doc = write_eval_result(r);
    if (reference.empty()) {
      reference = doc;
      o.detail = "CAP " + fmt("%.17g", r.cap.value_or(NAN));
    } else if (doc != reference) {
      fail(o, std::to_string(workers) + " workers differ from 1 worker");
    }
  }
  o.detail = "1000 images, 1/2/8 workers: " +
             (o.pass ? "identical full-precision documents, " + o.detail : o.detail);
  return o;
}

Outcome partition_totality() {
  const ScalePartition asap = absolute_octave_partition();
  const ScalePartition rsap = relative_octave_partition();
  Outcome o;
  if (asap.size() != 9) fail(o, "ASAP has " + std::to_string(asap.size()) + " bins");
  if (rsap.size() != 9) fail(o, "RSAP has " + std::to_string(rsap.size()) + " bins");
  std::mt19937_64 rng(99);
  std::vector<std::size_t> asap_hits(asap.size()), rsap_hits(rsap.size());
  for (int i = 0; i < 100000; ++i) {
    ImageInfo img{Id{std::int64_t{1}}, testing::uniform_int(rng, 1, 4096),
                  testing::uniform_int(rng, 1, 4096), std::nullopt};
    // Log-uniform sides from 1e-3 up to twice the image, to cover clamping.
    const BBox box{0, 0, std::exp2(testing::uniform(rng, -10, 13)),
                   std::exp2(testing::uniform(rng, -10, 13))};
    for (auto [part, hits] : {std::pair{&asap, &asap_hits}, std::pair{&rsap, &rsap_hits}}) {
      const double v = measure_detection(box, img, part->basis);
      std::size_t containing = 0, which = 0;
      for (std::size_t b = 0; b < part->size(); ++b) {
        if (part->bins[b].contains(v)) {
          ++containing;
          which = b;
        }
      }
      if (containing != 1 || assign_bin(v, *part) != which) {
        fail(o, part->name + " value " + fmt("%.17g", v));
      }
      ++(*hits)[which];
    }
  }
  std::ostringstream d;
  d << "1e5 boxes, bins 9+9, each in exactly one bin; asap hits";
  for (auto h : asap_hits) d << " " << h;
  o.detail = d.str() + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome monotonicity() {
  std::mt19937_64 rng(4242);
  EvalParams params;
  params.partitions = {all_scales_partition()};
  Outcome o;
  std::size_t cells = 0, pairs_checked = 0;
  for (int i = 0; i < 1000; ++i) {
    auto inst = testing::random_instance(rng);
    const auto& ds = inst.dataset;
    const EvalResult before = evaluate_dataset(ds, inst.detections, params);

    // A detection below every score, placed off the image so it cannot
    // overlap any ground truth.
    double min_score = 1.0;
    for (const auto& d : inst.detections) min_score = std::min(min_score, d.score);
    const auto& img = ds.images()[static_cast<std::size_t>(
        testing::uniform_int(rng, 0, static_cast<int>(ds.images().size()) - 1))];
    const auto& cat = ds.categories()[static_cast<std::size_t>(
        testing::uniform_int(rng, 0, static_cast<int>(ds.categories().size()) - 1))];
    auto with_fp = inst.detections;
    with_fp.push_back({img.id, cat.id,
                       BBox{static_cast<double>(img.width) + 10.0, 0, 20, 20},
                       min_score - 0.5});
    const EvalResult after = evaluate_dataset(ds, with_fp, params);
    const PartitionAp& a = *before.find_partition(kAllPartition);
    const PartitionAp& b = *after.find_partition(kAllPartition);
    for (std::size_t t = 0; t < a.num_thresholds(); ++t) {
      for (std::size_t c = 0; c < a.num_categories(); ++c) {
        const auto x = a.at(t, c, 0), y = b.at(t, c, 0);
        if (x.has_value() != y.has_value() || (x && *y > *x)) {
          fail(o, "AP rose after appending an FP, instance " + std::to_string(i));
        }
        ++cells;
      }
    }

    // Matched pairs per (image, category) over ascending thresholds.
    for (const auto& im : ds.images()) {
      for (const auto& c : ds.categories()) {
        std::vector<Detection> dets;
        std::vector<GroundTruth> gts;
        for (const auto& d : inst.detections) {
          if (d.image_id == im.id && d.category_id == c.id) dets.push_back(d);
        }
        for (const auto& g : ds.ground_truths()) {
          if (g.image_id == im.id && g.category_id == c.id) gts.push_back(g);
        }
        std::size_t prev = std::numeric_limits<std::size_t>::max();
        for (double thr = 0.05; thr <= 1.0 + 1e-12; thr += 0.05) {
          const auto m = match_image_category(dets, gts, im, thr, ScaleRange::everything());
          if (m.matched_pairs() > prev) {
            fail(o, "matched pairs rose at IoU " + fmt("%.2f", thr) +
                        ", instance " + std::to_string(i));
          }
          prev = m.matched_pairs();
          ++pairs_checked;
        }
      }
    }
  }
  o.detail = "1e3 instances: " + std::to_string(cells) + " AP cells, " +
             std::to_string(pairs_checked) + " threshold steps" +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome converter_fixtures() {
  Outcome o;
  const std::string root = USBENCH_FIXTURES;
  const auto books = load_manga109_books(root + "/manga109");
  const std::vector<SplitSpec> splits = {{"train", {"Alpha"}}, {"test", {"Beta"}}};
  const auto train = convert_manga109(books, splits, "train");
  const auto test = convert_manga109(books, splits, "test");
  struct Want {
    std::int64_t image;
    std::int64_t category;
    BBox box;
  };
  const Want want_train[] = {
      {1, 3, {10, 20, 800, 580}},  {1, 2, {100, 120, 60, 70}},
      {1, 1, {90, 110, 210, 450}}, {1, 4, {400, 50, 50, 150}},
      {2, 4, {0, 0, 33.5, 70}},
  };
  auto check = [&](const DatasetAnnotations& ds, std::span<const Want> want,
                   std::size_t images, const std::string& id) {
    if (ds.dataset_id() != id) fail(o, "dataset id " + ds.dataset_id());
    if (ds.images().size() != images) {
      fail(o, id + " has " + std::to_string(ds.images().size()) + " images");
    }
    if (ds.ground_truths().size() != want.size()) {
      fail(o, id + " has " + std::to_string(ds.ground_truths().size()) + " boxes");
      return;
    }
    for (std::size_t k = 0; k < want.size(); ++k) {
      const auto& g = ds.ground_truths()[k];
      if (g.image_id != Id{want[k].image} || g.category_id != Id{want[k].category} ||
          !(g.bbox.x == want[k].box.x && g.bbox.y == want[k].box.y &&
            g.bbox.w == want[k].box.w && g.bbox.h == want[k].box.h)) {
        fail(o, id + " box " + std::to_string(k));
      }
    }
  };
  check(train, want_train, 2, "manga109s_train");
  const Want want_test[] = {{1, 1, {5, 6, 50, 200}}};
  check(test, want_test, 1, "manga109s_test");
  if (train.images().size() == 2 && train.images()[1].file_name != "Alpha/002.jpg") {
    fail(o, "file name " + train.images()[1].file_name.value_or("?"));
  }

  const auto wod = extract_wod_f0_subset(
      parse_wod_intermediate(read_file(root + "/wod_frames.jsonl")), "wod_f0");
  std::vector<std::string> ids;
  for (const auto& img : wod.images()) ids.push_back(std::get<std::string>(img.id));
  const std::vector<std::string> want_ids = {"seg1/0/FRONT", "seg1/10/FRONT",
                                             "seg1/20/FRONT"};
  if (ids != want_ids) fail(o, "WOD kept " + std::to_string(ids.size()) + " frames");
  if (wod.ground_truths().size() != 7) {
    fail(o, "WOD kept " + std::to_string(wod.ground_truths().size()) + " boxes");
  }
  o.detail = "Manga109 2-book fixture exact, WOD frames 0-25 -> {0,10,20}" +
             (o.detail.empty() ? "" : "; " + o.detail);

  if (const char* real = std::getenv("USBENCH_MANGA109_ROOT")) {
    const auto all = load_manga109_books(real);
    std::vector<std::string> titles;
    for (const auto& b : all) titles.push_back(b.title);
    const auto real_splits = manga109s_splits(titles);
    const std::pair<const char*, std::size_t> counts[] = {
        {"68train", 6467}, {"4val", 399}, {"15test", 1289}};
    std::string seen;
    for (const auto& [split, n] : counts) {
      const auto ds = convert_manga109(all, real_splits, split);
      seen += " " + std::to_string(ds.images().size());
      if (ds.images().size() != n) fail(o, std::string(split) + " image count");
    }
    o.detail += "; real data split sizes" + seen;
  } else {
    o.detail += "; real-data check skipped (USBENCH_MANGA109_ROOT unset)";
  }
  return o;
}

Outcome ahpo_grids() {
  auto exp_grid = [](std::vector<double> c) {
    return HyperparameterGrid{"lr", GridKind::kExponential, std::move(c)};
  };
  std::vector<double> eleven, twelve;
  for (int i = 0; i <= 10; ++i) eleven.push_back(i / 10.0);
  for (int i = 0; i <= 11; ++i) twelve.push_back(i / 10.0);
  Outcome o;
  const std::pair<HyperparameterGrid, bool> cases[] = {
      {exp_grid({0.1, 0.2, 0.4, 0.8}), true},
      {exp_grid({0.1, 0.2, 0.5, 1.0}), true},
      {exp_grid({0.1, 0.3, 1.0}), true},
      {{"w", GridKind::kLinear, eleven}, true},
      {{"w", GridKind::kLinear, twelve}, false},
  };
  int ok = 0;
  for (const auto& [grid, compliant] : cases) {
    const bool got = validate_hyperparameter_grids({grid}).compliant;
    if (got == compliant) {
      ++ok;
    } else {
      fail(o, grid.name + " with " + std::to_string(grid.choices.size()) + " choices");
    }
  }
  o.detail = std::to_string(ok) + "/5 grids classified as expected" +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"mcap-arithmetic", 1.0, mcap_arithmetic},
      {"protocol-reproduction", 1.0, protocol_reproduction},
      {"oracle-equivalence", 60.0, oracle_equivalence},
      {"determinism", 30.0, determinism},
      {"partition-totality", 0.0, partition_totality},
      {"monotonicity", 0.0, monotonicity},
      {"converter-fixtures", 0.0, converter_fixtures},
      {"ahpo-grid-rules", 0.0, ahpo_grids},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
      o.pass = false;
      o.detail += "; over the " + fmt("%.0f", c.time_limit_s) + " s budget";
    }
    failures += !o.pass;
    std::printf("%s %-22s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), secs);
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
