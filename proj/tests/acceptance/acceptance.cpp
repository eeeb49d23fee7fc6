// Copyright 2026 The treedet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances and time budgets are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "scene.hpp"
#include "text_util.hpp"
#include "treedet/error.hpp"
#include "treedet/evalkit.hpp"
#include "treedet/geocore.hpp"
#include "treedet/pipeline.hpp"
#include "treedet/tiler.hpp"
#include "treedet/trainlog.hpp"
#include "treedet/vector_io.hpp"

using namespace treedet;
using nlohmann::json;

namespace {

constexpr double kF1Tolerance = 5e-4;
constexpr double kApTolerance = 1e-9;
constexpr double kRoundTripPx = 1e-9;
constexpr double kAreaRelTolerance = 1e-6;

constexpr double kF1BudgetS = 1e-3;
constexpr double kApBudgetS = 10.0;
constexpr double kNmsBudgetS = 5.0;
constexpr double kGeoBudgetS = 2.0;
constexpr double kClipBudgetS = 5.0;
constexpr double kEndToEndBudgetS = 30.0;
constexpr double kThroughputBudgetS = 1.0;

struct Outcome {
  bool ok;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, double budget_s, const std::function<Outcome()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = budget_s <= 0 || s < budget_s;
  const bool pass = o.ok && in_time;
  if (!pass) ++failures;
  std::string timing = budget_s > 0 ? " [" + detail::format_double(s) + " s, budget " +
                                          detail::format_double(budget_s) + " s]"
                                    : "";
  if (o.ok && !in_time) o.detail += " (over time budget)";
  std::printf("%s %s: %s%s\n", pass ? "PASS" : "FAIL", name, o.detail.c_str(), timing.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) { return detail::format_double(v); }

LossSeries loss_log(const std::string& name) {
  return parse_loss_log(detail::read_text_file(std::string(TREEDET_DATA) + "/loss_logs/" + name + ".csv"), name);
}

Ring random_star(std::mt19937_64& rng, double cx, double cy, double rmax) {
  std::uniform_int_distribution<int> nv(3, 14);
  std::uniform_real_distribution<double> rad(0.2 * rmax, rmax), jitter(0.0, 1.0);
  const int n = nv(rng);
  Ring r;
  for (int i = 0; i < n; ++i) {
    const double a = 2 * std::numbers::pi * (i + 0.8 * jitter(rng)) / n;
    const double rr = rad(rng);
    r.push_back({cx + rr * std::cos(a), cy + rr * std::sin(a)});
  }
  r.push_back(r.front());
  return r;
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  return detail::read_binary_file(path);
}

Errc shapefile_error(const std::vector<std::uint8_t>& bytes) {
  try {
    parse_shapefile(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::invalid_argument;
}

}  // namespace

int main() {
  criterion("f1 consistency", kF1BudgetS, [] {
    const double f = f1_score(0.969, 0.88);
    return Outcome{std::abs(f - 0.922) <= kF1Tolerance, "f1(0.969, 0.88) = " + fmt(f)};
  });

  criterion("feature map shape", 0, [] {
    const FeatureMapShape s = feature_map_shape(1000, 1000, 32);
    return Outcome{s == FeatureMapShape{32, 32}, std::to_string(s.width) + "x" + std::to_string(s.height)};
  });

  criterion("config fidelity", 0, [] {
    const ModelConfig c = default_config();
    int matched = 0;
    matched += c.batch_size == 1;
    matched += c.detection_min_confidence == 0.9;
    matched += c.detection_max_instances == 100;
    matched += c.learning_momentum == 0.9;
    matched += c.learning_rate == 0.001;
    matched += c.steps_per_epoch == 100;
    matched += c.train_rois_per_image == 110;
    matched += c.validation_steps == 50;
    matched += c.weight_decay == 0.0001;
    matched += c.epochs == 50;
    const bool backbone = c.backbone == "resnet101";
    return Outcome{matched == 10 && backbone,
                   std::to_string(matched) + "/10 values match, backbone " + c.backbone};
  });

  criterion("best epoch from loss tables", 0, [] {
    const LossSeries b1 = loss_log("batch_1"), b5 = loss_log("batch_5"), b10 = loss_log("batch_10");
    const BestEpoch best = select_best_epoch(b1, EpochCriterion::min_val_loss);
    const double final5 = b5.points.back().val_loss;
    const BatchComparison cmp = compare_batch_sizes({b1, b5, b10});
    const bool ok = best.epoch == 35 && best.value == 1.1546 && final5 == 1.3668 &&
                    cmp.rows.back().label == "batch_5";
    return Outcome{ok, "bs1 min " + fmt(best.value) + " @ epoch " + std::to_string(best.epoch) + ", bs5 final " +
                           fmt(final5) + ", last " + cmp.rows.back().label};
  });

  criterion("split fidelity", 0, [] {
    std::vector<std::string> ids;
    for (int i = 0; i < 70; ++i) ids.push_back(tile_name(i / 10, i % 10));
    for (std::uint64_t seed : {0ull, 1ull, 42ull, 123456789ull}) {
      const Split a = split_dataset(ids, SplitCounts{50, 10, 10}, seed);
      const Split b = split_dataset(ids, SplitCounts{50, 10, 10}, seed);
      std::set<std::string> all(a.train.begin(), a.train.end());
      all.insert(a.val.begin(), a.val.end());
      all.insert(a.test.begin(), a.test.end());
      if (a.train.size() != 50 || a.val.size() != 10 || a.test.size() != 10 || all.size() != 70 || !(a == b))
        return Outcome{false, "seed " + std::to_string(seed) + " violates size, disjointness or determinism"};
    }
    return Outcome{true, "50/10/10 disjoint and deterministic for 4 seeds"};
  });

  criterion("AP oracle equivalence", kApBudgetS, [] {
    std::mt19937_64 rng(20240611);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto inst = oracle::random_instance(rng, 4, 10, 5);
      const double ours = average_precision(inst, 0.5).ap;
      const double ref = oracle::envelope_ap(oracle::pr_points(inst, 0.5));
      worst = std::max(worst, std::abs(ours - ref));
    }
    return Outcome{worst <= kApTolerance, "1000 instances, max |AP - oracle| = " + fmt(worst)};
  });

  criterion("NMS oracle equivalence", kNmsBudgetS, [] {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> count(0, 20), step(1, 20);
    std::uniform_real_distribution<double> thr(0.2, 0.8);
    for (int s = 0; s < 1000; ++s) {
      std::vector<Detection> dets;
      const int n = count(rng);
      for (int i = 0; i < n; ++i) dets.push_back({oracle::random_box(rng, 80, 5, 40), step(rng) / 20.0, "c", {}});
      const double t = thr(rng);
      const auto kept = nms(dets, t);
      const auto ref = oracle::reference_nms(dets, t);
      if (kept.size() != ref.size()) return Outcome{false, "set " + std::to_string(s) + " differs in size"};
      for (std::size_t i = 0; i < kept.size(); ++i)
        if (!(kept[i].box == ref[i].box) || kept[i].score != ref[i].score)
          return Outcome{false, "set " + std::to_string(s) + " differs at " + std::to_string(i)};
      for (std::size_t i = 0; i < kept.size(); ++i)
        for (std::size_t j = i + 1; j < kept.size(); ++j)
          if (oracle::iou(kept[i].box, kept[j].box) > t)
            return Outcome{false, "set " + std::to_string(s) + " breaks the pairwise-IoU certificate"};
    }
    return Outcome{true, "1000 sets match the reference and the certificate"};
  });

  criterion("geotransform round trip", kGeoBudgetS, [] {
    std::mt19937_64 rng(5);
    // Well-conditioned: |origin| / gsd stays below ~2e6 px, so the geo
    // coordinates themselves carry sub-1e-9 px resolution.
    std::uniform_real_distribution<double> origin(-1e5, 1e5), scale(0.05, 50), rot(-0.2, 0.2), px(0, 10000);
    double worst = 0;
    for (int i = 0; i < 100000; ++i) {
      const double w = scale(rng), h = -scale(rng);
      const GeoTransform gt(origin(rng), w, rot(rng) * w, origin(rng), rot(rng) * std::abs(h), h);
      const PixelPoint p{px(rng), px(rng)};
      const PixelPoint back = gt.geo_to_pixel(gt.pixel_to_geo(p));
      worst = std::max({worst, std::abs(back.col - p.col), std::abs(back.row - p.row)});
    }
    return Outcome{worst < kRoundTripPx, "1e5 round trips, max error " + fmt(worst) + " px"};
  });

  criterion("clipping area conservation", kClipBudgetS, [] {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> cx(0, 3000), cy(0, 2000), rmax(20, 400);
    const auto grid = tile_grid(3000, 2000, 1000);
    AssignOptions opts;
    opts.min_area_frac = 0;
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      // Keep the polygon inside the raster so every piece lands in some tile.
      const double r = rmax(rng);
      const double x = std::clamp(cx(rng), r, 3000 - r), y = std::clamp(cy(rng), r, 2000 - r);
      FeatureSet fs;
      fs.space = CoordSpace::pixel;
      Feature f;
      f.geometry = normalize_polygon({random_star(rng, x, y, r)}, RingRoles::by_winding);
      const double original = polygon_area(std::get<PolygonGeometry>(f.geometry));
      fs.features.push_back(std::move(f));
      fs.recompute_bbox();
      double sum = 0;
      for (const TileAnnotation& t : assign_annotations(fs, grid, opts))
        for (const LabeledRing& lr : t.polygons) sum += ring_area(lr.ring);
      worst = std::max(worst, std::abs(sum - original) / original);
    }
    return Outcome{worst <= kAreaRelTolerance, "1000 polygons, max relative area error " + fmt(worst)};
  });

  criterion("shapefile fixtures", 0, [] {
    const std::string dir = std::string(TREEDET_FIXTURES) + "/shapefile/";
    const std::vector<std::uint8_t> shp = read_bytes(dir + "square.shp");
    const FeatureSet fs = parse_shapefile(shp);
    bool geometry = fs.size() == 1 && fs.features[0].is_polygon();
    if (geometry) {
      const auto& poly = std::get<PolygonGeometry>(fs.features[0].geometry);
      const Rect b = ring_bounds(poly.rings.at(0));
      geometry = poly.rings.size() == 1 && poly.rings[0].size() == 5 && polygon_area(poly) == 1.0 && b.x0 == 0 &&
                 b.y0 == 0 && b.x1 == 1 && b.y1 == 1;
    }
    std::vector<std::uint8_t> bad = shp;
    bad[3] = 0x0b;  // file code 9995
    const Errc magic = shapefile_error(bad);
    std::vector<std::uint8_t> cut(shp.begin(), shp.end() - 20);
    const Errc truncated = shapefile_error(cut);
    const bool ok = geometry && magic == Errc::bad_magic && truncated == Errc::truncated;
    return Outcome{ok, std::string("unit square ") + (geometry ? "ok" : "wrong") + ", bad magic -> " +
                           std::string(errc_name(magic)) + ", truncated -> " + std::string(errc_name(truncated))};
  });

  criterion("end to end with stub adapter", kEndToEndBudgetS, [] {
    scene::TempDir dir("acceptance_e2e");
    // 12 planted 50 x 50 px crowns, 0.08 m pixels, projected from a
    // geographic GeoJSON through a world file.
    const double gsd = 0.08, ox = 500000.0, oy = 100000.0;
    detail::write_text_file(dir / "raster.tfw", fmt(gsd) + "\n0\n0\n" + fmt(-gsd) + "\n" + fmt(ox + gsd / 2) + "\n" +
                                                    fmt(oy - gsd / 2) + "\n");
    json fc = {{"type", "FeatureCollection"}, {"features", json::array()}};
    std::vector<scene::Square> squares;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) squares.push_back({150.0 + 700 * c, 200.0 + 600 * r, 50});
    for (const scene::Square& s : squares) {
      json ring = json::array();
      for (const Vec2& v : scene::square_ring(s)) ring.push_back({ox + v.x * gsd, oy - v.y * gsd});
      fc["features"].push_back({{"type", "Feature"},
                                {"properties", {{"label", "coconut"}}},
                                {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}}});
    }
    detail::write_text_file(dir / "trees.geojson", fc.dump());
    scene::write_scene(dir, 3000, 2000, squares);  // raster.png; its pixel features are not used
    scene::Captured io;
    auto con = io.console();
    if (cmd_ingest({dir / "trees.geojson", dir / "raster.tfw", dir / "pixel.geojson", {}, {}, false}, con) != 0)
      return Outcome{false, "ingest failed: " + io.err.str()};
    TileOptions t;
    t.raster_path = dir / "raster.png";
    t.features_path = dir / "pixel.geojson";
    t.out_dir = dir / "tiles";
    if (cmd_tile(t, con) != 0) return Outcome{false, "tile failed: " + io.err.str()};
    const std::string via = dir / "tiles/via_annotations.json";
    if (cmd_gt_to_detections({via, dir / "canned.jsonl"}, con) != 0) return Outcome{false, "canned detections failed"};
    InferOptions inf;
    inf.tiles_dir = dir / "tiles";
    inf.endpoint = std::string("stdio:") + TREEDET_STUB_ADAPTER + " --fixture " + (dir / "canned.jsonl");
    inf.out_path = dir / "raw.jsonl";
    inf.concurrency = 2;
    if (cmd_infer(inf, con) != 0) return Outcome{false, "infer failed: " + io.err.str()};
    PostprocessOptions pp;
    pp.in_path = inf.out_path;
    pp.out_path = dir / "post.jsonl";
    if (cmd_postprocess(pp, con) != 0) return Outcome{false, "postprocess failed"};
    EvaluateOptions e;
    e.gt_path = via;
    e.dets_path = pp.out_path;
    e.timing_path = inf.out_path + ".timing.jsonl";
    e.out_prefix = dir / "eval";
    if (cmd_evaluate(e, con) != 0) return Outcome{false, "evaluate failed: " + io.err.str()};
    const json head = json::parse(detail::split_lines(detail::read_text_file(dir / "eval.jsonl")).front());
    const json& m = head["modes"]["box@0.5"];
    const double ap = m["ap"], f1 = m["f1"];
    const std::size_t tp = m["tp"];
    return Outcome{ap == 1.0 && f1 == 1.0 && tp == 12,
                   "AP " + fmt(ap) + ", F1 " + fmt(f1) + ", " + std::to_string(tp) + "/12 crowns matched"};
  });

  criterion("postprocess + evaluate throughput", kThroughputBudgetS, [] {
    scene::TempDir dir("acceptance_throughput");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> pos(0, 940), side(20, 60), score(0.85, 1.0);
    std::vector<TileAnnotation> gt(1);
    gt[0].tile_id = "r00_c00";
    std::vector<TileDetections> raw(1);
    raw[0].tile_id = "r00_c00";
    for (int i = 0; i < 100; ++i) {
      const double x = pos(rng), y = pos(rng), s = side(rng);
      gt[0].polygons.push_back({scene::square_ring({x, y, s}), "coconut"});
      const Ring ring = scene::square_ring({x + 1, y + 1, s});
      raw[0].dets.push_back({Box::from_rect(ring_bounds(ring)), score(rng), "coconut", ring});
    }
    detail::write_text_file(dir / "gt.json", emit_via(gt, {{"r00_c00", "r00_c00.png"}}, {{"r00_c00", -1}}));
    write_detection_file(dir / "raw.jsonl", raw);
    scene::Captured io;
    auto con = io.console();
    const auto t0 = std::chrono::steady_clock::now();
    PostprocessOptions pp;
    pp.in_path = dir / "raw.jsonl";
    pp.out_path = dir / "post.jsonl";
    if (cmd_postprocess(pp, con) != 0) return Outcome{false, "postprocess failed"};
    EvaluateOptions e;
    e.gt_path = dir / "gt.json";
    e.dets_path = pp.out_path;
    e.out_prefix = dir / "eval";
    e.mask = true;
    if (cmd_evaluate(e, con) != 0) return Outcome{false, "evaluate failed: " + io.err.str()};
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return Outcome{true, "1000x1000 tile, 100 detections, box and mask modes in " + fmt(s) + " s"};
  });

  std::printf("%d criteria failed\n", failures);
  return failures ? 1 : 0;
}
