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

#include "treedet/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>
#include <thread>

#include "text_util.hpp"
#include "treedet/adapter.hpp"
#include "treedet/annot.hpp"
#include "treedet/error.hpp"
#include "treedet/geocore.hpp"
#include "treedet/parallel.hpp"
#include "treedet/raster.hpp"
#include "treedet/render.hpp"
#include "treedet/tiler.hpp"
#include "treedet/vector_io.hpp"

namespace treedet {

namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

template <class F>
int guarded(Console io, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    io.err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
  }
  return kExitInput;
}

/// Runs `f`, prefixing any library error with the file it concerns.
template <class F>
auto in_file(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    const std::string what = e.what();
    if (what.rfind(path, 0) == 0) throw;
    throw Error(e.code(), path + ": " + what);
  }
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

ModelConfig load_config(const std::optional<std::string>& path) {
  if (!path) return default_config();
  return in_file(*path, [&] { return read_config_file(*path); });
}

ojson config_to_json(const ModelConfig& c) {
  ojson j;
  j["backbone"] = c.backbone;
  j["batch_size"] = c.batch_size;
  j["detection_min_confidence"] = c.detection_min_confidence;
  j["detection_max_instances"] = c.detection_max_instances;
  j["learning_momentum"] = c.learning_momentum;
  j["learning_rate"] = c.learning_rate;
  j["steps_per_epoch"] = c.steps_per_epoch;
  j["train_rois_per_image"] = c.train_rois_per_image;
  j["validation_steps"] = c.validation_steps;
  j["weight_decay"] = c.weight_decay;
  j["epochs"] = c.epochs;
  j["rpn_anchor_scales"] = c.anchor.scales;
  j["rpn_anchor_ratios"] = c.anchor.ratios;
  j["rpn_anchor_stride"] = c.anchor.stride;
  j["backbone_stride"] = c.backbone_stride;
  j["backbone_channels"] = c.backbone_channels;
  j["detection_nms_threshold"] = c.detection_nms_threshold;
  return j;
}

ojson ring_to_flat(const Ring& ring) {
  ojson flat = ojson::array();
  for (const Vec2& v : ring) {
    flat.push_back(v.x);
    flat.push_back(v.y);
  }
  return flat;
}

Ring flat_to_ring(const json& flat) {
  Ring ring;
  for (std::size_t i = 0; i + 1 < flat.size(); i += 2) ring.push_back({flat[i].get<double>(), flat[i + 1].get<double>()});
  return ring;
}

ViaParseResult load_via(const std::string& path) {
  return in_file(path, [&] { return parse_via(detail::read_text_file(path)); });
}

std::vector<TileDetections> load_detections(const std::string& path) {
  return in_file(path, [&] { return read_detection_file(path); });
}

void sort_by_tile(std::vector<TileDetections>& tiles) {
  std::stable_sort(tiles.begin(), tiles.end(),
                   [](const TileDetections& a, const TileDetections& b) { return a.tile_id < b.tile_id; });
}

std::string lower(std::string s) {
  for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_tile_image(const fs::path& p) {
  const std::string ext = lower(p.extension().string());
  return ext == ".png" || ext == ".tif" || ext == ".tiff";
}

struct TimingRecord {
  double seconds = 0;
  bool failed = false;
  std::string error;
};

std::map<std::string, TimingRecord> load_timing(const std::string& path) {
  std::map<std::string, TimingRecord> out;
  const std::string text = detail::read_text_file(path);
  std::size_t lineno = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      TimingRecord r;
      r.seconds = j.at("seconds").get<double>();
      r.failed = j.at("status").get<std::string>() != "ok";
      if (j.contains("error") && j["error"].is_string()) r.error = j["error"].get<std::string>();
      if (r.seconds < 0) throw Error(Errc::schema, "negative seconds");
      out[j.at("tile_id").get<std::string>()] = r;
    } catch (const json::exception& e) {
      throw Error(Errc::schema, path + ": record " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(Errc::schema, path + ": record " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

ojson mode_to_json(const ModeReport& m, bool averaged) {
  ojson j;
  j["precision"] = m.metrics.precision;
  j["recall"] = m.metrics.recall;
  j["f1"] = m.metrics.f1;
  j["ca"] = m.metrics.ca;
  if (!averaged) {
    j["tp"] = m.tp;
    j["fp"] = m.fp;
    j["fn"] = m.fn;
  }
  j["ap"] = m.ap;
  j["ap_101"] = m.ap_101;
  if (averaged) {
    ojson per = ojson::array();
    for (const auto& [t, ap] : m.ap_per_threshold) per.push_back({t, ap});
    j["ap_per_threshold"] = std::move(per);
  } else {
    ojson curve = ojson::array();
    for (const PRPoint& p : m.pr_curve.points) curve.push_back({p.recall, p.precision, p.threshold});
    j["pr_curve"] = std::move(curve);
  }
  return j;
}

bool is_averaged_mode(const std::string& name) { return name.find("coco") != std::string::npos; }

}  // namespace

int cmd_ingest(const IngestOptions& opts, Console io) {
  return guarded(io, [&] {
    FeatureSet fs = in_file(opts.vector_path, [&] { return read_vector_file(opts.vector_path); });
    const GeoTransform gt = in_file(opts.world_path, [&] { return read_world_file(opts.world_path); });
    const std::size_t before = fs.features.size();
    if (opts.tag_key) {
      const std::string value = opts.tag_value.value_or("");
      fs = opts.exclude ? exclude_by_tag(fs, *opts.tag_key, value) : filter_by_tag(fs, *opts.tag_key, value);
    }
    FeatureSet pixel = project_features(fs, gt);
    ensure_parent(opts.out_path);
    detail::write_text_file(opts.out_path, emit_geojson(pixel));
    io.out << "features read: " << before << " (skipped " << fs.skipped << ")\n"
           << "features kept: " << pixel.features.size() << "\n"
           << "wrote " << opts.out_path << "\n";
    if (opts.tag_key && pixel.features.empty()) io.err << "warning: tag filter matched no features\n";
    return int(kExitOk);
  });
}

int cmd_tile(const TileOptions& opts, Console io) {
  return guarded(io, [&] {
    const Image raster = in_file(opts.raster_path, [&] { return read_raster(opts.raster_path); });
    const FeatureSet features = in_file(opts.features_path, [&] { return read_vector_file(opts.features_path); });
    if (features.space != CoordSpace::pixel) {
      throw Error(Errc::invalid_argument,
                  opts.features_path + ": features are in geographic coordinates; run ingest first");
    }
    const std::vector<TileIndex> grid = tile_grid(raster.width, raster.height, opts.tile_size, opts.overlap);
    AssignOptions aopts;
    aopts.min_area_frac = opts.min_area_frac;
    aopts.point_box_side = opts.point_box_side;
    aopts.label_key = opts.label_key;
    aopts.default_label = opts.default_label;
    const std::vector<TileAnnotation> annotations = assign_annotations(features, grid, aopts);

    std::vector<std::size_t> emit;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (opts.keep_empty || !annotations[i].polygons.empty()) emit.push_back(i);

    fs::create_directories(opts.out_dir);
    std::vector<std::int64_t> sizes(emit.size());
    parallel_for(emit.size(), opts.workers, [&](std::size_t k) {
      const TileIndex& t = grid[emit[k]];
      const std::vector<std::uint8_t> png = encode_png(raster.crop(t.x, t.y, t.width, t.height));
      detail::write_binary_file((fs::path(opts.out_dir) / (t.tile_id + ".png")).string(), png);
      sizes[k] = std::int64_t(png.size());
    });

    std::vector<TileAnnotation> emitted;
    std::map<std::string, std::string> filenames;
    std::map<std::string, std::int64_t> filesizes;
    std::size_t regions = 0;
    for (std::size_t k = 0; k < emit.size(); ++k) {
      const TileAnnotation& a = annotations[emit[k]];
      emitted.push_back(a);
      filenames[a.tile_id] = a.tile_id + ".png";
      filesizes[a.tile_id] = sizes[k];
      regions += a.polygons.size();
    }
    ViaOptions vopts;
    vopts.label_key = opts.label_key;
    vopts.default_label = opts.default_label;
    const std::string via_path = (fs::path(opts.out_dir) / "via_annotations.json").string();
    detail::write_text_file(via_path, emit_via(emitted, filenames, filesizes, vopts));
    io.out << "grid: " << grid.size() << " tiles\n"
           << "tiles written: " << emit.size() << "\n"
           << "regions: " << regions << "\n"
           << "wrote " << via_path << "\n";
    return int(kExitOk);
  });
}

int cmd_split(const SplitOptions& opts, Console io) {
  return guarded(io, [&] {
    const ViaParseResult via = load_via(opts.via_path);
    std::vector<std::string> ids;
    for (const TileAnnotation& t : via.tiles)
      if (opts.include_empty || !t.polygons.empty()) ids.push_back(t.tile_id);
    const Split split = opts.counts ? split_dataset(ids, *opts.counts, opts.seed)
                                    : split_dataset(ids, opts.ratios, opts.seed);
    ojson j;
    j["seed"] = split.seed;
    j["train"] = split.train;
    j["val"] = split.val;
    j["test"] = split.test;
    ensure_parent(opts.out_path);
    detail::write_text_file(opts.out_path, j.dump(1) + "\n");
    io.out << "train " << split.train.size() << ", val " << split.val.size() << ", test " << split.test.size()
           << " (seed " << split.seed << ")\n";
    return int(kExitOk);
  });
}

int cmd_lint(const LintOptions& opts, Console io) {
  return guarded(io, [&] {
    const ViaParseResult via = load_via(opts.via_path);
    const std::vector<LintFinding> findings = lint_annotations(via.tiles, opts.thresholds);
    for (const LintFinding& f : findings) {
      io.out << f.tile_id << " polygon " << f.polygon_index << ": " << f.reason << " (area "
             << detail::format_double(f.area) << ")\n";
    }
    io.out << via.tiles.size() << " tiles, " << via.regions_seen << " regions, " << via.skipped
           << " skipped, " << findings.size() << " findings\n";
    return findings.empty() ? int(kExitOk) : int(kExitFailures);
  });
}

int cmd_gt_to_detections(const GtToDetectionsOptions& opts, Console io) {
  return guarded(io, [&] {
    const ViaParseResult via = load_via(opts.via_path);
    std::vector<TileDetections> out;
    for (const TileAnnotation& t : via.tiles) {
      TileDetections td{t.tile_id, {}};
      for (const LabeledRing& p : t.polygons) {
        td.dets.push_back({Box::from_rect(ring_bounds(p.ring)), 1.0, p.label, close_ring(p.ring)});
      }
      out.push_back(std::move(td));
    }
    sort_by_tile(out);
    ensure_parent(opts.out_path);
    write_detection_file(opts.out_path, out);
    io.out << "wrote " << out.size() << " tile records to " << opts.out_path << "\n";
    return int(kExitOk);
  });
}

std::vector<TileDetections> postprocess(std::vector<TileDetections> tiles, const ModelConfig& cfg) {
  cfg.validate();
  for (TileDetections& t : tiles) {
    t.dets = filter_detections(std::move(t.dets), cfg.detection_min_confidence,
                               std::size_t(cfg.detection_max_instances));
    t.dets = nms(std::move(t.dets), cfg.detection_nms_threshold);
  }
  sort_by_tile(tiles);
  return tiles;
}

int cmd_postprocess(const PostprocessOptions& opts, Console io) {
  return guarded(io, [&] {
    ModelConfig cfg = load_config(opts.config_path);
    if (opts.min_confidence) cfg.detection_min_confidence = *opts.min_confidence;
    if (opts.max_instances) cfg.detection_max_instances = *opts.max_instances;
    if (opts.nms_threshold) cfg.detection_nms_threshold = *opts.nms_threshold;
    std::vector<TileDetections> tiles = load_detections(opts.in_path);
    std::size_t before = 0, after = 0;
    for (const TileDetections& t : tiles) before += t.dets.size();
    tiles = postprocess(std::move(tiles), cfg);
    for (const TileDetections& t : tiles) after += t.dets.size();
    ensure_parent(opts.out_path);
    write_detection_file(opts.out_path, tiles);
    io.out << tiles.size() << " tiles, " << before << " -> " << after << " detections\n";
    return int(kExitOk);
  });
}

EvalSummary evaluate_tiles(const std::vector<TileData>& tiles, double iou, bool mask) {
  EvalSummary out;
  const auto point_mode = [&](const std::string& name, IouMode mode) {
    ModeReport r;
    r.name = name;
    const MatchResult m = match_dataset(tiles, iou, mode);
    r.metrics = precision_recall_f1(m);
    r.tp = m.tp;
    r.fp = m.fp;
    r.fn = m.fn;
    APResult ap = average_precision(tiles, iou, Interpolation::continuous, mode);
    r.ap = ap.ap;
    r.pr_curve = std::move(ap.curve);
    r.ap_101 = integrate_envelope(r.pr_curve, Interpolation::point101);
    if (mode == IouMode::box) out.per_tile = m.per_tile;
    return r;
  };
  const auto coco_mode = [&](const std::string& name, IouMode mode) {
    ModeReport r;
    r.name = name;
    const std::vector<double> thresholds = coco_thresholds();
    for (double t : thresholds) {
      const APResult ap = average_precision(tiles, t, Interpolation::continuous, mode);
      const Metrics m = precision_recall_f1(match_dataset(tiles, t, mode));
      r.ap += ap.ap;
      r.ap_101 += integrate_envelope(ap.curve, Interpolation::point101);
      r.metrics.precision += m.precision;
      r.metrics.recall += m.recall;
      r.metrics.f1 += m.f1;
      r.metrics.ca += m.ca;
      r.ap_per_threshold.emplace_back(t, ap.ap);
    }
    const double n = double(thresholds.size());
    r.ap /= n;
    r.ap_101 /= n;
    r.metrics.precision /= n;
    r.metrics.recall /= n;
    r.metrics.f1 /= n;
    r.metrics.ca /= n;
    return r;
  };
  const std::string suffix = "@" + detail::format_double(iou);
  out.modes.push_back(point_mode("box" + suffix, IouMode::box));
  out.modes.push_back(coco_mode("box_coco", IouMode::box));
  if (mask) {
    out.modes.push_back(point_mode("mask" + suffix, IouMode::mask));
    out.modes.push_back(coco_mode("mask_coco", IouMode::mask));
  }
  return out;
}

int cmd_evaluate(const EvaluateOptions& opts, Console io) {
  return guarded(io, [&] {
    const auto started = std::chrono::steady_clock::now();
    const ModelConfig cfg = load_config(opts.config_path);
    const ViaParseResult via = load_via(opts.gt_path);
    const std::vector<TileDetections> dets = load_detections(opts.dets_path);
    std::map<std::string, TimingRecord> timing;
    if (opts.timing_path) timing = in_file(*opts.timing_path, [&] { return load_timing(*opts.timing_path); });

    std::vector<std::string> warnings;
    if (via.skipped > 0) warnings.push_back(std::to_string(via.skipped) + " ground-truth regions with unsupported shapes skipped");

    std::map<std::string, TileData> by_tile;
    for (const TileAnnotation& t : via.tiles) by_tile[t.tile_id] = {t.tile_id, {}, ground_truth_of(t)};
    std::set<std::string> seen;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      const TileDetections& td = dets[i];
      if (!seen.insert(td.tile_id).second) {
        throw Error(Errc::schema, opts.dets_path + ": record " + std::to_string(i + 1) + ": duplicate tile_id " +
                                      td.tile_id);
      }
      auto it = by_tile.find(td.tile_id);
      if (it == by_tile.end()) {
        if (!opts.union_tiles) {
          throw Error(Errc::schema, opts.dets_path + ": record " + std::to_string(i + 1) + ": tile_id " +
                                        td.tile_id + " is not in the ground truth");
        }
        warnings.push_back("tile " + td.tile_id + " has detections but no ground truth");
        it = by_tile.emplace(td.tile_id, TileData{td.tile_id, {}, {}}).first;
      }
      it->second.dets = td.dets;
    }
    std::vector<TileData> tiles;
    for (auto& [id, t] : by_tile) tiles.push_back(std::move(t));

    if (opts.mask) {
      for (const TileData& t : tiles)
        for (std::size_t k = 0; k < t.dets.size(); ++k)
          if (!t.dets[k].mask) {
            throw Error(Errc::schema, opts.dets_path + ": tile " + t.tile_id + " detection " + std::to_string(k) +
                                          " has no mask; mask evaluation needs masks");
          }
    }

    EvalSummary summary = evaluate_tiles(tiles, opts.iou, opts.mask);
    warnings.insert(warnings.begin(), summary.warnings.begin(), summary.warnings.end());

    ojson failures = ojson::array();
    double time_sum = 0, time_max = 0;
    for (const auto& [id, r] : timing) {
      time_sum += r.seconds;
      time_max = std::max(time_max, r.seconds);
      if (r.failed) failures.push_back({{"tile_id", id}, {"error", r.error}});
    }

    ojson head;
    head["record"] = "summary";
    head["config"] = config_to_json(cfg);
    head["inputs"] = {{"ground_truth", opts.gt_path},
                      {"detections", opts.dets_path},
                      {"timing", opts.timing_path ? ojson(*opts.timing_path) : ojson(nullptr)}};
    head["iou"] = opts.iou;
    head["union_tiles"] = opts.union_tiles;
    head["tiles"] = tiles.size();
    ojson modes = ojson::object();
    for (const ModeReport& m : summary.modes) modes[m.name] = mode_to_json(m, is_averaged_mode(m.name));
    head["modes"] = std::move(modes);
    if (timing.empty()) {
      head["timing"] = nullptr;
    } else {
      head["timing"] = {{"tiles", timing.size()},
                        {"mean_seconds_per_tile", time_sum / double(timing.size())},
                        {"max_seconds_per_tile", time_max}};
    }
    head["failures"] = failures;
    head["warnings"] = warnings;

    std::string report = head.dump() + "\n";
    for (const TileData& t : tiles) {
      ojson rec;
      rec["record"] = "tile";
      rec["tile_id"] = t.tile_id;
      const auto fn = via.filenames.find(t.tile_id);
      rec["filename"] = fn != via.filenames.end() ? fn->second : t.tile_id + ".png";
      const TileCounts c = summary.per_tile.count(t.tile_id) ? summary.per_tile.at(t.tile_id) : TileCounts{};
      rec["tp"] = c.tp;
      rec["fp"] = c.fp;
      rec["fn"] = c.fn;
      const auto tr = timing.find(t.tile_id);
      rec["seconds"] = tr != timing.end() ? ojson(tr->second.seconds) : ojson(nullptr);
      rec["failed"] = tr != timing.end() && tr->second.failed;
      ojson gts = ojson::array();
      for (const GroundTruth& g : t.gts) gts.push_back({{"label", g.label}, {"ring", ring_to_flat(g.mask.value_or(Ring{}))}});
      rec["ground_truth"] = std::move(gts);
      ojson dj = ojson::array();
      for (const Detection& d : t.dets) dj.push_back(ojson::parse(detection_to_json(d).dump()));
      rec["detections"] = std::move(dj);
      report += rec.dump() + "\n";
    }
    const std::string report_path = opts.out_prefix + ".jsonl";
    const std::string csv_path = opts.out_prefix + "_pr.csv";
    ensure_parent(report_path);
    detail::write_text_file(report_path, report);
    detail::write_text_file(csv_path, pr_curve_csv(summary.modes.front().pr_curve));

    for (const ModeReport& m : summary.modes) {
      io.out << m.name << ": precision " << detail::format_double(m.metrics.precision) << ", recall "
             << detail::format_double(m.metrics.recall) << ", f1 " << detail::format_double(m.metrics.f1)
             << ", ca " << detail::format_double(m.metrics.ca) << ", ap " << detail::format_double(m.ap)
             << ", ap_101 " << detail::format_double(m.ap_101) << "\n";
    }
    for (const std::string& w : warnings) io.err << "warning: " << w << "\n";
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    io.out << "evaluated " << tiles.size() << " tiles in " << detail::format_double(elapsed) << " s\n"
           << "wrote " << report_path << " and " << csv_path << "\n";
    if (!failures.empty()) {
      io.err << failures.size() << " tiles failed during inference\n";
      return int(kExitFailures);
    }
    return int(kExitOk);
  });
}

int cmd_report(const ReportOptions& opts, Console io) {
  return guarded(io, [&] {
    const std::string text = detail::read_text_file(opts.report_path);
    std::optional<json> head;
    std::vector<json> tiles;
    std::size_t lineno = 0;
    for (std::string_view line : detail::split_lines(text)) {
      ++lineno;
      if (detail::trim(line).empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw Error(Errc::parse_error, opts.report_path + ": record " + std::to_string(lineno) + ": " + e.what());
      }
      const std::string kind = j.value("record", "");
      if (kind == "summary") {
        head = std::move(j);
      } else if (kind == "tile") {
        tiles.push_back(std::move(j));
      } else {
        throw Error(Errc::schema, opts.report_path + ": record " + std::to_string(lineno) + ": unknown record kind");
      }
    }
    fs::create_directories(opts.out_dir);
    const fs::path out(opts.out_dir);
    std::vector<std::string> warnings;
    std::size_t overlays = 0;

    try {
      for (const json& t : tiles) {
        const std::string id = t.at("tile_id").get<std::string>();
        const fs::path image_path = fs::path(opts.tiles_dir) / t.value("filename", id + ".png");
        if (!fs::exists(image_path)) {
          warnings.push_back("tile image " + image_path.string() + " not found; overlay skipped");
          continue;
        }
        std::vector<GroundTruth> gts;
        for (const json& g : t.at("ground_truth")) {
          gts.push_back(GroundTruth::from_ring(flat_to_ring(g.at("ring")), g.at("label").get<std::string>()));
        }
        std::vector<Detection> dets;
        std::size_t k = 0;
        for (const json& d : t.at("detections")) {
          dets.push_back(detection_from_json(d, opts.report_path + ": tile " + id + " detection " + std::to_string(k++)));
        }
        const Image tile = in_file(image_path.string(), [&] { return read_raster(image_path.string()); });
        write_png((out / ("overlay_" + id + ".png")).string(), render_overlay(tile, gts, dets));
        ++overlays;
      }
    } catch (const json::exception& e) {
      throw Error(Errc::schema, opts.report_path + ": " + e.what());
    }

    std::string summary_text;
    bool pr_written = false;
    if (head) {
      const json& modes = head->at("modes");
      for (const auto& [name, m] : modes.items()) {
        summary_text += name + ": precision " + detail::format_double(m.at("precision").get<double>()) +
                        ", recall " + detail::format_double(m.at("recall").get<double>()) + ", f1 " +
                        detail::format_double(m.at("f1").get<double>()) + ", ca " +
                        detail::format_double(m.at("ca").get<double>()) + ", ap " +
                        detail::format_double(m.at("ap").get<double>()) + "\n";
        if (!pr_written && m.contains("pr_curve") && !m["pr_curve"].empty()) {
          PRCurve curve;
          for (const json& p : m["pr_curve"]) curve.points.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
          detail::write_text_file((out / "pr_curve.svg").string(), pr_curve_svg(curve, "precision-recall " + name));
          detail::write_text_file((out / "pr_curve.csv").string(), pr_curve_csv(curve));
          pr_written = true;
        }
      }
      for (const json& w : head->value("warnings", json::array())) summary_text += "report warning: " + w.get<std::string>() + "\n";
    } else {
      summary_text += "empty report\n";
    }

    if (!opts.loss_logs.empty()) {
      std::vector<LossSeries> series;
      for (const std::string& path : opts.loss_logs) {
        series.push_back(in_file(path, [&] {
          return parse_loss_log(detail::read_text_file(path), fs::path(path).stem().string());
        }));
      }
      detail::write_text_file((out / "loss_curve.svg").string(), loss_curve_svg(series));
      detail::write_text_file((out / "loss_curve.csv").string(), loss_curve_csv(series));
      if (series.size() >= 2) summary_text += compare_batch_sizes(series).to_text();
    }

    summary_text += "tiles: " + std::to_string(tiles.size()) + ", overlays: " + std::to_string(overlays) + "\n";
    for (const std::string& w : warnings) {
      summary_text += "warning: " + w + "\n";
      io.err << "warning: " << w << "\n";
    }
    detail::write_text_file((out / "summary.txt").string(), summary_text);
    io.out << summary_text;
    return int(kExitOk);
  });
}

int cmd_infer(const InferOptions& opts, Console io) {
  return guarded(io, [&] {
    const ModelConfig cfg = load_config(opts.config_path);
    const double min_conf = opts.min_confidence.value_or(cfg.detection_min_confidence);
    const int max_inst = opts.max_instances.value_or(cfg.detection_max_instances);

    if (!fs::is_directory(opts.tiles_dir)) throw Error(Errc::io, opts.tiles_dir + ": not a directory");
    std::vector<fs::path> images;
    for (const fs::directory_entry& e : fs::directory_iterator(opts.tiles_dir))
      if (e.is_regular_file() && is_tile_image(e.path())) images.push_back(e.path());
    std::sort(images.begin(), images.end());

    struct Outcome {
      bool done = false;
      bool failed = false;
      double seconds = 0;
      std::string error;
      std::vector<Detection> dets;
    };
    std::vector<Outcome> outcomes(images.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> connection_lost{false};
    std::mutex err_mu;
    std::string connection_error;

    const auto worker = [&] {
      std::unique_ptr<AdapterTransport> transport;
      try {
        transport = connect_adapter(opts.endpoint);
      } catch (const Error& e) {
        std::lock_guard lock(err_mu);
        connection_lost = true;
        connection_error = e.what();
        return;
      }
      for (std::size_t i = next++; i < images.size() && !connection_lost; i = next++) {
        Outcome& o = outcomes[i];
        const std::string tile_id = images[i].stem().string();
        const auto t0 = std::chrono::steady_clock::now();
        try {
          InferRequest req;
          req.tile_id = tile_id;
          req.min_confidence = min_conf;
          req.max_instances = max_inst;
          const std::string ext = lower(images[i].extension().string());
          req.png = ext == ".png" ? detail::read_binary_file(images[i].string())
                                  : encode_png(read_raster(images[i].string()));
          const std::string reply = transport->exchange(encode_request(req));
          o.dets = decode_response(reply, tile_id);
        } catch (const Error& e) {
          if (e.code() == Errc::connection) {
            std::lock_guard lock(err_mu);
            if (!connection_lost) connection_error = e.what();
            connection_lost = true;
            return;
          }
          o.failed = true;
          o.error = e.what();
        }
        o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.done = true;
      }
    };

    const std::size_t n_workers = std::min(std::max<std::size_t>(opts.concurrency, 1), images.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    std::vector<TileDetections> results;
    std::string timing;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
      const Outcome& o = outcomes[i];
      if (!o.done) continue;
      const std::string tile_id = images[i].stem().string();
      ojson rec;
      rec["tile_id"] = tile_id;
      rec["seconds"] = o.seconds;
      rec["status"] = o.failed ? "failed" : "ok";
      if (o.failed) {
        rec["error"] = o.error;
        io.err << "tile " << tile_id << " failed: " << o.error << "\n";
        ++failed;
      } else {
        results.push_back({tile_id, o.dets});
      }
      timing += rec.dump() + "\n";
    }
    sort_by_tile(results);
    ensure_parent(opts.out_path);
    write_detection_file(opts.out_path, results);
    const std::string timing_path = opts.timing_path.value_or(opts.out_path + ".timing.jsonl");
    detail::write_text_file(timing_path, timing);

    if (connection_lost) {
      io.err << "error: adapter connection failed: " << connection_error << "\n";
      return int(kExitInput);
    }
    io.out << images.size() << " tiles, " << results.size() << " ok, " << failed << " failed\n"
           << "wrote " << opts.out_path << " and " << timing_path << "\n";
    return failed > 0 ? int(kExitFailures) : int(kExitOk);
  });
}

}  // namespace treedet
