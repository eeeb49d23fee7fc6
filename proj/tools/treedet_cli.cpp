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

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "treedet/error.hpp"
#include "treedet/pipeline.hpp"
#include "treedet/trainlog.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw treedet::Error(treedet::Errc::io, path + ": cannot open");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
  using namespace treedet;
  CLI::App app{"Tree-crown detection pipeline: ingest, tile, evaluate and report."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "treedet 0.1.0");
  Console io{std::cout, std::cerr};
  int rc = kExitOk;

  IngestOptions ingest;
  std::string tag;
  auto* c_ingest = app.add_subcommand("ingest", "Project a shapefile or GeoJSON into pixel coordinates");
  c_ingest->add_option("vector", ingest.vector_path, "Input .shp or .geojson")->required();
  c_ingest->add_option("--world", ingest.world_path, "World file for the raster")->required();
  c_ingest->add_option("-o,--out", ingest.out_path, "Output pixel-space GeoJSON")->required();
  c_ingest->add_option("--tag", tag, "Keep features with KEY=VALUE");
  c_ingest->add_flag("--exclude", ingest.exclude, "Drop matching features instead of keeping them");
  c_ingest->callback([&] {
    if (!tag.empty()) {
      const auto eq = tag.find('=');
      ingest.tag_key = tag.substr(0, eq);
      ingest.tag_value = eq == std::string::npos ? "" : tag.substr(eq + 1);
    }
    rc = cmd_ingest(ingest, io);
  });

  TileOptions tile;
  auto* c_tile = app.add_subcommand("tile", "Cut a raster into tiles and write VIA annotations");
  c_tile->add_option("raster", tile.raster_path, "PNG or baseline TIFF raster")->required();
  c_tile->add_option("features", tile.features_path, "Pixel-space GeoJSON from ingest")->required();
  c_tile->add_option("-o,--out-dir", tile.out_dir, "Output directory")->required();
  c_tile->add_option("--tile-size", tile.tile_size, "Tile edge in pixels")->capture_default_str();
  c_tile->add_option("--overlap", tile.overlap, "Overlap between neighbouring tiles")->capture_default_str();
  c_tile->add_option("--min-area-frac", tile.min_area_frac, "Drop clipped pieces below this fraction")
      ->capture_default_str();
  c_tile->add_option("--point-box", tile.point_box_side, "Square side for point features")->capture_default_str();
  c_tile->add_option("--label-key", tile.label_key, "Feature tag holding the class label")->capture_default_str();
  c_tile->add_option("--default-label", tile.default_label)->capture_default_str();
  c_tile->add_flag("--keep-empty", tile.keep_empty, "Also write tiles without annotations");
  c_tile->add_option("-j,--workers", tile.workers, "Worker threads (0 = CPU count)")->capture_default_str();
  c_tile->callback([&] { rc = cmd_tile(tile, io); });

  SplitOptions split;
  std::vector<std::size_t> counts;
  std::vector<double> ratios;
  auto* c_split = app.add_subcommand("split", "Seeded train/val/test split of VIA tiles");
  c_split->add_option("via", split.via_path, "VIA annotations")->required();
  c_split->add_option("-o,--out", split.out_path, "Output split JSON")->required();
  auto* o_counts = c_split->add_option("--counts", counts, "Exact sizes TRAIN VAL TEST")->expected(3);
  c_split->add_option("--ratios", ratios, "Ratios TRAIN VAL TEST")->expected(3)->excludes(o_counts);
  c_split->add_option("--seed", split.seed)->capture_default_str();
  c_split->callback([&] {
    if (!counts.empty()) split.counts = SplitCounts{counts[0], counts[1], counts[2]};
    if (!ratios.empty()) split.ratios = {ratios[0], ratios[1], ratios[2]};
    rc = cmd_split(split, io);
  });

  auto* c_annot = app.add_subcommand("annot", "Annotation utilities");
  c_annot->require_subcommand(1);
  LintOptions lint;
  auto* c_lint = c_annot->add_subcommand("lint", "Flag implausibly small or large polygons");
  c_lint->add_option("via", lint.via_path)->required();
  c_lint->add_option("--min-area", lint.thresholds.min_area)->capture_default_str();
  c_lint->add_option("--max-area", lint.thresholds.max_area)->capture_default_str();
  c_lint->callback([&] { rc = cmd_lint(lint, io); });
  GtToDetectionsOptions to_dets;
  auto* c_to_dets = c_annot->add_subcommand("to-detections", "Write ground truth as score-1 detections");
  c_to_dets->add_option("via", to_dets.via_path)->required();
  c_to_dets->add_option("-o,--out", to_dets.out_path)->required();
  c_to_dets->callback([&] { rc = cmd_gt_to_detections(to_dets, io); });

  PostprocessOptions post;
  auto* c_post = app.add_subcommand("postprocess", "Confidence filter, instance cap and NMS per tile");
  c_post->add_option("detections", post.in_path, "Raw detection file")->required();
  c_post->add_option("-o,--out", post.out_path)->required();
  c_post->add_option("--config", post.config_path, "Model config file");
  c_post->add_option("--min-confidence", post.min_confidence);
  c_post->add_option("--max-instances", post.max_instances);
  c_post->add_option("--nms", post.nms_threshold, "NMS IoU threshold");
  c_post->callback([&] { rc = cmd_postprocess(post, io); });

  EvaluateOptions eval;
  auto* c_eval = app.add_subcommand("evaluate", "Match detections against ground truth and write a report");
  c_eval->add_option("ground_truth", eval.gt_path, "VIA annotations")->required();
  c_eval->add_option("detections", eval.dets_path, "Detection file")->required();
  c_eval->add_option("-o,--out-prefix", eval.out_prefix, "Writes PREFIX.jsonl and PREFIX_pr.csv")->required();
  c_eval->add_option("--config", eval.config_path);
  c_eval->add_option("--timing", eval.timing_path, "Timing sidecar from infer");
  c_eval->add_option("--iou", eval.iou)->capture_default_str();
  c_eval->add_flag("--union", eval.union_tiles, "Tolerate detections on tiles without ground truth");
  c_eval->add_flag("--mask", eval.mask, "Also evaluate mask IoU");
  c_eval->callback([&] { rc = cmd_evaluate(eval, io); });

  ReportOptions report;
  auto* c_report = app.add_subcommand("report", "Overlays, curves and a text summary");
  c_report->add_option("report", report.report_path, "Evaluation report (.jsonl)")->required();
  c_report->add_option("--tiles", report.tiles_dir, "Directory of tile images")->required();
  c_report->add_option("-o,--out-dir", report.out_dir)->required();
  c_report->add_option("--loss", report.loss_logs, "Loss CSV files to plot");
  c_report->callback([&] { rc = cmd_report(report, io); });

  InferOptions infer;
  auto* c_infer = app.add_subcommand("infer", "Send tiles to an inference adapter");
  c_infer->add_option("tiles", infer.tiles_dir, "Directory of tile images")->required();
  c_infer->add_option("--adapter", infer.endpoint, "stdio:<command> or http://host:port[/path]")->required();
  c_infer->add_option("-o,--out", infer.out_path, "Raw detection file")->required();
  c_infer->add_option("--timing", infer.timing_path, "Timing sidecar (default OUT.timing.jsonl)");
  c_infer->add_option("--config", infer.config_path);
  c_infer->add_option("--min-confidence", infer.min_confidence);
  c_infer->add_option("--max-instances", infer.max_instances);
  c_infer->add_option("-n,--concurrency", infer.concurrency, "Concurrent requests")->capture_default_str();
  c_infer->callback([&] { rc = cmd_infer(infer, io); });

  auto* c_config = app.add_subcommand("config", "Model configuration");
  c_config->require_subcommand(1);
  std::string config_path;
  auto* c_cfg_show = c_config->add_subcommand("show", "Print a config (defaults without a file)");
  c_cfg_show->add_option("file", config_path);
  c_cfg_show->callback([&] {
    try {
      const ModelConfig cfg = config_path.empty() ? default_config() : parse_config_text(read_file(config_path));
      std::cout << to_config_text(cfg);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      rc = kExitInput;
    }
  });
  auto* c_cfg_check = c_config->add_subcommand("check", "Validate a config file");
  c_cfg_check->add_option("file", config_path)->required();
  c_cfg_check->callback([&] {
    try {
      parse_config_text(read_file(config_path));
      std::cout << config_path << ": ok\n";
    } catch (const std::exception& e) {
      std::cerr << "error: " << config_path << ": " << e.what() << "\n";
      rc = kExitInput;
    }
  });

  auto* c_log = app.add_subcommand("trainlog", "Training loss logs");
  c_log->require_subcommand(1);
  std::vector<std::string> logs;
  auto* c_compare = c_log->add_subcommand("compare", "Rank runs by minimum validation loss");
  c_compare->add_option("logs", logs)->required();
  c_compare->callback([&] {
    try {
      std::vector<LossSeries> series;
      for (const std::string& p : logs) {
        std::string label = p.substr(p.find_last_of('/') + 1);
        label = label.substr(0, label.find_last_of('.'));
        series.push_back(parse_loss_log(read_file(p), label));
      }
      std::cout << compare_batch_sizes(series).to_text();
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      rc = kExitInput;
    }
  });
  std::string best_log;
  std::string criterion = "val_loss";
  auto* c_best = c_log->add_subcommand("best", "Pick the best epoch");
  c_best->add_option("log", best_log)->required();
  c_best->add_option("--by", criterion, "val_loss or map")
      ->check(CLI::IsMember({"val_loss", "map"}))
      ->capture_default_str();
  c_best->callback([&] {
    try {
      const LossSeries s = parse_loss_log(read_file(best_log));
      const BestEpoch b = select_best_epoch(
          s, criterion == "map" ? EpochCriterion::max_map : EpochCriterion::min_val_loss);
      std::cout << "epoch " << b.epoch << " (" << criterion << " " << b.value << ")\n";
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      rc = kExitInput;
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }
  return rc;
}
