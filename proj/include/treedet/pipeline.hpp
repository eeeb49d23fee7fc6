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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "treedet/annot.hpp"
#include "treedet/detfile.hpp"
#include "treedet/evalkit.hpp"
#include "treedet/trainlog.hpp"

namespace treedet {

/// Process exit codes shared by every command.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailures = 1,  // ran to completion, but some tiles were recorded as failed
  kExitInput = 2,     // input, parse or connection error
};

struct Console {
  std::ostream& out;
  std::ostream& err;
};

struct IngestOptions {
  std::string vector_path;
  std::string world_path;
  std::string out_path;
  std::optional<std::string> tag_key;
  std::optional<std::string> tag_value;
  bool exclude = false;
};

struct TileOptions {
  std::string raster_path;
  std::string features_path;
  std::string out_dir;
  int tile_size = 1000;
  int overlap = 0;
  double min_area_frac = 0.25;
  double point_box_side = 40.0;
  std::string label_key = "label";
  std::string default_label = "coconut";
  bool keep_empty = false;
  std::size_t workers = 0;
};

struct SplitOptions {
  std::string via_path;
  std::string out_path;
  std::optional<SplitCounts> counts;
  SplitRatios ratios{0.7, 0.15, 0.15};
  std::uint64_t seed = 0;
  /// Also include tiles without regions.
  bool include_empty = true;
};

struct LintOptions {
  std::string via_path;
  LintThresholds thresholds;
};

struct GtToDetectionsOptions {
  std::string via_path;
  std::string out_path;
};

struct PostprocessOptions {
  std::string in_path;
  std::string out_path;
  std::optional<std::string> config_path;
  std::optional<double> min_confidence;
  std::optional<int> max_instances;
  std::optional<double> nms_threshold;
};

struct EvaluateOptions {
  std::string gt_path;
  std::string dets_path;
  /// Writes <prefix>.jsonl and <prefix>_pr.csv.
  std::string out_prefix;
  std::optional<std::string> config_path;
  std::optional<std::string> timing_path;
  /// Accept detections for tiles missing from the ground truth (as FPs).
  bool union_tiles = false;
  bool mask = false;
  double iou = 0.5;
};

struct ReportOptions {
  std::string report_path;
  std::string tiles_dir;
  std::string out_dir;
  std::vector<std::string> loss_logs;
};

struct InferOptions {
  std::string tiles_dir;
  std::string endpoint;
  std::string out_path;
  /// Defaults to <out_path>.timing.jsonl.
  std::optional<std::string> timing_path;
  std::optional<std::string> config_path;
  std::optional<double> min_confidence;
  std::optional<int> max_instances;
  std::size_t concurrency = 1;
};

int cmd_ingest(const IngestOptions& opts, Console io);
int cmd_tile(const TileOptions& opts, Console io);
int cmd_split(const SplitOptions& opts, Console io);
int cmd_lint(const LintOptions& opts, Console io);
int cmd_gt_to_detections(const GtToDetectionsOptions& opts, Console io);
int cmd_postprocess(const PostprocessOptions& opts, Console io);
int cmd_evaluate(const EvaluateOptions& opts, Console io);
int cmd_report(const ReportOptions& opts, Console io);
int cmd_infer(const InferOptions& opts, Console io);

/// Filter then NMS on every tile, output in tile_id order.
std::vector<TileDetections> postprocess(std::vector<TileDetections> tiles, const ModelConfig& cfg);

struct ModeReport {
  std::string name;
  Metrics metrics;
  std::size_t tp = 0, fp = 0, fn = 0;
  double ap = 0, ap_101 = 0;
  PRCurve pr_curve;
  /// Only for averaged modes: threshold -> AP.
  std::vector<std::pair<double, double>> ap_per_threshold;
};

struct EvalSummary {
  std::vector<ModeReport> modes;
  std::map<std::string, TileCounts> per_tile;
  std::vector<std::string> warnings;
};

/// Metrics for box@<iou> and box coco, plus the mask variants when asked.
/// `tiles` must already be in tile_id order.
EvalSummary evaluate_tiles(const std::vector<TileData>& tiles, double iou, bool mask);

}  // namespace treedet
