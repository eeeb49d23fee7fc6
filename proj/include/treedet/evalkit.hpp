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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "treedet/detpost.hpp"
#include "treedet/tiler.hpp"

namespace treedet {

enum class IouMode { box, mask };
enum class Interpolation { continuous, point101 };
enum class MapMode { at50, coco };

struct GroundTruth {
  Box box;
  std::string label;
  std::optional<Ring> mask;

  /// Box is the ring's bounds; the ring doubles as the mask.
  static GroundTruth from_ring(const Ring& ring, std::string label);
};

std::vector<GroundTruth> ground_truth_of(const TileAnnotation& tile);

struct MatchPair {
  std::string tile_id;
  std::size_t det = 0;  // index into the tile's detection list as given
  std::size_t gt = 0;   // index into the tile's ground-truth list as given
  double iou = 0.0;
  bool labels_agree = false;
};

struct TileCounts {
  std::size_t tp = 0, fp = 0, fn = 0;
  friend bool operator==(const TileCounts&, const TileCounts&) = default;
};

struct MatchResult {
  std::size_t tp = 0, fp = 0, fn = 0;
  std::vector<MatchPair> pairs;
  std::map<std::string, TileCounts> per_tile;

  void merge(const MatchResult& other);
};

/// Greedy matching within one tile. Detections are visited in rank order
/// (see ranks_before); each claims the unmatched ground truth with the
/// highest IoU >= `iou_thresh`, lowest index on ties. Labels play no part
/// in matching. Mask mode throws Errc::invalid_argument when either side
/// lacks a mask.
MatchResult match_detections(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                             double iou_thresh, IouMode mode = IouMode::box,
                             const std::string& tile_id = "");

struct TileData {
  std::string tile_id;
  std::vector<Detection> dets;
  std::vector<GroundTruth> gts;
};

MatchResult match_dataset(const std::vector<TileData>& tiles, double iou_thresh,
                          IouMode mode = IouMode::box);

struct Metrics {
  double precision = 0, recall = 0, f1 = 0, ca = 0;
};

double f1_score(double precision, double recall);

/// Fraction of matched pairs whose labels agree; 0 without pairs.
double classification_accuracy(const MatchResult& m);
/// Same, recomputed from the inputs of a single-tile match.
double classification_accuracy(const MatchResult& m, const std::vector<Detection>& dets,
                               const std::vector<GroundTruth>& gts);

Metrics precision_recall_f1(const MatchResult& m);

struct PRPoint {
  double recall = 0, precision = 0, threshold = 0;
};

struct PRCurve {
  std::vector<PRPoint> points;
};

struct APResult {
  double ap = 0.0;
  PRCurve curve;
};

/// Dataset-level AP. Detections from all tiles are ranked globally by
/// (score desc, tile_id, box); TP/FP status comes from per-tile greedy
/// matching. One PR point is emitted per detection.
APResult average_precision(const std::vector<TileData>& tiles, double iou_thresh,
                           Interpolation interp = Interpolation::continuous,
                           IouMode mode = IouMode::box);

/// Area under the precision envelope of an already-built curve.
double integrate_envelope(const PRCurve& curve, Interpolation interp);

/// IoU thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> coco_thresholds();

/// Single-class task, so the class mean is the AP itself. coco averages AP
/// over coco_thresholds().
double mean_average_precision(const std::vector<TileData>& tiles, MapMode mode,
                              Interpolation interp = Interpolation::continuous,
                              IouMode iou_mode = IouMode::box);

}  // namespace treedet
