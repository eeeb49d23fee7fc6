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

#include <cstdint>
#include <string>
#include <vector>

#include "treedet/geometry.hpp"
#include "treedet/vector_io.hpp"

namespace treedet {

struct TileIndex {
  std::string tile_id;  // "r{row:02}_c{col:02}"
  int grid_row = 0;
  int grid_col = 0;
  int x = 0;  // origin col, pixels
  int y = 0;  // origin row, pixels
  int width = 0;
  int height = 0;

  Rect bounds() const { return {double(x), double(y), double(x + width), double(y + height)}; }
};

std::string tile_name(int grid_row, int grid_col);

/// Row-major grid over a raster. With overlap 0 (the default) the stride is
/// the tile size and tiles partition the raster; edge tiles are truncated.
std::vector<TileIndex> tile_grid(int raster_w, int raster_h, int tile, int overlap = 0);

/// Sutherland-Hodgman clip of a ring against an axis-aligned rectangle.
/// Returns zero or one closed ring; concave inputs that split into several
/// pieces come back as one ring joined along the rectangle boundary, which
/// keeps the area exact.
std::vector<Ring> clip_polygon(const Ring& ring, const Rect& rect);

struct LabeledRing {
  Ring ring;
  std::string label;
};

struct TileAnnotation {
  std::string tile_id;
  std::vector<LabeledRing> polygons;
};

struct AssignOptions {
  double min_area_frac = 0.25;
  /// Side of the square a point feature becomes before clipping.
  double point_box_side = 40.0;
  /// Tag whose value becomes the annotation label.
  std::string label_key = "label";
  std::string default_label = "coconut";
};

/// Clips every feature into the tiles it overlaps and translates the
/// pieces to tile-local coordinates. Output has one entry per grid tile,
/// in grid order. Holes are not carried into annotations.
std::vector<TileAnnotation> assign_annotations(const FeatureSet& pixel_features,
                                               const std::vector<TileIndex>& grid,
                                               const AssignOptions& opts = {});

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::uint64_t seed = 0;

  friend bool operator==(const Split&, const Split&) = default;
};

struct SplitCounts {
  std::size_t train = 0, val = 0, test = 0;
};

struct SplitRatios {
  double train = 0, val = 0, test = 0;
};

/// Largest-remainder apportionment of n items over the three ratios.
SplitCounts apportion(std::size_t n, const SplitRatios& ratios);

Split split_dataset(std::vector<std::string> tile_ids, const SplitCounts& counts, std::uint64_t seed);
Split split_dataset(std::vector<std::string> tile_ids, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace treedet
