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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "treedet/tiler.hpp"

namespace treedet {

struct ViaOptions {
  /// Region attribute holding the class label.
  std::string label_key = "label";
  std::string default_label = "coconut";
};

/// VIA region export: one entry per tile keyed "<filename><size>". Vertices
/// are rounded to integers and the closing duplicate is dropped.
std::string emit_via(const std::vector<TileAnnotation>& tiles,
                     const std::map<std::string, std::string>& filenames,
                     const std::map<std::string, std::int64_t>& filesizes,
                     const ViaOptions& opts = {});

struct ViaParseResult {
  std::vector<TileAnnotation> tiles;
  /// tile_id -> image filename as recorded in the document.
  std::map<std::string, std::string> filenames;
  std::size_t regions_seen = 0;
  /// Regions with shapes we do not convert (point, polyline, ellipse, ...).
  std::size_t skipped = 0;
};

/// Accepts a VIA 2.x project (`_via_img_metadata`) or a bare region export.
/// Tile ids are file names without extension. Rect regions become 4-corner
/// rings and circles 16-gons; rings come back closed.
ViaParseResult parse_via(std::string_view text, const ViaOptions& opts = {});

struct LintFinding {
  std::string tile_id;
  std::size_t polygon_index = 0;
  double area = 0.0;
  std::string reason;
};

struct LintThresholds {
  double min_area = 25.0;
  double max_area = 130.0 * 130.0;
};

/// Flags polygons whose area falls outside the anchor range. Never rejects.
std::vector<LintFinding> lint_annotations(const std::vector<TileAnnotation>& tiles,
                                          const LintThresholds& limits = {});

}  // namespace treedet
