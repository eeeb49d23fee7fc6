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

#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "treedet/detpost.hpp"

namespace treedet {

/// One line of a detection file: all detections for one tile.
struct TileDetections {
  std::string tile_id;
  std::vector<Detection> dets;
};

/// {"bbox":[x1,y1,x2,y2],"score":s,"label":l,"mask":[x,y,...]|null}
nlohmann::json detection_to_json(const Detection& d);
/// Strict schema check; `where` prefixes error messages.
Detection detection_from_json(const nlohmann::json& j, const std::string& where);

std::string emit_detection_file(const std::vector<TileDetections>& tiles);
/// Line-delimited JSON records {"tile_id":..., "detections":[...]}. Blank
/// lines are ignored; violations throw Errc::schema naming the record.
std::vector<TileDetections> parse_detection_file(std::string_view text);

std::vector<TileDetections> read_detection_file(const std::string& path);
void write_detection_file(const std::string& path, const std::vector<TileDetections>& tiles);

}  // namespace treedet
