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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "treedet/geocore.hpp"
#include "treedet/geometry.hpp"

namespace treedet {

using Tag = std::pair<std::string, std::string>;

struct PointGeometry {
  Vec2 at;
};

/// Ring list. Outer rings have negative signed area (clockwise in a y-up
/// frame) and holes positive; parsers normalize to this on input.
struct PolygonGeometry {
  std::vector<Ring> rings;
};

using Geometry = std::variant<PointGeometry, PolygonGeometry>;

struct Feature {
  Geometry geometry;
  std::vector<Tag> tags;

  bool is_point() const { return std::holds_alternative<PointGeometry>(geometry); }
  bool is_polygon() const { return std::holds_alternative<PolygonGeometry>(geometry); }
  std::optional<std::string> tag(std::string_view key) const;
  bool has_tag(std::string_view key, std::string_view value) const;
};

struct BBox {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  bool empty = true;

  void expand(Vec2 v);
  bool contains(Vec2 v) const;
};

enum class CoordSpace { geo, pixel };

struct FeatureSet {
  std::vector<Feature> features;
  BBox bbox;
  CoordSpace space = CoordSpace::geo;
  /// Records the parser saw but did not ingest (unsupported geometry, nulls).
  std::size_t skipped = 0;

  bool empty() const { return features.empty(); }
  std::size_t size() const { return features.size(); }
  void recompute_bbox();
};

/// Area of a polygon under the outer/hole winding convention.
double polygon_area(const PolygonGeometry& poly);

enum class RingRoles {
  /// ESRI: clockwise rings are outer, counter-clockwise rings are holes. A
  /// record with no clockwise ring is read as all-outer.
  by_winding,
  /// RFC 7946: ring 0 is the exterior, the rest are holes.
  first_is_exterior,
};

/// Closes every ring and orients it to the outer-negative convention.
/// Throws Errc::parse_error on a ring with fewer than 4 vertices.
PolygonGeometry normalize_polygon(std::vector<Ring> rings, RingRoles roles);

/// Parses an ESRI .shp main file, optionally joined with its .dbf attribute
/// table. Only Point (1) and Polygon (5) shape types are accepted.
FeatureSet parse_shapefile(std::span<const std::uint8_t> shp,
                           std::optional<std::span<const std::uint8_t>> dbf = std::nullopt);

/// dBASE III table as (field name, value) rows.
std::vector<std::vector<Tag>> parse_dbf(std::span<const std::uint8_t> dbf);

/// Parses a GeoJSON FeatureCollection. Point and Polygon features are kept;
/// other geometry types are counted in FeatureSet::skipped.
FeatureSet parse_geojson(std::string_view text);

/// Inverse of parse_geojson for the supported subset. Pixel-space sets carry
/// a "coordinate_space":"pixel" member so readers can tell them apart.
std::string emit_geojson(const FeatureSet& fs);

FeatureSet filter_by_tag(const FeatureSet& fs, std::string_view key, std::string_view value);
/// Complement of filter_by_tag.
FeatureSet exclude_by_tag(const FeatureSet& fs, std::string_view key, std::string_view value);

/// Maps every vertex through geo_to_pixel. Rings are reversed when the
/// transform flips handedness so the winding convention still holds.
FeatureSet project_features(const FeatureSet& fs, const GeoTransform& gt);

/// Reads `path` as GeoJSON (.json/.geojson) or shapefile (.shp, with a
/// sibling .dbf when present).
FeatureSet read_vector_file(const std::string& path);

}  // namespace treedet
