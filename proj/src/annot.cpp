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

#include "treedet/annot.hpp"

#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <numbers>

#include "treedet/error.hpp"

namespace treedet {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kCircleSides = 16;

std::string tile_id_from_filename(const std::string& filename) {
  return std::filesystem::path(filename).stem().string();
}

std::string region_label(const ordered_json& region, const ViaOptions& opts) {
  if (!region.contains("region_attributes")) return opts.default_label;
  const ordered_json& attrs = region["region_attributes"];
  if (!attrs.is_object() || !attrs.contains(opts.label_key)) return opts.default_label;
  const ordered_json& v = attrs[opts.label_key];
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    return s.empty() ? opts.default_label : s;
  }
  // Checkbox-style attributes store {"option": true}.
  if (v.is_object()) {
    for (const auto& [k, on] : v.items())
      if (on.is_boolean() && on.get<bool>()) return k;
  }
  if (v.is_number()) return v.dump();
  return opts.default_label;
}

std::vector<double> number_array(const ordered_json& shape, const char* key) {
  if (!shape.contains(key) || !shape[key].is_array()) {
    throw Error(Errc::parse_error, std::string("region lacks array '") + key + "'");
  }
  std::vector<double> out;
  for (const ordered_json& v : shape[key]) {
    if (!v.is_number()) throw Error(Errc::parse_error, std::string("non-numeric entry in '") + key + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

double number(const ordered_json& shape, const char* key) {
  if (!shape.contains(key) || !shape[key].is_number()) {
    throw Error(Errc::parse_error, std::string("region lacks number '") + key + "'");
  }
  return shape[key].get<double>();
}

// Returns false for shapes that are not converted.
bool shape_to_ring(const ordered_json& shape, Ring& ring) {
  const std::string name = shape.value("name", "");
  if (name == "polygon") {
    const auto xs = number_array(shape, "all_points_x");
    const auto ys = number_array(shape, "all_points_y");
    if (xs.size() != ys.size()) {
      throw Error(Errc::parse_error, "polygon has " + std::to_string(xs.size()) + " x and " +
                                         std::to_string(ys.size()) + " y coordinates");
    }
    if (xs.size() < 3) throw Error(Errc::parse_error, "polygon needs at least 3 vertices");
    for (std::size_t i = 0; i < xs.size(); ++i) ring.push_back({xs[i], ys[i]});
    ring = close_ring(std::move(ring));
    return true;
  }
  if (name == "rect") {
    const double x = number(shape, "x"), y = number(shape, "y");
    const double w = number(shape, "width"), h = number(shape, "height");
    ring = {{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}, {x, y}};
    return true;
  }
  if (name == "circle") {
    const double cx = number(shape, "cx"), cy = number(shape, "cy"), r = number(shape, "r");
    for (int k = 0; k < kCircleSides; ++k) {
      const double a = 2.0 * std::numbers::pi * k / kCircleSides;
      ring.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
    }
    ring = close_ring(std::move(ring));
    return true;
  }
  return false;
}

}  // namespace

std::string emit_via(const std::vector<TileAnnotation>& tiles,
                     const std::map<std::string, std::string>& filenames,
                     const std::map<std::string, std::int64_t>& filesizes, const ViaOptions& opts) {
  ordered_json doc = ordered_json::object();
  for (const TileAnnotation& t : tiles) {
    auto fn = filenames.find(t.tile_id);
    if (fn == filenames.end()) {
      throw Error(Errc::invalid_argument, "no filename for tile '" + t.tile_id + "'");
    }
    auto fsz = filesizes.find(t.tile_id);
    const std::int64_t size = fsz == filesizes.end() ? -1 : fsz->second;
    ordered_json regions = ordered_json::array();
    for (const LabeledRing& p : t.polygons) {
      ordered_json xs = ordered_json::array(), ys = ordered_json::array();
      const std::size_t n = is_closed(p.ring) ? p.ring.size() - 1 : p.ring.size();
      for (std::size_t i = 0; i < n; ++i) {
        xs.push_back(std::lround(p.ring[i].x));
        ys.push_back(std::lround(p.ring[i].y));
      }
      ordered_json region;
      region["shape_attributes"] = {{"name", "polygon"}, {"all_points_x", xs}, {"all_points_y", ys}};
      region["region_attributes"] = {{opts.label_key, p.label}};
      regions.push_back(std::move(region));
    }
    ordered_json entry;
    entry["filename"] = fn->second;
    entry["size"] = size;
    entry["regions"] = std::move(regions);
    entry["file_attributes"] = ordered_json::object();
    doc[fn->second + std::to_string(size)] = std::move(entry);
  }
  return doc.dump(1) + "\n";
}

ViaParseResult parse_via(std::string_view text, const ViaOptions& opts) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::parse_error, std::string("invalid VIA JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(Errc::parse_error, "VIA document must be a JSON object");
  const ordered_json& entries = doc.contains("_via_img_metadata") ? doc["_via_img_metadata"] : doc;
  if (!entries.is_object()) throw Error(Errc::parse_error, "VIA image metadata must be an object");

  ViaParseResult result;
  std::map<std::string, std::size_t> slot;
  for (const auto& [key, entry] : entries.items()) {
    if (!entry.is_object() || !entry.contains("filename") || !entry["filename"].is_string()) {
      throw Error(Errc::parse_error, "VIA entry '" + key + "' has no filename");
    }
    const std::string filename = entry["filename"].get<std::string>();
    const std::string tile_id = tile_id_from_filename(filename);
    auto [it, fresh] = slot.emplace(tile_id, result.tiles.size());
    if (fresh) {
      result.tiles.push_back({tile_id, {}});
      result.filenames[tile_id] = filename;
    }
    TileAnnotation& tile = result.tiles[it->second];

    if (!entry.contains("regions")) continue;
    const ordered_json& regions = entry["regions"];
    std::vector<const ordered_json*> list;
    if (regions.is_array()) {
      for (const ordered_json& r : regions) list.push_back(&r);
    } else if (regions.is_object()) {  // VIA 1.x keyed regions
      for (const auto& [rk, r] : regions.items()) list.push_back(&r);
    } else {
      throw Error(Errc::parse_error, "VIA entry '" + key + "' has malformed regions");
    }
    std::size_t index = 0;
    for (const ordered_json* region : list) {
      ++result.regions_seen;
      try {
        if (!region->is_object() || !region->contains("shape_attributes")) {
          throw Error(Errc::parse_error, "region lacks shape_attributes");
        }
        Ring ring;
        if (!shape_to_ring((*region)["shape_attributes"], ring)) {
          ++result.skipped;
        } else {
          tile.polygons.push_back({std::move(ring), region_label(*region, opts)});
        }
      } catch (const Error& e) {
        throw Error(e.code(), "VIA entry '" + key + "' region " + std::to_string(index) + ": " + e.what());
      }
      ++index;
    }
  }
  return result;
}

std::vector<LintFinding> lint_annotations(const std::vector<TileAnnotation>& tiles,
                                          const LintThresholds& limits) {
  std::vector<LintFinding> out;
  for (const TileAnnotation& t : tiles) {
    for (std::size_t i = 0; i < t.polygons.size(); ++i) {
      const double a = ring_area(t.polygons[i].ring);
      if (a < limits.min_area) {
        out.push_back({t.tile_id, i, a, "area below minimum"});
      } else if (a > limits.max_area) {
        out.push_back({t.tile_id, i, a, "area above maximum"});
      }
    }
  }
  return out;
}

}  // namespace treedet
