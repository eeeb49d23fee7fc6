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

#include "treedet/detfile.hpp"

#include <cmath>

#include "text_util.hpp"
#include "treedet/error.hpp"

namespace treedet {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(Errc::schema, where + ": " + what);
}

double finite_number(const json& v, const std::string& where, const char* what) {
  if (!v.is_number()) schema_error(where, std::string(what) + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(where, std::string(what) + " must be finite");
  return d;
}

}  // namespace

json detection_to_json(const Detection& d) {
  json j;
  j["bbox"] = {d.box.x1, d.box.y1, d.box.x2, d.box.y2};
  j["score"] = d.score;
  j["label"] = d.label;
  if (d.mask) {
    json flat = json::array();
    for (const Vec2& v : *d.mask) {
      flat.push_back(v.x);
      flat.push_back(v.y);
    }
    j["mask"] = std::move(flat);
  } else {
    j["mask"] = nullptr;
  }
  return j;
}

Detection detection_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) schema_error(where, "detection must be an object");
  for (const auto& [k, v] : j.items()) {
    if (k != "bbox" && k != "score" && k != "label" && k != "mask") {
      schema_error(where, "unexpected key '" + k + "'");
    }
  }
  Detection d;
  if (!j.contains("bbox") || !j["bbox"].is_array() || j["bbox"].size() != 4) {
    schema_error(where, "bbox must be [x1,y1,x2,y2]");
  }
  const json& b = j["bbox"];
  d.box = {finite_number(b[0], where, "bbox"), finite_number(b[1], where, "bbox"),
           finite_number(b[2], where, "bbox"), finite_number(b[3], where, "bbox")};
  if (!d.box.valid()) schema_error(where, "bbox must satisfy x1 <= x2 and y1 <= y2");
  if (!j.contains("score")) schema_error(where, "missing score");
  d.score = finite_number(j["score"], where, "score");
  if (d.score < 0.0 || d.score > 1.0) schema_error(where, "score must be in [0, 1]");
  if (!j.contains("label") || !j["label"].is_string()) schema_error(where, "label must be a string");
  d.label = j["label"].get<std::string>();
  if (j.contains("mask") && !j["mask"].is_null()) {
    const json& m = j["mask"];
    if (!m.is_array() || m.size() % 2 != 0 || m.size() < 6) {
      schema_error(where, "mask must be a flat [x,y,...] list of at least 3 vertices");
    }
    Ring ring;
    for (std::size_t i = 0; i < m.size(); i += 2) {
      ring.push_back({finite_number(m[i], where, "mask"), finite_number(m[i + 1], where, "mask")});
    }
    ring = close_ring(std::move(ring));
    if (ring.size() < 4) schema_error(where, "mask ring needs at least 3 distinct vertices");
    d.mask = std::move(ring);
  }
  return d;
}

std::string emit_detection_file(const std::vector<TileDetections>& tiles) {
  std::string out;
  for (const TileDetections& t : tiles) {
    json rec;
    rec["tile_id"] = t.tile_id;
    json dets = json::array();
    for (const Detection& d : t.dets) dets.push_back(detection_to_json(d));
    rec["detections"] = std::move(dets);
    out += rec.dump();
    out += '\n';
  }
  return out;
}

std::vector<TileDetections> parse_detection_file(std::string_view text) {
  std::vector<TileDetections> out;
  std::size_t record = 0;
  for (std::string_view line : detail::split_lines(text)) {
    if (detail::trim(line).empty()) continue;
    const std::string where = "record " + std::to_string(record);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      schema_error(where, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) schema_error(where, "record must be an object");
    for (const auto& [k, v] : rec.items()) {
      if (k != "tile_id" && k != "detections" && k != "protocol") {
        schema_error(where, "unexpected key '" + k + "'");
      }
    }
    if (!rec.contains("tile_id") || !rec["tile_id"].is_string()) schema_error(where, "tile_id must be a string");
    if (!rec.contains("detections") || !rec["detections"].is_array()) {
      schema_error(where, "detections must be an array");
    }
    TileDetections t;
    t.tile_id = rec["tile_id"].get<std::string>();
    std::size_t i = 0;
    for (const json& d : rec["detections"]) {
      t.dets.push_back(detection_from_json(d, where + " detection " + std::to_string(i++)));
    }
    out.push_back(std::move(t));
    ++record;
  }
  return out;
}

std::vector<TileDetections> read_detection_file(const std::string& path) {
  try {
    return parse_detection_file(detail::read_text_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void write_detection_file(const std::string& path, const std::vector<TileDetections>& tiles) {
  detail::write_text_file(path, emit_detection_file(tiles));
}

}  // namespace treedet
