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

#include "treedet/vector_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <nlohmann/json.hpp>

#include "text_util.hpp"
#include "treedet/error.hpp"

namespace treedet {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::int32_t kShpFileCode = 9994;
constexpr std::int32_t kShpVersion = 1000;
constexpr std::int32_t kShapeNull = 0;
constexpr std::int32_t kShapePoint = 1;
constexpr std::int32_t kShapePolygon = 5;
constexpr std::size_t kShpHeaderSize = 100;

// Bounds-checked view over the file; every read names the offset on failure.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t size() const { return bytes_.size(); }

  void require(std::size_t offset, std::size_t n, const char* what) const {
    if (offset > bytes_.size() || n > bytes_.size() - offset) {
      throw Error(Errc::truncated, std::string("truncated ") + what + " at offset " +
                                       std::to_string(offset) + " (need " + std::to_string(n) +
                                       " bytes, file has " + std::to_string(bytes_.size()) + ")");
    }
  }

  std::int32_t i32_be(std::size_t off) const {
    require(off, 4, "integer");
    return static_cast<std::int32_t>((std::uint32_t(bytes_[off]) << 24) |
                                     (std::uint32_t(bytes_[off + 1]) << 16) |
                                     (std::uint32_t(bytes_[off + 2]) << 8) |
                                     std::uint32_t(bytes_[off + 3]));
  }

  std::int32_t i32_le(std::size_t off) const {
    require(off, 4, "integer");
    return static_cast<std::int32_t>(std::uint32_t(bytes_[off]) |
                                     (std::uint32_t(bytes_[off + 1]) << 8) |
                                     (std::uint32_t(bytes_[off + 2]) << 16) |
                                     (std::uint32_t(bytes_[off + 3]) << 24));
  }

  std::uint32_t u32_le(std::size_t off) const { return static_cast<std::uint32_t>(i32_le(off)); }

  std::uint16_t u16_le(std::size_t off) const {
    require(off, 2, "integer");
    return static_cast<std::uint16_t>(bytes_[off] | (bytes_[off + 1] << 8));
  }

  double f64_le(std::size_t off) const {
    require(off, 8, "double");
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes_[off + static_cast<std::size_t>(i)];
    return std::bit_cast<double>(bits);
  }

  std::uint8_t u8(std::size_t off) const {
    require(off, 1, "byte");
    return bytes_[off];
  }

  std::span<const std::uint8_t> slice(std::size_t off, std::size_t n) const {
    require(off, n, "field");
    return bytes_.subspan(off, n);
  }

 private:
  std::span<const std::uint8_t> bytes_;
};

std::string latin1_to_utf8(std::span<const std::uint8_t> raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::uint8_t c : raw) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

std::string rtrim(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.pop_back();
  return s;
}

Ring read_points(const ByteReader& r, std::size_t off, std::int32_t begin, std::int32_t end) {
  Ring ring;
  ring.reserve(static_cast<std::size_t>(end - begin));
  for (std::int32_t i = begin; i < end; ++i) {
    const std::size_t p = off + static_cast<std::size_t>(i) * 16;
    ring.push_back({r.f64_le(p), r.f64_le(p + 8)});
  }
  return ring;
}

PolygonGeometry read_polygon_record(const ByteReader& r, std::size_t content, std::size_t len) {
  // type(4) bbox(32) numParts(4) numPoints(4) parts[] points[]
  if (len < 44) {
    throw Error(Errc::truncated, "polygon record at offset " + std::to_string(content) +
                                     " shorter than its fixed header");
  }
  const std::int32_t num_parts = r.i32_le(content + 36);
  const std::int32_t num_points = r.i32_le(content + 40);
  if (num_parts < 0 || num_points < 0) {
    throw Error(Errc::parse_error, "negative part/point count at offset " + std::to_string(content));
  }
  const std::size_t need = 44 + std::size_t(num_parts) * 4 + std::size_t(num_points) * 16;
  if (need > len) {
    throw Error(Errc::truncated, "polygon record at offset " + std::to_string(content) +
                                     " declares " + std::to_string(need) +
                                     " bytes but content length is " + std::to_string(len));
  }
  const std::size_t parts_off = content + 44;
  const std::size_t points_off = parts_off + std::size_t(num_parts) * 4;
  std::vector<Ring> rings;
  for (std::int32_t p = 0; p < num_parts; ++p) {
    const std::int32_t begin = r.i32_le(parts_off + std::size_t(p) * 4);
    const std::int32_t end =
        p + 1 < num_parts ? r.i32_le(parts_off + std::size_t(p + 1) * 4) : num_points;
    if (begin < 0 || end > num_points || begin > end) {
      throw Error(Errc::parse_error, "bad part index at offset " + std::to_string(parts_off));
    }
    rings.push_back(read_points(r, points_off, begin, end));
  }
  return normalize_polygon(std::move(rings), RingRoles::by_winding);
}

BBox bbox_of(const std::vector<Feature>& features) {
  BBox b;
  for (const Feature& f : features) {
    if (const auto* pt = std::get_if<PointGeometry>(&f.geometry)) {
      b.expand(pt->at);
    } else {
      for (const Ring& ring : std::get<PolygonGeometry>(f.geometry).rings)
        for (const Vec2& v : ring) b.expand(v);
    }
  }
  return b;
}

Vec2 read_position(const ordered_json& pos) {
  if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
    throw Error(Errc::parse_error, "GeoJSON position must be an array of at least 2 numbers");
  }
  return {pos[0].get<double>(), pos[1].get<double>()};
}

std::string property_text(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

ordered_json position(Vec2 v) { return ordered_json::array({v.x, v.y}); }

}  // namespace

std::optional<std::string> Feature::tag(std::string_view key) const {
  for (const Tag& t : tags)
    if (t.first == key) return t.second;
  return std::nullopt;
}

bool Feature::has_tag(std::string_view key, std::string_view value) const {
  return std::any_of(tags.begin(), tags.end(),
                     [&](const Tag& t) { return t.first == key && t.second == value; });
}

void BBox::expand(Vec2 v) {
  if (empty) {
    min_x = max_x = v.x;
    min_y = max_y = v.y;
    empty = false;
    return;
  }
  min_x = std::min(min_x, v.x);
  min_y = std::min(min_y, v.y);
  max_x = std::max(max_x, v.x);
  max_y = std::max(max_y, v.y);
}

bool BBox::contains(Vec2 v) const {
  return !empty && v.x >= min_x && v.x <= max_x && v.y >= min_y && v.y <= max_y;
}

void FeatureSet::recompute_bbox() { bbox = bbox_of(features); }

double polygon_area(const PolygonGeometry& poly) {
  double a = 0.0;
  for (const Ring& ring : poly.rings) a -= signed_area(ring);
  return a;
}

PolygonGeometry normalize_polygon(std::vector<Ring> rings, RingRoles roles) {
  PolygonGeometry out;
  bool any_clockwise = false;
  for (Ring& ring : rings) {
    ring = close_ring(std::move(ring));
    if (ring.size() < 4) {
      throw Error(Errc::parse_error,
                  "polygon ring has " + std::to_string(ring.size()) + " vertices, need at least 4");
    }
    if (signed_area(ring) < 0) any_clockwise = true;
  }
  for (std::size_t i = 0; i < rings.size(); ++i) {
    Ring& ring = rings[i];
    const double a = signed_area(ring);
    bool outer = false;
    if (roles == RingRoles::first_is_exterior) {
      outer = i == 0;
    } else {
      outer = any_clockwise ? a <= 0 : true;
    }
    if ((outer && a > 0) || (!outer && a < 0)) ring = reversed(std::move(ring));
    out.rings.push_back(std::move(ring));
  }
  return out;
}

std::vector<std::vector<Tag>> parse_dbf(std::span<const std::uint8_t> dbf) {
  ByteReader r(dbf);
  r.require(0, 32, "dbf header");
  const std::uint32_t num_records = r.u32_le(4);
  const std::uint16_t header_size = r.u16_le(8);
  const std::uint16_t record_size = r.u16_le(10);

  struct Field {
    std::string name;
    char type;
    std::size_t length;
  };
  std::vector<Field> fields;
  std::size_t off = 32;
  for (;;) {
    const std::uint8_t first = r.u8(off);
    if (first == 0x0D) break;
    if (off + 32 > header_size) {
      throw Error(Errc::parse_error, "dbf field descriptors overrun header at offset " +
                                         std::to_string(off));
    }
    auto name_bytes = r.slice(off, 11);
    std::size_t n = 0;
    while (n < 11 && name_bytes[n] != 0) ++n;
    fields.push_back({latin1_to_utf8(name_bytes.first(n)), static_cast<char>(r.u8(off + 11)),
                      r.u8(off + 16)});
    off += 32;
  }

  std::size_t sum = 1;  // deletion flag
  for (const Field& f : fields) sum += f.length;
  if (sum > record_size) {
    throw Error(Errc::parse_error, "dbf record size " + std::to_string(record_size) +
                                       " smaller than its fields (" + std::to_string(sum) + ")");
  }

  std::vector<std::vector<Tag>> rows;
  rows.reserve(num_records);
  for (std::uint32_t i = 0; i < num_records; ++i) {
    std::size_t pos = header_size + std::size_t(i) * record_size;
    r.require(pos, record_size, "dbf record");
    ++pos;
    std::vector<Tag> row;
    for (const Field& f : fields) {
      std::string value = rtrim(latin1_to_utf8(r.slice(pos, f.length)));
      if (f.type != 'C') value = std::string(detail::trim(value));
      row.emplace_back(f.name, std::move(value));
      pos += f.length;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

FeatureSet parse_shapefile(std::span<const std::uint8_t> shp,
                           std::optional<std::span<const std::uint8_t>> dbf) {
  ByteReader r(shp);
  if (shp.size() < 4 || r.i32_be(0) != kShpFileCode) {
    throw Error(Errc::bad_magic, "not a shapefile: file code at offset 0 is not 9994");
  }
  r.require(0, kShpHeaderSize, "shapefile header");
  const std::size_t declared = std::size_t(std::uint32_t(r.i32_be(24))) * 2;
  const std::int32_t version = r.i32_le(28);
  if (version != kShpVersion) {
    throw Error(Errc::bad_magic, "unexpected shapefile version " + std::to_string(version) +
                                     " at offset 28");
  }
  const std::int32_t shape_type = r.i32_le(32);
  if (shape_type != kShapePoint && shape_type != kShapePolygon) {
    throw Error(Errc::unsupported_shape,
                "unsupported shape type " + std::to_string(shape_type) + " (only Point and Polygon)");
  }
  if (declared < kShpHeaderSize) {
    throw Error(Errc::parse_error, "declared file length " + std::to_string(declared) +
                                       " bytes is shorter than the header");
  }
  if (declared > shp.size()) {
    throw Error(Errc::truncated, "file truncated at offset " + std::to_string(shp.size()) +
                                     ": declared length is " + std::to_string(declared) + " bytes");
  }

  std::vector<std::vector<Tag>> rows;
  if (dbf) rows = parse_dbf(*dbf);

  FeatureSet fs;
  std::size_t record_index = 0;
  std::size_t off = kShpHeaderSize;
  while (off < declared) {
    if (declared - off < 8) {
      throw Error(Errc::truncated, "truncated record header at offset " + std::to_string(off));
    }
    const std::int32_t words = r.i32_be(off + 4);
    if (words < 0) {
      throw Error(Errc::parse_error, "negative content length at offset " + std::to_string(off + 4));
    }
    const std::size_t content = off + 8;
    const std::size_t len = std::size_t(words) * 2;
    if (len > declared - content) {
      throw Error(Errc::truncated, "record " + std::to_string(record_index + 1) + " at offset " +
                                       std::to_string(off) + " runs past the declared file end");
    }
    if (len < 4) {
      throw Error(Errc::truncated, "record at offset " + std::to_string(off) + " has no shape type");
    }
    const std::int32_t rec_type = r.i32_le(content);
    if (rec_type == kShapeNull) {
      ++fs.skipped;
    } else if (rec_type != shape_type) {
      throw Error(Errc::unsupported_shape, "record at offset " + std::to_string(off) +
                                               " has shape type " + std::to_string(rec_type) +
                                               ", file declares " + std::to_string(shape_type));
    } else {
      Feature f;
      if (rec_type == kShapePoint) {
        if (len < 20) {
          throw Error(Errc::truncated, "point record at offset " + std::to_string(off) + " too short");
        }
        f.geometry = PointGeometry{{r.f64_le(content + 4), r.f64_le(content + 12)}};
      } else {
        f.geometry = read_polygon_record(r, content, len);
      }
      if (dbf) {
        if (record_index >= rows.size()) {
          throw Error(Errc::record_mismatch, "shapefile has more records than the dbf (" +
                                                 std::to_string(rows.size()) + ")");
        }
        f.tags = rows[record_index];
      }
      fs.features.push_back(std::move(f));
    }
    ++record_index;
    off = content + len;
  }
  if (dbf && record_index != rows.size()) {
    throw Error(Errc::record_mismatch, "shapefile has " + std::to_string(record_index) +
                                           " records but dbf has " + std::to_string(rows.size()));
  }
  fs.recompute_bbox();
  return fs;
}

FeatureSet parse_geojson(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::parse_error, std::string("invalid GeoJSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw Error(Errc::parse_error, "GeoJSON document is not a FeatureCollection");
  }
  FeatureSet fs;
  if (doc.value("coordinate_space", "") == "pixel") fs.space = CoordSpace::pixel;
  std::size_t index = 0;
  for (const ordered_json& jf : doc["features"]) {
    try {
      if (!jf.is_object() || !jf.contains("geometry")) {
        throw Error(Errc::parse_error, "feature is missing its geometry member");
      }
      const ordered_json& geom = jf["geometry"];
      if (geom.is_null() || !geom.is_object()) {
        ++fs.skipped;
        continue;
      }
      const std::string type = geom.value("type", "");
      Feature f;
      if (type == "Point") {
        f.geometry = PointGeometry{read_position(geom.at("coordinates"))};
      } else if (type == "Polygon") {
        const ordered_json& coords = geom.at("coordinates");
        if (!coords.is_array()) throw Error(Errc::parse_error, "Polygon coordinates must be an array");
        std::vector<Ring> rings;
        for (const ordered_json& jr : coords) {
          if (!jr.is_array()) throw Error(Errc::parse_error, "Polygon ring must be an array");
          Ring ring;
          for (const ordered_json& pos : jr) ring.push_back(read_position(pos));
          rings.push_back(std::move(ring));
        }
        f.geometry = normalize_polygon(std::move(rings), RingRoles::first_is_exterior);
      } else {
        ++fs.skipped;
        continue;
      }
      if (jf.contains("properties") && jf["properties"].is_object()) {
        for (const auto& [k, v] : jf["properties"].items()) {
          if (v.is_null()) continue;
          f.tags.emplace_back(k, property_text(v));
        }
      }
      fs.features.push_back(std::move(f));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::parse_error, "feature " + std::to_string(index) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), "feature " + std::to_string(index) + ": " + e.what());
    }
    ++index;
  }
  fs.recompute_bbox();
  return fs;
}

std::string emit_geojson(const FeatureSet& fs) {
  ordered_json doc;
  doc["type"] = "FeatureCollection";
  if (fs.space == CoordSpace::pixel) doc["coordinate_space"] = "pixel";
  ordered_json features = ordered_json::array();
  for (const Feature& f : fs.features) {
    ordered_json jf;
    jf["type"] = "Feature";
    ordered_json props = ordered_json::object();
    for (const Tag& t : f.tags) props[t.first] = t.second;
    jf["properties"] = std::move(props);
    ordered_json geom;
    if (const auto* pt = std::get_if<PointGeometry>(&f.geometry)) {
      geom["type"] = "Point";
      geom["coordinates"] = position(pt->at);
    } else {
      geom["type"] = "Polygon";
      ordered_json rings = ordered_json::array();
      for (const Ring& ring : std::get<PolygonGeometry>(f.geometry).rings) {
        ordered_json jr = ordered_json::array();
        for (const Vec2& v : ring) jr.push_back(position(v));
        rings.push_back(std::move(jr));
      }
      geom["coordinates"] = std::move(rings);
    }
    jf["geometry"] = std::move(geom);
    features.push_back(std::move(jf));
  }
  doc["features"] = std::move(features);
  return doc.dump(1) + "\n";
}

FeatureSet filter_by_tag(const FeatureSet& fs, std::string_view key, std::string_view value) {
  FeatureSet out;
  out.space = fs.space;
  for (const Feature& f : fs.features)
    if (f.has_tag(key, value)) out.features.push_back(f);
  out.recompute_bbox();
  return out;
}

FeatureSet exclude_by_tag(const FeatureSet& fs, std::string_view key, std::string_view value) {
  FeatureSet out;
  out.space = fs.space;
  for (const Feature& f : fs.features)
    if (!f.has_tag(key, value)) out.features.push_back(f);
  out.recompute_bbox();
  return out;
}

FeatureSet project_features(const FeatureSet& fs, const GeoTransform& gt) {
  if (!gt.invertible()) {
    throw Error(Errc::non_invertible, "cannot project features through a degenerate transform");
  }
  const auto to_pixel = [&](Vec2 v) {
    const PixelPoint p = gt.geo_to_pixel({v.x, v.y});
    return Vec2{p.col, p.row};
  };
  const bool flips = gt.determinant() < 0;
  FeatureSet out;
  out.space = CoordSpace::pixel;
  out.features.reserve(fs.features.size());
  for (const Feature& f : fs.features) {
    Feature g;
    g.tags = f.tags;
    if (const auto* pt = std::get_if<PointGeometry>(&f.geometry)) {
      g.geometry = PointGeometry{to_pixel(pt->at)};
    } else {
      PolygonGeometry poly;
      for (const Ring& ring : std::get<PolygonGeometry>(f.geometry).rings) {
        Ring mapped;
        mapped.reserve(ring.size());
        for (const Vec2& v : ring) mapped.push_back(to_pixel(v));
        if (flips) mapped = reversed(std::move(mapped));
        poly.rings.push_back(std::move(mapped));
      }
      g.geometry = std::move(poly);
    }
    out.features.push_back(std::move(g));
  }
  out.recompute_bbox();
  return out;
}

FeatureSet read_vector_file(const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".shp") {
    const auto shp = detail::read_binary_file(path);
    fs::path dbf_path = p;
    dbf_path.replace_extension(".dbf");
    if (!fs::exists(dbf_path)) {
      dbf_path.replace_extension(".DBF");
    }
    if (fs::exists(dbf_path)) {
      const auto dbf = detail::read_binary_file(dbf_path.string());
      return parse_shapefile(shp, std::span<const std::uint8_t>(dbf));
    }
    return parse_shapefile(shp);
  }
  return parse_geojson(detail::read_text_file(path));
}

}  // namespace treedet
