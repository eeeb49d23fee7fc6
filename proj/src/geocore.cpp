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

#include "treedet/geocore.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "treedet/error.hpp"
#include "text_util.hpp"

namespace treedet {

GeoTransform::GeoTransform(double origin_x, double pixel_w, double rot_x,
                           double origin_y, double rot_y, double pixel_h) noexcept
    : c_{origin_x, pixel_w, rot_x, origin_y, rot_y, pixel_h} {}

double GeoTransform::determinant() const noexcept {
  return pixel_w() * pixel_h() - rot_x() * rot_y();
}

bool GeoTransform::invertible() const noexcept {
  const double det = determinant();
  return det != 0.0 && std::isfinite(det);
}

double GeoTransform::gsd() const noexcept { return std::sqrt(std::fabs(determinant())); }

GeoPoint GeoTransform::pixel_to_geo(PixelPoint p) const noexcept {
  return {origin_x() + p.col * pixel_w() + p.row * rot_x(),
          origin_y() + p.col * rot_y() + p.row * pixel_h()};
}

PixelPoint GeoTransform::geo_to_pixel(GeoPoint g) const {
  if (!invertible()) {
    throw Error(Errc::non_invertible, "geotransform has zero determinant");
  }
  const double det = determinant();
  const double dx = g.x - origin_x();
  const double dy = g.y - origin_y();
  return {(pixel_h() * dx - rot_x() * dy) / det, (pixel_w() * dy - rot_y() * dx) / det};
}

GeoTransform GeoTransform::translated(double dx, double dy) const noexcept {
  return {origin_x() + dx, pixel_w(), rot_x(), origin_y() + dy, rot_y(), pixel_h()};
}

GeoPoint pixel_to_geo(const GeoTransform& gt, PixelPoint p) noexcept {
  return gt.pixel_to_geo(p);
}

PixelPoint geo_to_pixel(const GeoTransform& gt, GeoPoint g) { return gt.geo_to_pixel(g); }

GeoTransform load_world_file(std::string_view text) {
  std::vector<std::string_view> lines = detail::split_lines(text);
  while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
  if (lines.size() != 6) {
    throw Error(Errc::parse_error,
                "world file must have 6 lines, found " + std::to_string(lines.size()));
  }
  double v[6];
  for (int i = 0; i < 6; ++i) {
    auto parsed = detail::parse_double(detail::trim(lines[i]));
    if (!parsed) {
      throw Error(Errc::parse_error, "world file line " + std::to_string(i + 1) +
                                         " is not a number: '" + std::string(lines[i]) + "'");
    }
    v[i] = *parsed;
  }
  const double pixel_w = v[0], rot_y = v[1], rot_x = v[2], pixel_h = v[3];
  const double center_x = v[4], center_y = v[5];
  GeoTransform gt(center_x - 0.5 * pixel_w - 0.5 * rot_x, pixel_w, rot_x,
                  center_y - 0.5 * rot_y - 0.5 * pixel_h, rot_y, pixel_h);
  if (!gt.invertible()) {
    throw Error(Errc::non_invertible, "world file describes a degenerate transform");
  }
  return gt;
}

GeoTransform read_world_file(const std::string& path) {
  return load_world_file(detail::read_text_file(path));
}

}  // namespace treedet
