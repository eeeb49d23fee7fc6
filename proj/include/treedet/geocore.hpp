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

#include <array>
#include <string_view>

namespace treedet {

struct PixelPoint {
  double col = 0.0;
  double row = 0.0;

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

struct GeoPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Six-parameter affine map anchored at the top-left corner of pixel (0,0):
///
///   x = origin_x + col * pixel_w + row * rot_x
///   y = origin_y + col * rot_y   + row * pixel_h
///
/// Coefficient order in the constructor follows GDAL's geotransform array.
/// A transform with zero determinant is representable but not invertible;
/// geo_to_pixel() on it throws Errc::non_invertible.
class GeoTransform {
 public:
  GeoTransform(double origin_x, double pixel_w, double rot_x, double origin_y,
               double rot_y, double pixel_h) noexcept;

  static GeoTransform identity() noexcept { return {0, 1, 0, 0, 0, 1}; }

  double origin_x() const noexcept { return c_[0]; }
  double pixel_w() const noexcept { return c_[1]; }
  double rot_x() const noexcept { return c_[2]; }
  double origin_y() const noexcept { return c_[3]; }
  double rot_y() const noexcept { return c_[4]; }
  double pixel_h() const noexcept { return c_[5]; }
  const std::array<double, 6>& coefficients() const noexcept { return c_; }

  double determinant() const noexcept;
  bool invertible() const noexcept;
  /// Ground sample distance, sqrt(|det|).
  double gsd() const noexcept;

  GeoPoint pixel_to_geo(PixelPoint p) const noexcept;
  PixelPoint geo_to_pixel(GeoPoint g) const;

  /// Same transform with the origin shifted by (dx, dy) geo-units.
  GeoTransform translated(double dx, double dy) const noexcept;

  friend bool operator==(const GeoTransform& a, const GeoTransform& b) {
    return a.c_ == b.c_;
  }

 private:
  std::array<double, 6> c_;
};

GeoPoint pixel_to_geo(const GeoTransform& gt, PixelPoint p) noexcept;
PixelPoint geo_to_pixel(const GeoTransform& gt, GeoPoint g);

/// Parses a six-line world file (pixel_w, rot_y, rot_x, pixel_h, center_x,
/// center_y). World files reference the centre of the top-left pixel, so the
/// origin is shifted back by half a pixel to the corner convention.
GeoTransform load_world_file(std::string_view text);
GeoTransform read_world_file(const std::string& path);

}  // namespace treedet
