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

#include <doctest.h>

#include <cmath>
#include <random>

#include "treedet/error.hpp"
#include "treedet/geocore.hpp"

using namespace treedet;

namespace {

void check_point(GeoPoint got, double x, double y, double tol = 1e-12) {
  CHECK(std::abs(got.x - x) <= tol);
  CHECK(std::abs(got.y - y) <= tol);
}

}  // namespace

TEST_CASE("pixel_to_geo evaluates the affine formula") {
  const GeoTransform id(0, 1, 0, 0, 0, 1);
  const GeoPoint a = id.pixel_to_geo({10, 20});
  CHECK(a.x == 10);
  CHECK(a.y == 20);

  const GeoPoint b = GeoTransform(0, 0.08, 0, 0, 0, -0.08).pixel_to_geo({100, 200});
  check_point(b, 8.0, -16.0);

  const GeoPoint c = GeoTransform(100, 0.08, 0, 500, 0, -0.08).pixel_to_geo({0, 0});
  CHECK(c.x == 100);
  CHECK(c.y == 500);

  // Rotation terms: x picks up row * rot_x, y picks up col * rot_y.
  const GeoPoint d = GeoTransform(1, 2, 3, 4, 5, 6).pixel_to_geo({7, 11});
  CHECK(d.x == 1 + 7 * 2 + 11 * 3);
  CHECK(d.y == 4 + 7 * 5 + 11 * 6);
}

TEST_CASE("geo_to_pixel inverts pixel_to_geo") {
  const PixelPoint a = GeoTransform::identity().geo_to_pixel({10, 20});
  CHECK(a.col == 10);
  CHECK(a.row == 20);

  const PixelPoint b = GeoTransform(0, 0.08, 0, 0, 0, -0.08).geo_to_pixel({8.0, -16.0});
  CHECK(std::abs(b.col - 100) < 1e-9);
  CHECK(std::abs(b.row - 200) < 1e-9);

  const GeoTransform rot(10, 2, 1, 20, 0.5, -3);
  const PixelPoint c = rot.geo_to_pixel(rot.pixel_to_geo({3.25, -7.5}));
  CHECK(std::abs(c.col - 3.25) < 1e-12);
  CHECK(std::abs(c.row + 7.5) < 1e-12);
}

TEST_CASE("degenerate transforms are representable but not invertible") {
  const GeoTransform deg(0, 0, 0, 0, 0, 1);
  CHECK_FALSE(deg.invertible());
  CHECK(deg.determinant() == 0);
  CHECK_THROWS_AS(deg.geo_to_pixel({1, 1}), Error);
  try {
    deg.geo_to_pixel({1, 1});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_invertible);
  }
  CHECK_FALSE(GeoTransform(0, 1, 2, 0, 2, 4).invertible());
  CHECK_FALSE(GeoTransform(0, NAN, 0, 0, 0, 1).invertible());
}

TEST_CASE("gsd is the square root of the absolute determinant") {
  CHECK(GeoTransform(0, 0.08, 0, 0, 0, -0.08).gsd() == doctest::Approx(0.08));
  CHECK(GeoTransform(0, 2, 0, 0, 0, 8).gsd() == doctest::Approx(4));
}

TEST_CASE("world files are shifted from pixel centre to corner") {
  const GeoTransform a = load_world_file("0.08\n0\n0\n-0.08\n100.04\n499.96\n");
  CHECK(std::abs(a.origin_x() - 100.0) < 1e-9);
  CHECK(a.pixel_w() == 0.08);
  CHECK(a.rot_x() == 0);
  CHECK(std::abs(a.origin_y() - 500.0) < 1e-9);
  CHECK(a.rot_y() == 0);
  CHECK(a.pixel_h() == -0.08);
  CHECK(a.gsd() == doctest::Approx(0.08).epsilon(0.005 / 0.08));

  CHECK(load_world_file("1\n0\n0\n1\n0.5\n0.5\n") == GeoTransform(0, 1, 0, 0, 0, 1));
  CHECK(load_world_file("1\r\n0\r\n0\r\n1\r\n0.5\r\n0.5\r\n") == GeoTransform(0, 1, 0, 0, 0, 1));
  CHECK(load_world_file("1\n0\n0\n1\n0.5\n0.5\n\n\n") == GeoTransform(0, 1, 0, 0, 0, 1));

  // Rotated: the half-pixel shift uses both coefficients along each axis.
  const GeoTransform r = load_world_file("2\n0.5\n0.25\n-3\n10\n20\n");
  CHECK(r.origin_x() == doctest::Approx(10 - 1 - 0.125));
  CHECK(r.origin_y() == doctest::Approx(20 - 0.25 + 1.5));
  const GeoPoint centre = r.pixel_to_geo({0.5, 0.5});
  CHECK(centre.x == doctest::Approx(10));
  CHECK(centre.y == doctest::Approx(20));
}

TEST_CASE("malformed world files are rejected") {
  const auto code_of = [](const char* text) {
    try {
      load_world_file(text);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::io;
  };
  CHECK(code_of("1\n0\n0\n1\n0.5\n") == Errc::parse_error);
  CHECK(code_of("1\n0\n0\n1\n0.5\n0.5\n7\n") == Errc::parse_error);
  CHECK(code_of("1\n0\nzero\n1\n0.5\n0.5\n") == Errc::parse_error);
  CHECK(code_of("1\n0\n0\n1\n0.5\n0.5x\n") == Errc::parse_error);
  CHECK(code_of("0\n0\n0\n1\n0.5\n0.5\n") == Errc::non_invertible);
  CHECK(code_of("") == Errc::parse_error);
}

TEST_CASE("sample world file has the imagery's ground sample distance") {
  const GeoTransform gt = read_world_file(TREEDET_FIXTURES "/sample.tfw");
  CHECK(std::abs(gt.gsd() - 0.08) <= 0.005);
}

TEST_CASE("translating the origin translates every output") {
  // Dyadic coefficients and points: every operation is exact, so the shift is too.
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> k(-4096, 4096);
  const GeoTransform gt(12.5, 0.125, 0.0078125, -40, 0.015625, -0.125);
  for (int i = 0; i < 1000; ++i) {
    const double dx = k(rng) / 8.0;
    const PixelPoint p{k(rng) / 4.0, k(rng) / 4.0};
    const GeoPoint a = gt.pixel_to_geo(p);
    const GeoPoint b = gt.translated(dx, 0).pixel_to_geo(p);
    CHECK(b.x - a.x == dx);
    CHECK(b.y == a.y);
  }
  std::uniform_real_distribution<double> u(-1000, 1000);
  const GeoTransform real(12.3, 0.08, 0.001, -40.7, 0.002, -0.08);
  for (int i = 0; i < 1000; ++i) {
    const double dx = u(rng);
    const PixelPoint p{u(rng), u(rng)};
    const GeoPoint a = real.pixel_to_geo(p);
    const GeoPoint b = real.translated(dx, 0).pixel_to_geo(p);
    CHECK(std::abs((b.x - a.x) - dx) <= 1e-12 * 2048);
    CHECK(b.y == a.y);
  }
}

TEST_CASE("round trip on random well-conditioned transforms") {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> origin(-1e5, 1e5), gsd(0.05, 50), rot(-0.1, 0.1), pix(-5000, 5000);
  double worst = 0;
  for (int i = 0; i < 20000; ++i) {
    const double w = gsd(rng), h = -gsd(rng);
    const GeoTransform gt(origin(rng), w, rot(rng) * w, origin(rng), rot(rng) * std::abs(h), h);
    const PixelPoint p{pix(rng), pix(rng)};
    const PixelPoint q = gt.geo_to_pixel(gt.pixel_to_geo(p));
    worst = std::max({worst, std::abs(q.col - p.col), std::abs(q.row - p.row)});
  }
  CHECK(worst < 1e-9);
}
