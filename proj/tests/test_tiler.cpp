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
#include <numbers>
#include <random>
#include <set>

#include "treedet/error.hpp"
#include "treedet/tiler.hpp"
#include "treedet/vector_io.hpp"

using namespace treedet;

namespace {

Ring square(double x0, double y0, double x1, double y1) {
  // Outer rings carry negative signed area in pixel space.
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
}

FeatureSet pixel_set(std::vector<Feature> features) {
  FeatureSet fs;
  fs.features = std::move(features);
  fs.space = CoordSpace::pixel;
  fs.recompute_bbox();
  return fs;
}

Feature polygon_feature(Ring ring, std::vector<Tag> tags = {}) {
  Feature f;
  f.geometry = normalize_polygon({std::move(ring)}, RingRoles::by_winding);
  f.tags = std::move(tags);
  return f;
}

/// Star-shaped, generally non-convex polygon around (cx, cy).
Ring random_star(std::mt19937_64& rng, double cx, double cy, double rmax) {
  std::uniform_int_distribution<int> nv(3, 14);
  std::uniform_real_distribution<double> rad(0.2 * rmax, rmax), jitter(0.0, 1.0);
  const int n = nv(rng);
  Ring r;
  for (int i = 0; i < n; ++i) {
    const double a = 2 * std::numbers::pi * (i + 0.8 * jitter(rng)) / n;
    const double rr = rad(rng);
    r.push_back({cx + rr * std::cos(a), cy + rr * std::sin(a)});
  }
  r.push_back(r.front());
  return r;
}

}  // namespace

TEST_CASE("grid dimensions and edge truncation") {
  const auto g = tile_grid(3000, 2000, 1000);
  REQUIRE(g.size() == 6);
  for (const TileIndex& t : g) {
    CHECK(t.width == 1000);
    CHECK(t.height == 1000);
  }
  CHECK(g[0].tile_id == "r00_c00");
  CHECK(g[1].tile_id == "r00_c01");
  CHECK(g[3].tile_id == "r01_c00");
  CHECK(g[5].x == 2000);
  CHECK(g[5].y == 1000);

  CHECK(tile_grid(1000, 1000, 1000).size() == 1);

  const auto e = tile_grid(1500, 1000, 1000);
  REQUIRE(e.size() == 2);
  CHECK(e[0].width == 1000);
  CHECK(e[1].width == 500);
  CHECK(e[1].x == 1000);

  const auto small = tile_grid(300, 200, 1000);
  REQUIRE(small.size() == 1);
  CHECK(small[0].width == 300);
  CHECK(small[0].height == 200);

  CHECK(tile_name(3, 7) == "r03_c07");
}

TEST_CASE("grid tiles partition the raster") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 5000), tile(1, 1200);
  for (int i = 0; i < 300; ++i) {
    const int w = dim(rng), h = dim(rng), t = tile(rng);
    const auto g = tile_grid(w, h, t);
    long long area = 0;
    for (const TileIndex& ti : g) {
      area += (long long)ti.width * ti.height;
      CHECK(ti.x % t == 0);
      CHECK(ti.y % t == 0);
      CHECK(ti.width > 0);
      CHECK(ti.height > 0);
    }
    CHECK(area == (long long)w * h);
    CHECK(g.size() == std::size_t((w + t - 1) / t) * std::size_t((h + t - 1) / t));
  }
}

TEST_CASE("overlapping grid covers the raster with stride tile - overlap") {
  const auto g = tile_grid(2500, 1000, 1000, 200);
  REQUIRE(g.size() == 3);
  CHECK(g[1].x == 800);
  CHECK(g[2].x == 1600);
  CHECK(g[2].width == 900);
  CHECK_THROWS_AS(tile_grid(100, 100, 50, 50), Error);
  CHECK_THROWS_AS(tile_grid(100, 100, 50, -1), Error);
  CHECK_THROWS_AS(tile_grid(0, 100, 50), Error);
  CHECK_THROWS_AS(tile_grid(100, 100, 0), Error);
}

TEST_CASE("clipping examples") {
  const Rect tile{0, 0, 1000, 1000};
  const auto a = clip_polygon(square(500, 500, 1500, 1500), tile);
  REQUIRE(a.size() == 1);
  CHECK(ring_area(a[0]) == doctest::Approx(250000));
  const Rect b = ring_bounds(a[0]);
  CHECK(b.x0 == 500);
  CHECK(b.y0 == 500);
  CHECK(b.x1 == 1000);
  CHECK(b.y1 == 1000);
  CHECK(is_closed(a[0]));

  const Ring inside = square(10, 10, 20, 30);
  const auto c = clip_polygon(inside, tile);
  REQUIRE(c.size() == 1);
  CHECK(c[0] == inside);

  CHECK(clip_polygon(square(1100, 0, 1200, 50), tile).empty());
  // Touching along an edge has zero-area intersection.
  CHECK(clip_polygon(square(1000, 0, 1200, 50), tile).empty());
  CHECK_THROWS_AS(clip_polygon(inside, Rect{0, 0, 0, 10}), Error);
}

TEST_CASE("clipped areas over a grid sum to the original area") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> cx(150, 2850), cy(150, 1850);
  const auto grid = tile_grid(3000, 2000, 1000);
  for (int i = 0; i < 300; ++i) {
    const Ring r = random_star(rng, cx(rng), cy(rng), 140);
    const double original = ring_area(r);
    double sum = 0;
    for (const TileIndex& t : grid) {
      for (const Ring& piece : clip_polygon(r, t.bounds())) {
        sum += ring_area(piece);
        for (const Vec2& v : piece) {
          CHECK(v.x >= t.x - 1e-9);
          CHECK(v.x <= t.x + t.width + 1e-9);
          CHECK(v.y >= t.y - 1e-9);
          CHECK(v.y <= t.y + t.height + 1e-9);
        }
      }
    }
    CHECK(std::abs(sum - original) <= 1e-6 * original);
  }
}

TEST_CASE("annotation assignment") {
  const auto grid = tile_grid(2000, 1000, 1000);

  const auto inside = assign_annotations(pixel_set({polygon_feature(square(100, 100, 200, 200))}), grid);
  REQUIRE(inside.size() == 2);
  CHECK(inside[0].polygons.size() == 1);
  CHECK(inside[1].polygons.empty());
  CHECK(inside[0].polygons[0].label == "coconut");

  const FeatureSet straddle = pixel_set({polygon_feature(square(950, 100, 1050, 200), {{"label", "palm"}})});
  AssignOptions quarter;
  quarter.min_area_frac = 0.25;
  const auto halves = assign_annotations(straddle, grid, quarter);
  REQUIRE(halves[0].polygons.size() == 1);
  REQUIRE(halves[1].polygons.size() == 1);
  CHECK(halves[1].polygons[0].label == "palm");
  CHECK(ring_area(halves[0].polygons[0].ring) == doctest::Approx(5000));
  // Tile-local coordinates.
  const Rect right = ring_bounds(halves[1].polygons[0].ring);
  CHECK(right.x0 == 0);
  CHECK(right.x1 == 50);

  AssignOptions strict;
  strict.min_area_frac = 0.6;
  const auto none = assign_annotations(straddle, grid, strict);
  CHECK(none[0].polygons.empty());
  CHECK(none[1].polygons.empty());
}

TEST_CASE("points become squares of the configured side") {
  Feature pt;
  pt.geometry = PointGeometry{{500, 500}};
  const auto grid = tile_grid(1000, 1000, 1000);
  const auto tiles = assign_annotations(pixel_set({pt}), grid);
  REQUIRE(tiles[0].polygons.size() == 1);
  const Ring& r = tiles[0].polygons[0].ring;
  CHECK(ring_area(r) == doctest::Approx(1600));
  CHECK(ring_bounds(r).x0 == 480);
  CHECK(ring_bounds(r).y1 == 520);
  CHECK(signed_area(r) < 0);

  AssignOptions big;
  big.point_box_side = 10;
  CHECK(ring_area(assign_annotations(pixel_set({pt}), grid, big)[0].polygons[0].ring) == doctest::Approx(100));
}

TEST_CASE("every clipped vertex stays inside its tile") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> cx(0, 3000), cy(0, 2000);
  std::vector<Feature> feats;
  for (int i = 0; i < 200; ++i) feats.push_back(polygon_feature(random_star(rng, cx(rng), cy(rng), 90)));
  const auto grid = tile_grid(3000, 2000, 1000);
  AssignOptions all;
  all.min_area_frac = 0;
  for (const TileAnnotation& t : assign_annotations(pixel_set(feats), grid, all)) {
    for (const LabeledRing& p : t.polygons) {
      CHECK(p.ring.size() >= 4);
      CHECK(is_closed(p.ring));
      for (const Vec2& v : p.ring) {
        CHECK(v.x >= -1e-9);
        CHECK(v.x <= 1000 + 1e-9);
        CHECK(v.y >= -1e-9);
        CHECK(v.y <= 1000 + 1e-9);
      }
    }
  }
}

TEST_CASE("dataset split sizes, disjointness and determinism") {
  std::vector<std::string> ids;
  for (int i = 0; i < 70; ++i) ids.push_back(tile_name(i / 10, i % 10));
  const Split s = split_dataset(ids, SplitCounts{50, 10, 10}, 42);
  CHECK(s.train.size() == 50);
  CHECK(s.val.size() == 10);
  CHECK(s.test.size() == 10);
  std::set<std::string> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 70);
  CHECK(all == std::set<std::string>(ids.begin(), ids.end()));
  CHECK(split_dataset(ids, SplitCounts{50, 10, 10}, 42) == s);
  CHECK_FALSE(split_dataset(ids, SplitCounts{50, 10, 10}, 43) == s);

  std::vector<std::string> shuffled(ids.rbegin(), ids.rend());
  CHECK(split_dataset(shuffled, SplitCounts{50, 10, 10}, 42) == s);

  std::vector<std::string> ten(ids.begin(), ids.begin() + 10);
  const Split r = split_dataset(ten, SplitRatios{0.8, 0.1, 0.1}, 1);
  CHECK(r.train.size() == 8);
  CHECK(r.val.size() == 1);
  CHECK(r.test.size() == 1);

  CHECK_THROWS_AS(split_dataset(ten, SplitCounts{8, 2, 1}, 0), Error);
  CHECK_THROWS_AS(split_dataset(ten, SplitCounts{5, 1, 1}, 0), Error);
  CHECK_THROWS_AS(split_dataset({"a", "a"}, SplitCounts{1, 1, 0}, 0), Error);
  CHECK_THROWS_AS(split_dataset(ten, SplitRatios{0.5, 0.1, 0.1}, 0), Error);
}

TEST_CASE("largest-remainder apportionment") {
  const SplitCounts a = apportion(70, {0.7, 0.15, 0.15});
  CHECK(a.train + a.val + a.test == 70);
  CHECK(a.train == 49);
  const SplitCounts b = apportion(7, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(b.train + b.val + b.test == 7);
  CHECK(b.train == 3);
  CHECK(b.val == 2);
  CHECK(b.test == 2);
  const SplitCounts c = apportion(10, {0.8, 0.1, 0.1});
  CHECK(c.train == 8);
  CHECK(c.val == 1);
  CHECK(c.test == 1);
}
