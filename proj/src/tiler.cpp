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

#include "treedet/tiler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>

#include "treedet/error.hpp"

namespace treedet {

namespace {

enum class Edge { left, right, top, bottom };

bool inside(Vec2 v, Edge e, const Rect& r) {
  switch (e) {
    case Edge::left: return v.x >= r.x0;
    case Edge::right: return v.x <= r.x1;
    case Edge::top: return v.y >= r.y0;
    case Edge::bottom: return v.y <= r.y1;
  }
  return false;
}

// Intersection of segment a-b with the boundary line; the coordinate on the
// boundary axis is set exactly so clipped vertices never leave the rect.
Vec2 intersect(Vec2 a, Vec2 b, Edge e, const Rect& r) {
  if (e == Edge::left || e == Edge::right) {
    const double c = e == Edge::left ? r.x0 : r.x1;
    const double t = (c - a.x) / (b.x - a.x);
    return {c, a.y + t * (b.y - a.y)};
  }
  const double c = e == Edge::top ? r.y0 : r.y1;
  const double t = (c - a.y) / (b.y - a.y);
  return {a.x + t * (b.x - a.x), c};
}

std::vector<Vec2> clip_against(const std::vector<Vec2>& poly, Edge e, const Rect& r) {
  std::vector<Vec2> out;
  if (poly.empty()) return out;
  out.reserve(poly.size() + 4);
  Vec2 prev = poly.back();
  bool prev_in = inside(prev, e, r);
  for (const Vec2& cur : poly) {
    const bool cur_in = inside(cur, e, r);
    if (cur_in) {
      if (!prev_in) out.push_back(intersect(prev, cur, e, r));
      out.push_back(cur);
    } else if (prev_in) {
      out.push_back(intersect(prev, cur, e, r));
    }
    prev = cur;
    prev_in = cur_in;
  }
  return out;
}

// Unbiased draw in [0, bound) from a standardized engine, so shuffles are
// reproducible across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const std::uint64_t v = rng();
    if (v < limit) return v % bound;
  }
}

Ring point_square(Vec2 c, double side) {
  const double h = 0.5 * side;
  return {{c.x - h, c.y - h}, {c.x - h, c.y + h}, {c.x + h, c.y + h}, {c.x + h, c.y - h},
          {c.x - h, c.y - h}};
}

}  // namespace

std::string tile_name(int grid_row, int grid_col) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "r%02d_c%02d", grid_row, grid_col);
  return buf;
}

std::vector<TileIndex> tile_grid(int raster_w, int raster_h, int tile, int overlap) {
  if (raster_w <= 0 || raster_h <= 0 || tile <= 0) {
    throw Error(Errc::invalid_argument, "raster and tile dimensions must be positive");
  }
  if (overlap < 0 || overlap >= tile) {
    throw Error(Errc::invalid_argument, "overlap must be in [0, tile)");
  }
  const int stride = tile - overlap;
  const auto count = [&](int extent) {
    return extent <= tile ? 1 : 1 + (extent - tile + stride - 1) / stride;
  };
  const int cols = count(raster_w);
  const int rows = count(raster_h);
  std::vector<TileIndex> grid;
  grid.reserve(std::size_t(cols) * std::size_t(rows));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      TileIndex t;
      t.tile_id = tile_name(r, c);
      t.grid_row = r;
      t.grid_col = c;
      t.x = c * stride;
      t.y = r * stride;
      t.width = std::min(tile, raster_w - t.x);
      t.height = std::min(tile, raster_h - t.y);
      grid.push_back(std::move(t));
    }
  }
  return grid;
}

std::vector<Ring> clip_polygon(const Ring& ring, const Rect& rect) {
  if (rect.degenerate()) throw Error(Errc::invalid_argument, "clip rectangle is degenerate");
  if (ring.size() < 4) return {};
  const Rect b = ring_bounds(ring);
  if (b.x1 < rect.x0 || b.x0 > rect.x1 || b.y1 < rect.y0 || b.y0 > rect.y1) return {};
  if (b.x0 >= rect.x0 && b.x1 <= rect.x1 && b.y0 >= rect.y0 && b.y1 <= rect.y1) {
    return {close_ring(ring)};
  }

  std::vector<Vec2> poly(ring.begin(), ring.end());
  if (is_closed(ring)) poly.pop_back();
  for (Edge e : {Edge::left, Edge::right, Edge::top, Edge::bottom}) {
    poly = clip_against(poly, e, rect);
    if (poly.empty()) return {};
  }
  Ring out;
  out.reserve(poly.size() + 1);
  for (const Vec2& v : poly)
    if (out.empty() || !(out.back() == v)) out.push_back(v);
  while (out.size() > 1 && out.back() == out.front()) out.pop_back();
  if (out.size() < 3) return {};
  out = close_ring(std::move(out));
  if (ring_area(out) == 0.0) return {};
  return {std::move(out)};
}

std::vector<TileAnnotation> assign_annotations(const FeatureSet& pixel_features,
                                               const std::vector<TileIndex>& grid,
                                               const AssignOptions& opts) {
  if (!(opts.min_area_frac >= 0.0 && opts.min_area_frac <= 1.0)) {
    throw Error(Errc::invalid_argument, "min_area_frac must be in [0, 1]");
  }
  if (!(opts.point_box_side > 0.0)) {
    throw Error(Errc::invalid_argument, "point_box_side must be positive");
  }
  std::vector<TileAnnotation> tiles;
  tiles.reserve(grid.size());
  for (const TileIndex& t : grid) tiles.push_back({t.tile_id, {}});

  for (const Feature& f : pixel_features.features) {
    std::vector<Ring> outers;
    if (const auto* pt = std::get_if<PointGeometry>(&f.geometry)) {
      outers.push_back(point_square(pt->at, opts.point_box_side));
    } else {
      for (const Ring& ring : std::get<PolygonGeometry>(f.geometry).rings)
        if (signed_area(ring) <= 0) outers.push_back(ring);
    }
    const std::string label = f.tag(opts.label_key).value_or(opts.default_label);
    for (const Ring& ring : outers) {
      const double original = ring_area(ring);
      if (original == 0.0) continue;
      const Rect fb = ring_bounds(ring);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const Rect tb = grid[i].bounds();
        if (fb.x1 <= tb.x0 || fb.x0 >= tb.x1 || fb.y1 <= tb.y0 || fb.y0 >= tb.y1) continue;
        for (Ring& piece : clip_polygon(ring, tb)) {
          if (ring_area(piece) < opts.min_area_frac * original) continue;
          tiles[i].polygons.push_back({translate(piece, -tb.x0, -tb.y0), label});
        }
      }
    }
  }
  return tiles;
}

SplitCounts apportion(std::size_t n, const SplitRatios& ratios) {
  const double r[3] = {ratios.train, ratios.val, ratios.test};
  for (double v : r) {
    if (!(v > 0.0)) throw Error(Errc::invalid_argument, "split ratios must be positive");
  }
  if (std::fabs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw Error(Errc::invalid_argument, "split ratios must sum to 1");
  }
  std::size_t counts[3];
  double remainder[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = r[i] * double(n);
    // Snap values that are integral up to rounding noise (0.7 * 10 = 7.000000000000001).
    const double snapped = std::fabs(exact - std::round(exact)) < 1e-9 ? std::round(exact) : exact;
    counts[i] = static_cast<std::size_t>(std::floor(snapped));
    remainder[i] = snapped - std::floor(snapped);
    assigned += counts[i];
  }
  int order[3] = {0, 1, 2};
  std::stable_sort(order, order + 3, [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (int k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 3]];
  return {counts[0], counts[1], counts[2]};
}

Split split_dataset(std::vector<std::string> tile_ids, const SplitCounts& counts, std::uint64_t seed) {
  const std::size_t want = counts.train + counts.val + counts.test;
  if (want > tile_ids.size()) {
    throw Error(Errc::invalid_argument, "split counts (" + std::to_string(want) +
                                            ") exceed available tiles (" +
                                            std::to_string(tile_ids.size()) + ")");
  }
  if (want < tile_ids.size()) {
    throw Error(Errc::invalid_argument, "split counts (" + std::to_string(want) +
                                            ") do not cover all " +
                                            std::to_string(tile_ids.size()) + " tiles");
  }
  std::sort(tile_ids.begin(), tile_ids.end());
  if (std::adjacent_find(tile_ids.begin(), tile_ids.end()) != tile_ids.end()) {
    throw Error(Errc::invalid_argument, "duplicate tile id in split input");
  }
  std::mt19937_64 rng(seed);
  for (std::size_t i = tile_ids.size(); i > 1; --i) {
    std::swap(tile_ids[i - 1], tile_ids[bounded(rng, i)]);
  }
  Split s;
  s.seed = seed;
  auto it = tile_ids.begin();
  s.train.assign(it, it + std::ptrdiff_t(counts.train));
  it += std::ptrdiff_t(counts.train);
  s.val.assign(it, it + std::ptrdiff_t(counts.val));
  it += std::ptrdiff_t(counts.val);
  s.test.assign(it, tile_ids.end());
  return s;
}

Split split_dataset(std::vector<std::string> tile_ids, const SplitRatios& ratios, std::uint64_t seed) {
  const SplitCounts counts = apportion(tile_ids.size(), ratios);
  return split_dataset(std::move(tile_ids), counts, seed);
}

}  // namespace treedet
