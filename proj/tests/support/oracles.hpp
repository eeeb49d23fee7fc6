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

// Reference implementations used only by tests. They are written
// independently of the library: no shared helpers beyond the plain data
// types, and deliberately naive algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "treedet/detpost.hpp"
#include "treedet/evalkit.hpp"

namespace oracle {

using treedet::Box;
using treedet::Detection;
using treedet::GroundTruth;
using treedet::TileData;

inline double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = (a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter;
  return uni > 0 ? inter / uni : 0.0;
}

/// Strict weak order: score desc, then x1, y1, x2, y2, label ascending.
inline bool before(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.box.x1 != b.box.x1) return a.box.x1 < b.box.x1;
  if (a.box.y1 != b.box.y1) return a.box.y1 < b.box.y1;
  if (a.box.x2 != b.box.x2) return a.box.x2 < b.box.x2;
  if (a.box.y2 != b.box.y2) return a.box.y2 < b.box.y2;
  return a.label < b.label;
}

/// Flags which detections (original order) are true positives.
inline std::vector<bool> greedy_tp(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                                   double thresh) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < dets.size(); ++i) order.push_back(i);
  // Insertion sort keeps equal elements in input order.
  for (std::size_t i = 1; i < order.size(); ++i)
    for (std::size_t j = i; j > 0 && before(dets[order[j]], dets[order[j - 1]]); --j) std::swap(order[j], order[j - 1]);
  std::vector<bool> used(gts.size(), false), tp(dets.size(), false);
  for (std::size_t d : order) {
    int best = -1;
    double best_iou = 0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g]) continue;
      const double v = iou(dets[d].box, gts[g].box);
      if (v >= thresh && (best < 0 || v > best_iou)) {
        best = int(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      used[std::size_t(best)] = true;
      tp[d] = true;
    }
  }
  return tp;
}

struct Point {
  double recall, precision;
};

inline std::vector<Point> pr_points(const std::vector<TileData>& tiles, double thresh) {
  struct Item {
    const Detection* d;
    std::string tile;
    bool tp;
  };
  std::vector<Item> items;
  std::size_t n_gt = 0;
  for (const TileData& t : tiles) {
    n_gt += t.gts.size();
    const std::vector<bool> tp = greedy_tp(t.dets, t.gts, thresh);
    for (std::size_t i = 0; i < t.dets.size(); ++i) items.push_back({&t.dets[i], t.tile_id, tp[i]});
  }
  for (std::size_t i = 1; i < items.size(); ++i) {
    for (std::size_t j = i; j > 0; --j) {
      const Item& a = items[j];
      const Item& b = items[j - 1];
      bool less;
      if (a.d->score != b.d->score) less = a.d->score > b.d->score;
      else if (a.tile != b.tile) less = a.tile < b.tile;
      else less = before(*a.d, *b.d);
      if (!less) break;
      std::swap(items[j], items[j - 1]);
    }
  }
  std::vector<Point> pts;
  if (n_gt == 0) return pts;
  double tp = 0, fp = 0;
  for (const Item& it : items) {
    (it.tp ? tp : fp) += 1;
    pts.push_back({tp / double(n_gt), tp / (tp + fp)});
  }
  return pts;
}

/// Exact area under the precision envelope: for every distinct recall level
/// r_k, the segment (r_{k-1}, r_k] is weighted by the best precision at any
/// point with recall >= r_k.
inline double envelope_ap(const std::vector<Point>& pts) {
  std::vector<double> levels;
  for (const Point& p : pts) levels.push_back(p.recall);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  double ap = 0, prev = 0;
  for (double r : levels) {
    double best = 0;
    for (const Point& p : pts)
      if (p.recall >= r) best = std::max(best, p.precision);
    ap += (r - prev) * best;
    prev = r;
  }
  return ap;
}

inline double envelope_ap101(const std::vector<Point>& pts) {
  double sum = 0;
  for (int t = 0; t <= 100; ++t) {
    const double r = t / 100.0;
    double best = 0;
    for (const Point& p : pts)
      if (p.recall >= r) best = std::max(best, p.precision);
    sum += best;
  }
  return sum / 101.0;
}

/// Textbook NMS: walk in rank order, keep, and mark everything overlapping
/// the kept box above the threshold as suppressed.
inline std::vector<Detection> reference_nms(std::vector<Detection> dets, double thresh) {
  std::stable_sort(dets.begin(), dets.end(), before);
  std::vector<bool> suppressed(dets.size(), false);
  std::vector<Detection> keep;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (suppressed[i]) continue;
    keep.push_back(dets[i]);
    for (std::size_t j = i + 1; j < dets.size(); ++j)
      if (iou(dets[i].box, dets[j].box) > thresh) suppressed[j] = true;
  }
  return keep;
}

inline Box random_box(std::mt19937_64& rng, double extent, double min_side, double max_side) {
  std::uniform_real_distribution<double> pos(0, extent), side(min_side, max_side);
  const double x = pos(rng), y = pos(rng);
  return {x, y, x + side(rng), y + side(rng)};
}

/// Random evaluation instance with clustered boxes so that IoU values
/// straddle the thresholds, and scores drawn from a coarse grid so ties occur.
inline std::vector<TileData> random_instance(std::mt19937_64& rng, int max_tiles = 4, int max_dets = 10,
                                             int max_gts = 5) {
  std::uniform_int_distribution<int> n_tiles(1, max_tiles), n_dets(0, max_dets), n_gts(0, max_gts);
  std::uniform_int_distribution<int> score_step(1, 20);
  std::uniform_real_distribution<double> jitter(-6, 6);
  std::vector<TileData> tiles;
  const int nt = n_tiles(rng);
  for (int t = 0; t < nt; ++t) {
    TileData td;
    td.tile_id = "t" + std::to_string(t);
    const int ng = n_gts(rng);
    for (int g = 0; g < ng; ++g) td.gts.push_back({random_box(rng, 60, 10, 30), "coconut", std::nullopt});
    const int nd = n_dets(rng);
    for (int d = 0; d < nd; ++d) {
      Box b;
      if (!td.gts.empty() && rng() % 4 != 0) {
        const Box& g = td.gts[rng() % td.gts.size()].box;
        b = {g.x1 + jitter(rng), g.y1 + jitter(rng), g.x2 + jitter(rng), g.y2 + jitter(rng)};
        if (b.x2 <= b.x1) std::swap(b.x1, b.x2);
        if (b.y2 <= b.y1) std::swap(b.y1, b.y2);
      } else {
        b = random_box(rng, 60, 5, 30);
      }
      td.dets.push_back({b, score_step(rng) / 20.0, "coconut", std::nullopt});
    }
    tiles.push_back(std::move(td));
  }
  return tiles;
}

}  // namespace oracle
