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

#include "treedet/evalkit.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "treedet/error.hpp"

namespace treedet {

namespace {

double pair_iou(const Detection& d, const GroundTruth& g, IouMode mode) {
  if (mode == IouMode::box) return box_iou(d.box, g.box);
  const Rect a = ring_bounds(*d.mask), b = ring_bounds(*g.mask);
  if (!a.intersects(b)) return 0.0;
  return polygon_iou(*d.mask, *g.mask);
}

struct RankedDet {
  const Detection* det;
  std::size_t tile;
  std::size_t index;
  bool tp;
};

}  // namespace

GroundTruth GroundTruth::from_ring(const Ring& ring, std::string label) {
  return {Box::from_rect(ring_bounds(ring)), std::move(label), close_ring(ring)};
}

std::vector<GroundTruth> ground_truth_of(const TileAnnotation& tile) {
  std::vector<GroundTruth> out;
  out.reserve(tile.polygons.size());
  for (const LabeledRing& p : tile.polygons) out.push_back(GroundTruth::from_ring(p.ring, p.label));
  return out;
}

void MatchResult::merge(const MatchResult& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  pairs.insert(pairs.end(), other.pairs.begin(), other.pairs.end());
  for (const auto& [id, c] : other.per_tile) {
    TileCounts& t = per_tile[id];
    t.tp += c.tp;
    t.fp += c.fp;
    t.fn += c.fn;
  }
}

MatchResult match_detections(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                             double iou_thresh, IouMode mode, const std::string& tile_id) {
  if (mode == IouMode::mask) {
    for (const Detection& d : dets)
      if (!d.mask) throw Error(Errc::invalid_argument, "mask-mode matching needs detection masks");
    for (const GroundTruth& g : gts)
      if (!g.mask) throw Error(Errc::invalid_argument, "mask-mode matching needs ground-truth masks");
  }
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ranks_before(dets[a], dets[b]); });

  MatchResult m;
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t di : order) {
    std::size_t best = gts.size();
    double best_iou = -1.0;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (taken[gi]) continue;
      const double iou = pair_iou(dets[di], gts[gi], mode);
      if (iou >= iou_thresh && iou > best_iou) {
        best = gi;
        best_iou = iou;
      }
    }
    if (best < gts.size()) {
      taken[best] = true;
      m.pairs.push_back({tile_id, di, best, best_iou, dets[di].label == gts[best].label});
    }
  }
  m.tp = m.pairs.size();
  m.fp = dets.size() - m.tp;
  m.fn = gts.size() - m.tp;
  m.per_tile[tile_id] = {m.tp, m.fp, m.fn};
  return m;
}

MatchResult match_dataset(const std::vector<TileData>& tiles, double iou_thresh, IouMode mode) {
  MatchResult all;
  for (const TileData& t : tiles) all.merge(match_detections(t.dets, t.gts, iou_thresh, mode, t.tile_id));
  return all;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0 ? 2.0 * precision * recall / s : 0.0;
}

double classification_accuracy(const MatchResult& m) {
  if (m.pairs.empty()) return 0.0;
  const auto agree = std::count_if(m.pairs.begin(), m.pairs.end(),
                                   [](const MatchPair& p) { return p.labels_agree; });
  return double(agree) / double(m.pairs.size());
}

double classification_accuracy(const MatchResult& m, const std::vector<Detection>& dets,
                               const std::vector<GroundTruth>& gts) {
  if (m.pairs.empty()) return 0.0;
  std::size_t agree = 0;
  for (const MatchPair& p : m.pairs) {
    if (p.det >= dets.size() || p.gt >= gts.size()) {
      throw Error(Errc::invalid_argument, "match pair index out of range");
    }
    if (dets[p.det].label == gts[p.gt].label) ++agree;
  }
  return double(agree) / double(m.pairs.size());
}

Metrics precision_recall_f1(const MatchResult& m) {
  Metrics out;
  out.precision = m.tp + m.fp > 0 ? double(m.tp) / double(m.tp + m.fp) : 0.0;
  out.recall = m.tp + m.fn > 0 ? double(m.tp) / double(m.tp + m.fn) : 0.0;
  out.f1 = f1_score(out.precision, out.recall);
  out.ca = classification_accuracy(m);
  return out;
}

double integrate_envelope(const PRCurve& curve, Interpolation interp) {
  const auto& pts = curve.points;
  if (pts.empty()) return 0.0;
  std::vector<double> envelope(pts.size());
  double running = 0.0;
  for (std::size_t i = pts.size(); i-- > 0;) {
    running = std::max(running, pts[i].precision);
    envelope[i] = running;
  }
  if (interp == Interpolation::continuous) {
    double ap = 0.0, prev_recall = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      ap += (pts[i].recall - prev_recall) * envelope[i];
      prev_recall = pts[i].recall;
    }
    return ap;
  }
  double sum = 0.0;
  std::size_t k = 0;
  for (int t = 0; t <= 100; ++t) {
    const double r = t / 100.0;
    while (k < pts.size() && pts[k].recall < r) ++k;
    if (k < pts.size()) sum += envelope[k];
  }
  return sum / 101.0;
}

APResult average_precision(const std::vector<TileData>& tiles, double iou_thresh,
                           Interpolation interp, IouMode mode) {
  std::vector<RankedDet> ranked;
  std::size_t total_gt = 0;
  for (std::size_t ti = 0; ti < tiles.size(); ++ti) {
    const TileData& t = tiles[ti];
    total_gt += t.gts.size();
    const MatchResult m = match_detections(t.dets, t.gts, iou_thresh, mode, t.tile_id);
    std::vector<bool> tp(t.dets.size(), false);
    for (const MatchPair& p : m.pairs) tp[p.det] = true;
    for (std::size_t di = 0; di < t.dets.size(); ++di) ranked.push_back({&t.dets[di], ti, di, tp[di]});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [&](const RankedDet& a, const RankedDet& b) {
    if (a.det->score != b.det->score) return a.det->score > b.det->score;
    const std::string& ta = tiles[a.tile].tile_id;
    const std::string& tb = tiles[b.tile].tile_id;
    if (ta != tb) return ta < tb;
    return ranks_before(*a.det, *b.det);
  });

  APResult out;
  if (total_gt == 0) {
    for (const RankedDet& r : ranked) out.curve.points.push_back({0.0, 0.0, r.det->score});
    return out;
  }
  std::size_t ctp = 0, cfp = 0;
  out.curve.points.reserve(ranked.size());
  for (const RankedDet& r : ranked) {
    (r.tp ? ctp : cfp) += 1;
    out.curve.points.push_back(
        {double(ctp) / double(total_gt), double(ctp) / double(ctp + cfp), r.det->score});
  }
  out.ap = integrate_envelope(out.curve, interp);
  return out;
}

std::vector<double> coco_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.5 + 0.05 * i);
  return t;
}

double mean_average_precision(const std::vector<TileData>& tiles, MapMode mode, Interpolation interp,
                              IouMode iou_mode) {
  if (mode == MapMode::at50) return average_precision(tiles, 0.5, interp, iou_mode).ap;
  double sum = 0.0;
  const auto thresholds = coco_thresholds();
  for (double t : thresholds) sum += average_precision(tiles, t, interp, iou_mode).ap;
  return sum / double(thresholds.size());
}

}  // namespace treedet
