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

#include "treedet/detpost.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "treedet/error.hpp"

namespace treedet {

bool ranks_before(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.box.x1, a.box.y1, a.box.x2, a.box.y2, a.label) <
         std::tie(b.box.x1, b.box.y1, b.box.x2, b.box.y2, b.label);
}

void sort_by_rank(std::vector<Detection>& dets) {
  std::stable_sort(dets.begin(), dets.end(), ranks_before);
}

AnchorSpec AnchorSpec::defaults() { return {{10, 19, 36, 69, 130}, {1.0}, 32}; }

void AnchorSpec::validate(double min_scale, double max_scale) const {
  if (scales.empty()) throw Error(Errc::invalid_argument, "anchor spec has no scales");
  if (ratios.empty()) throw Error(Errc::invalid_argument, "anchor spec has no ratios");
  if (!std::is_sorted(scales.begin(), scales.end())) {
    throw Error(Errc::invalid_argument, "anchor scales must be sorted ascending");
  }
  if (scales.front() < min_scale || scales.back() > max_scale) {
    throw Error(Errc::invalid_argument, "anchor scales must lie within the configured range");
  }
  for (double r : ratios)
    if (!(r > 0.0)) throw Error(Errc::invalid_argument, "anchor ratios must be positive");
  if (stride < 1) throw Error(Errc::invalid_argument, "anchor stride must be >= 1");
}

std::vector<double> geometric_scales(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0) || !(hi >= lo)) {
    throw Error(Errc::invalid_argument, "geometric_scales needs count >= 1 and 0 < lo <= hi");
  }
  std::vector<double> out;
  if (count == 1) return {std::round(lo)};
  const double step = std::pow(hi / lo, 1.0 / (count - 1));
  for (int i = 0; i < count; ++i) out.push_back(std::round(lo * std::pow(step, i)));
  return out;
}

FeatureMapShape feature_map_shape(int img_w, int img_h, int stride) {
  if (stride < 1) throw Error(Errc::invalid_argument, "stride must be >= 1");
  if (img_w < 0 || img_h < 0) throw Error(Errc::invalid_argument, "image size must be >= 0");
  return {(img_w + stride - 1) / stride, (img_h + stride - 1) / stride};
}

std::vector<Box> generate_anchors(int img_w, int img_h, const AnchorSpec& spec, bool clip) {
  if (spec.stride < 1) throw Error(Errc::invalid_argument, "anchor stride must be >= 1");
  for (double r : spec.ratios)
    if (!(r > 0.0)) throw Error(Errc::invalid_argument, "anchor ratios must be positive");
  const FeatureMapShape fm = feature_map_shape(img_w, img_h, spec.stride);
  std::vector<Box> anchors;
  anchors.reserve(std::size_t(fm.width) * std::size_t(fm.height) * spec.scales.size() *
                  spec.ratios.size());
  for (int j = 0; j < fm.height; ++j) {
    const double cy = (j + 0.5) * spec.stride;
    for (int i = 0; i < fm.width; ++i) {
      const double cx = (i + 0.5) * spec.stride;
      for (double s : spec.scales) {
        for (double r : spec.ratios) {
          const double hw = 0.5 * s * std::sqrt(r);
          const double hh = 0.5 * s / std::sqrt(r);
          Box b{cx - hw, cy - hh, cx + hw, cy + hh};
          if (clip) {
            b.x1 = std::clamp(b.x1, 0.0, double(img_w));
            b.x2 = std::clamp(b.x2, 0.0, double(img_w));
            b.y1 = std::clamp(b.y1, 0.0, double(img_h));
            b.y2 = std::clamp(b.y2, 0.0, double(img_h));
          }
          anchors.push_back(b);
        }
      }
    }
  }
  return anchors;
}

double box_iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

BitMask::BitMask(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw Error(Errc::invalid_argument, "mask dimensions must be >= 0");
  bits_.assign(std::size_t(width) * std::size_t(height), 0);
}

std::size_t BitMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BitMask rasterize_polygon(const Ring& ring, int width, int height) {
  BitMask mask(width, height);
  const Ring r = close_ring(ring);
  if (r.size() < 4) return mask;
  std::vector<double> xs;
  for (int j = 0; j < height; ++j) {
    const double y = j + 0.5;
    xs.clear();
    for (std::size_t k = 0; k + 1 < r.size(); ++k) {
      const Vec2 a = r[k], b = r[k + 1];
      if ((a.y <= y) != (b.y <= y)) xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Centres i + 0.5 in [x_in, x_out).
      const long lo = std::max(0L, static_cast<long>(std::ceil(xs[k] - 0.5)));
      const long hi = std::min<long>(width, static_cast<long>(std::ceil(xs[k + 1] - 0.5)));
      for (long i = lo; i < hi; ++i) mask.set(int(i), j);
    }
  }
  return mask;
}

double mask_iou(const BitMask& a, const BitMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(Errc::invalid_argument, "mask dimensions differ");
  }
  std::size_t inter = 0, uni = 0;
  const auto& ab = a.bits();
  const auto& bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    inter += ab[i] & bb[i];
    uni += ab[i] | bb[i];
  }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

double polygon_iou(const Ring& a, const Ring& b) {
  if (a.size() < 3 || b.size() < 3) return 0.0;
  const Rect ra = ring_bounds(a), rb = ring_bounds(b);
  const double x0 = std::floor(std::min(ra.x0, rb.x0));
  const double y0 = std::floor(std::min(ra.y0, rb.y0));
  const int w = static_cast<int>(std::ceil(std::max(ra.x1, rb.x1)) - x0);
  const int h = static_cast<int>(std::ceil(std::max(ra.y1, rb.y1)) - y0);
  if (w <= 0 || h <= 0) return 0.0;
  return mask_iou(rasterize_polygon(translate(a, -x0, -y0), w, h),
                  rasterize_polygon(translate(b, -x0, -y0), w, h));
}

std::vector<Detection> filter_detections(std::vector<Detection> dets, double min_conf,
                                         std::size_t max_instances) {
  std::erase_if(dets, [&](const Detection& d) { return d.score < min_conf; });
  sort_by_rank(dets);
  if (dets.size() > max_instances) dets.resize(max_instances);
  return dets;
}

std::vector<Detection> nms(std::vector<Detection> dets, double iou_thresh) {
  sort_by_rank(dets);
  std::vector<Detection> kept;
  kept.reserve(dets.size());
  for (Detection& d : dets) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return box_iou(k.box, d.box) > iou_thresh;
    });
    if (!suppressed) kept.push_back(std::move(d));
  }
  return kept;
}

}  // namespace treedet
