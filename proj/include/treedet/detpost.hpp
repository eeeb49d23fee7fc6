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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treedet/geometry.hpp"

namespace treedet {

struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  bool valid() const { return x1 <= x2 && y1 <= y2; }

  static Box from_rect(const Rect& r) { return {r.x0, r.y0, r.x1, r.y1}; }
  friend bool operator==(const Box&, const Box&) = default;
};

struct Detection {
  Box box;
  double score = 0.0;
  std::string label;
  std::optional<Ring> mask;
};

/// Total order used everywhere detections are ranked: score descending,
/// then box coordinates, then label, so equal scores sort reproducibly.
bool ranks_before(const Detection& a, const Detection& b);
void sort_by_rank(std::vector<Detection>& dets);

struct AnchorSpec {
  std::vector<double> scales;
  std::vector<double> ratios;
  int stride = 32;

  /// Five scales between 10 and 130 px, square anchors, stride 32.
  static AnchorSpec defaults();
  /// Throws Errc::invalid_argument on unsorted/out-of-range scales,
  /// non-positive ratios or stride < 1.
  void validate(double min_scale = 10.0, double max_scale = 130.0) const;
};

/// `count` geometrically spaced values from lo to hi, rounded to integers.
std::vector<double> geometric_scales(double lo, double hi, int count);

struct FeatureMapShape {
  int width = 0;
  int height = 0;
  friend bool operator==(const FeatureMapShape&, const FeatureMapShape&) = default;
};

/// Ceiling division of the image by the backbone stride.
FeatureMapShape feature_map_shape(int img_w, int img_h, int stride);

/// One anchor per (cell, scale, ratio), cell-major, centred at
/// ((i + 0.5) * stride, (j + 0.5) * stride).
std::vector<Box> generate_anchors(int img_w, int img_h, const AnchorSpec& spec, bool clip = true);

double box_iou(const Box& a, const Box& b);

class BitMask {
 public:
  BitMask() = default;
  BitMask(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  bool get(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool on = true) { bits_[index(x, y)] = on ? 1 : 0; }
  std::size_t count() const;
  const std::vector<std::uint8_t>& bits() const { return bits_; }

 private:
  std::size_t index(int x, int y) const { return std::size_t(y) * std::size_t(width_) + std::size_t(x); }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Even-odd scanline fill sampled at pixel centres: pixel (i, j) is set iff
/// (i + 0.5, j + 0.5) lies inside the ring.
BitMask rasterize_polygon(const Ring& ring, int width, int height);

/// Throws Errc::invalid_argument when dimensions differ. Two empty masks
/// have IoU 0.
double mask_iou(const BitMask& a, const BitMask& b);

/// IoU of two polygons rasterized on a shared canvas covering both.
double polygon_iou(const Ring& a, const Ring& b);

/// Drops detections below `min_conf`, ranks the rest and keeps the first
/// `max_instances`.
std::vector<Detection> filter_detections(std::vector<Detection> dets, double min_conf,
                                         std::size_t max_instances);

/// Greedy NMS: a detection survives iff its box IoU with every
/// higher-ranked survivor is <= `iou_thresh`. Output is in rank order.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_thresh);

}  // namespace treedet
