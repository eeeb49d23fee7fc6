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

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "treedet/detpost.hpp"
#include "treedet/error.hpp"

using namespace treedet;

namespace {

Detection det(double x1, double y1, double x2, double y2, double s, std::string label = "coconut") {
  return {{x1, y1, x2, y2}, s, std::move(label), std::nullopt};
}

Ring rect_ring(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
}

bool same(const std::vector<Detection>& a, const std::vector<Detection>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i].box == b[i].box) || a[i].score != b[i].score || a[i].label != b[i].label) return false;
  return true;
}

}  // namespace

TEST_CASE("feature map shape uses ceiling division") {
  CHECK(feature_map_shape(1000, 1000, 32) == FeatureMapShape{32, 32});
  CHECK(feature_map_shape(1024, 1024, 32) == FeatureMapShape{32, 32});
  CHECK(feature_map_shape(800, 800, 32) == FeatureMapShape{25, 25});
  CHECK(feature_map_shape(33, 1, 32) == FeatureMapShape{2, 1});
  CHECK_THROWS_AS(feature_map_shape(10, 10, 0), Error);
}

TEST_CASE("anchor generation") {
  const AnchorSpec spec = AnchorSpec::defaults();
  CHECK(spec.scales == std::vector<double>{10, 19, 36, 69, 130});
  CHECK(spec.ratios == std::vector<double>{1.0});
  CHECK(spec.stride == 32);
  CHECK_NOTHROW(spec.validate());

  CHECK(generate_anchors(1000, 1000, spec).size() == 32 * 32 * 5);

  AnchorSpec one{{10}, {1.0}, 32};
  const auto a = generate_anchors(32, 32, one);
  REQUIRE(a.size() == 1);
  CHECK(a[0] == Box{11, 11, 21, 21});

  for (const Box& b : generate_anchors(1000, 1000, spec, false)) CHECK(b.width() == doctest::Approx(b.height()));

  AnchorSpec tall{{20}, {0.25}, 32};
  const Box t = generate_anchors(64, 64, tall, false)[0];
  CHECK(t.width() == doctest::Approx(10));
  CHECK(t.height() == doctest::Approx(40));

  // Clipping keeps anchors inside the image.
  for (const Box& b : generate_anchors(100, 100, spec)) {
    CHECK(b.x1 >= 0);
    CHECK(b.y1 >= 0);
    CHECK(b.x2 <= 100);
    CHECK(b.y2 <= 100);
  }
}

TEST_CASE("anchor spec validation") {
  CHECK_THROWS_AS((AnchorSpec{{10, 200}, {1.0}, 32}.validate()), Error);
  CHECK_THROWS_AS((AnchorSpec{{36, 19}, {1.0}, 32}.validate()), Error);
  CHECK_THROWS_AS((AnchorSpec{{10}, {0.0}, 32}.validate()), Error);
  CHECK_THROWS_AS((AnchorSpec{{10}, {1.0}, 0}.validate()), Error);
  CHECK_THROWS_AS((AnchorSpec{{}, {1.0}, 32}.validate()), Error);
}

TEST_CASE("geometric scales between the range ends") {
  const auto s = geometric_scales(10, 130, 5);
  REQUIRE(s.size() == 5);
  CHECK(s.front() == 10);
  CHECK(s.back() == 130);
  // 10 * 13^(3/4) = 68.46.
  CHECK(s == std::vector<double>{10, 19, 36, 68, 130});
}

TEST_CASE("box IoU") {
  const Box a{0, 0, 10, 10};
  CHECK(box_iou(a, a) == 1.0);
  CHECK(box_iou(a, Box{1, 1, 11, 11}) == doctest::Approx(81.0 / 119.0));
  CHECK(box_iou(a, Box{20, 20, 30, 30}) == 0.0);
  CHECK(box_iou(Box{0, 0, 0, 0}, Box{0, 0, 0, 0}) == 0.0);
  CHECK(box_iou(a, Box{10, 0, 20, 10}) == 0.0);

  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    const Box p = oracle::random_box(rng, 50, 0.5, 40), q = oracle::random_box(rng, 50, 0.5, 40);
    const double v = box_iou(p, q);
    CHECK(v == box_iou(q, p));
    CHECK(v >= 0);
    CHECK(v <= 1);
    CHECK(v == doctest::Approx(oracle::iou(p, q)).epsilon(1e-12));
    CHECK(box_iou(p, p) == 1.0);
  }
}

TEST_CASE("rasterization samples pixel centres") {
  CHECK(rasterize_polygon(rect_ring(0, 0, 10, 10), 20, 20).count() == 100);
  CHECK(rasterize_polygon({{0, 0}, {5, 5}, {10, 10}, {0, 0}}, 20, 20).count() == 0);
  CHECK(rasterize_polygon(rect_ring(0, 0, 20, 20), 20, 20).count() == 400);
  // Centre on the boundary: [0.5, 3.5) covers pixels 0..2.
  CHECK(rasterize_polygon(rect_ring(0.5, 0.5, 3.5, 3.5), 10, 10).count() == 9);
  CHECK(rasterize_polygon(rect_ring(-5, -5, 3, 3), 10, 10).count() == 9);

  // Even-odd: a square with a hole traced as one ring through a doubled bridge edge.
  const Ring holed{{0, 0}, {10, 0}, {10, 10}, {0, 10}, {0, 0}, {3, 3}, {3, 7}, {7, 7}, {7, 3}, {3, 3}, {0, 0}};
  const BitMask m = rasterize_polygon(holed, 10, 10);
  CHECK(m.count() == 84);
  CHECK(m.get(0, 0));
  CHECK_FALSE(m.get(5, 5));
}

TEST_CASE("mask IoU") {
  const BitMask sq = rasterize_polygon(rect_ring(0, 0, 10, 10), 20, 20);
  const BitMask half = rasterize_polygon(rect_ring(0, 0, 5, 10), 20, 20);
  const BitMask far = rasterize_polygon(rect_ring(12, 12, 18, 18), 20, 20);
  CHECK(mask_iou(sq, sq) == 1.0);
  CHECK(mask_iou(sq, half) == 0.5);
  CHECK(mask_iou(sq, far) == 0.0);
  CHECK(mask_iou(BitMask(5, 5), BitMask(5, 5)) == 0.0);
  CHECK_THROWS_AS(mask_iou(sq, BitMask(10, 20)), Error);
}

TEST_CASE("mask IoU of a polygon with itself is one") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 60);
  for (int i = 0; i < 200; ++i) {
    Ring r;
    for (int k = 0; k < 6; ++k) r.push_back({u(rng), u(rng)});
    r.push_back(r.front());
    if (rasterize_polygon(r, 64, 64).count() == 0) continue;
    const BitMask m = rasterize_polygon(r, 64, 64);
    CHECK(mask_iou(m, m) == 1.0);
    CHECK(polygon_iou(r, r) == 1.0);
  }
}

TEST_CASE("mask and box IoU agree on rectangles of at least 20 px") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> pos(0, 80), side(20, 60);
  for (int i = 0; i < 500; ++i) {
    const double ax = pos(rng), ay = pos(rng), bx = ax + pos(rng) / 4 - 10, by = ay + pos(rng) / 4 - 10;
    const Box a{ax, ay, ax + side(rng), ay + side(rng)};
    const Box b{bx, by, bx + side(rng), by + side(rng)};
    const double mi = polygon_iou(rect_ring(a.x1, a.y1, a.x2, a.y2), rect_ring(b.x1, b.y1, b.x2, b.y2));
    CHECK(std::abs(mi - box_iou(a, b)) <= 0.05);
  }
}

TEST_CASE("filter drops low scores, ranks and caps") {
  const auto one = filter_detections({det(0, 0, 1, 1, 0.95), det(0, 0, 1, 1, 0.85)}, 0.9, 100);
  REQUIRE(one.size() == 1);
  CHECK(one[0].score == 0.95);

  std::vector<Detection> many;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> s(0.9, 1.0);
  for (int i = 0; i < 150; ++i) many.push_back(det(i, 0, i + 5, 5, s(rng)));
  const auto top = filter_detections(many, 0.9, 100);
  REQUIRE(top.size() == 100);
  std::vector<double> scores;
  for (const Detection& d : many) scores.push_back(d.score);
  std::sort(scores.rbegin(), scores.rend());
  for (std::size_t i = 0; i < 100; ++i) CHECK(top[i].score == scores[i]);

  CHECK(filter_detections({}, 0.9, 100).empty());
  CHECK(same(filter_detections(top, 0.9, 100), top));
  CHECK(filter_detections({det(0, 0, 1, 1, 0.9)}, 0.9, 1).size() == 1);
  CHECK(filter_detections({det(0, 0, 1, 1, 0.9)}, 0.9, 0).empty());
}

TEST_CASE("ties are broken by box coordinates") {
  const auto r = filter_detections({det(5, 0, 6, 1, 0.9), det(1, 3, 2, 4, 0.9), det(1, 2, 2, 3, 0.9)}, 0, 10);
  CHECK(r[0].box.x1 == 1);
  CHECK(r[0].box.y1 == 2);
  CHECK(r[1].box.y1 == 3);
  CHECK(r[2].box.x1 == 5);
}

TEST_CASE("NMS examples") {
  const auto kept = nms({det(1, 1, 11, 11, 0.90), det(20, 20, 30, 30, 0.80), det(0, 0, 10, 10, 0.95)}, 0.5);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].score == 0.95);
  CHECK(kept[1].score == 0.80);

  CHECK(nms({det(0, 0, 10, 10, 0.5)}, 0.3).size() == 1);
  const std::vector<Detection> disjoint{det(0, 0, 1, 1, 0.9), det(2, 2, 3, 3, 0.8), det(4, 4, 5, 5, 0.7)};
  CHECK(same(nms(disjoint, 0.3), disjoint));

  const auto dup = nms({det(0, 0, 10, 10, 0.95), det(0, 0, 10, 10, 0.94)}, 0.3);
  REQUIRE(dup.size() == 1);
  CHECK(dup[0].score == 0.95);
}

TEST_CASE("NMS matches the reference and satisfies the certificate") {
  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<int> n(0, 20), step(1, 10);
  std::uniform_real_distribution<double> th(0.1, 0.9);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Detection> dets;
    const int k = n(rng);
    for (int i = 0; i < k; ++i) dets.push_back({oracle::random_box(rng, 40, 3, 25), step(rng) / 10.0, "c", {}});
    const double t = th(rng);
    const auto got = nms(dets, t);
    CHECK(same(got, oracle::reference_nms(dets, t)));
    for (std::size_t i = 0; i < got.size(); ++i)
      for (std::size_t j = i + 1; j < got.size(); ++j) CHECK(box_iou(got[i].box, got[j].box) <= t);
  }
}
