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

#include <vector>

namespace treedet {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Closed vertex sequence: front() == back() once normalized.
using Ring = std::vector<Vec2>;

/// Axis-aligned rectangle [x0,x1] x [y0,y1].
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool degenerate() const { return !(x1 > x0) || !(y1 > y0); }
  bool intersects(const Rect& o) const {
    return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
  }
};

/// Shoelace area; negative for clockwise rings in a y-up frame.
double signed_area(const Ring& ring);
double ring_area(const Ring& ring);

bool is_closed(const Ring& ring);
/// Appends the first vertex when the ring is open. Empty rings stay empty.
Ring close_ring(Ring ring);
Ring reversed(Ring ring);

Rect ring_bounds(const Ring& ring);
Ring translate(const Ring& ring, double dx, double dy);

}  // namespace treedet
