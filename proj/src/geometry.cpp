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

#include "treedet/geometry.hpp"

#include <algorithm>
#include <limits>

namespace treedet {

double signed_area(const Ring& ring) {
  if (ring.size() < 3) return 0.0;
  // Anchor at the first vertex to keep the cross products small.
  const Vec2 o = ring.front();
  double twice = 0.0;
  for (std::size_t i = 1; i + 1 < ring.size(); ++i) {
    const double ax = ring[i].x - o.x, ay = ring[i].y - o.y;
    const double bx = ring[i + 1].x - o.x, by = ring[i + 1].y - o.y;
    twice += ax * by - bx * ay;
  }
  return 0.5 * twice;
}

double ring_area(const Ring& ring) {
  const double a = signed_area(ring);
  return a < 0 ? -a : a;
}

bool is_closed(const Ring& ring) {
  return !ring.empty() && ring.front() == ring.back();
}

Ring close_ring(Ring ring) {
  if (!ring.empty() && !(ring.front() == ring.back())) ring.push_back(ring.front());
  return ring;
}

Ring reversed(Ring ring) {
  std::reverse(ring.begin(), ring.end());
  return ring;
}

Rect ring_bounds(const Ring& ring) {
  if (ring.empty()) return {};
  Rect r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Vec2& v : ring) {
    r.x0 = std::min(r.x0, v.x);
    r.y0 = std::min(r.y0, v.y);
    r.x1 = std::max(r.x1, v.x);
    r.y1 = std::max(r.y1, v.y);
  }
  return r;
}

Ring translate(const Ring& ring, double dx, double dy) {
  Ring out;
  out.reserve(ring.size());
  for (const Vec2& v : ring) out.push_back({v.x + dx, v.y + dy});
  return out;
}

}  // namespace treedet
