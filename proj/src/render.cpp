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

#include "treedet/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "text_util.hpp"

namespace treedet {

namespace {

// Rows top to bottom, 3 bits each (MSB = left column).
struct Glyph {
  char c;
  std::uint8_t rows[5];
};

constexpr Glyph kGlyphs[] = {
    {'0', {7, 5, 5, 5, 7}}, {'1', {2, 6, 2, 2, 7}}, {'2', {7, 1, 7, 4, 7}}, {'3', {7, 1, 7, 1, 7}},
    {'4', {5, 5, 7, 1, 1}}, {'5', {7, 4, 7, 1, 7}}, {'6', {7, 4, 7, 5, 7}}, {'7', {7, 1, 1, 1, 1}},
    {'8', {7, 5, 7, 5, 7}}, {'9', {7, 5, 7, 1, 7}}, {'.', {0, 0, 0, 0, 2}}, {'-', {0, 0, 7, 0, 0}},
    {'%', {5, 1, 2, 4, 5}},
};

const Glyph* find_glyph(char c) {
  for (const Glyph& g : kGlyphs)
    if (g.c == c) return &g;
  return nullptr;
}

void plot(Image& img, int x, int y, Rgb c) {
  if (!img.contains(x, y)) return;
  std::uint8_t* p = img.at(x, y);
  p[0] = c.r;
  p[1] = c.g;
  p[2] = c.b;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

void draw_line(Image& img, Vec2 a, Vec2 b, Rgb color) {
  int x0 = int(std::lround(a.x)), y0 = int(std::lround(a.y));
  const int x1 = int(std::lround(b.x)), y1 = int(std::lround(b.y));
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    plot(img, x0, y0, color);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void draw_ring(Image& img, const Ring& ring, Rgb color) {
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) draw_line(img, ring[i], ring[i + 1], color);
  if (ring.size() > 1 && !is_closed(ring)) draw_line(img, ring.back(), ring.front(), color);
}

void draw_box(Image& img, const Box& box, Rgb color) {
  draw_ring(img, {{box.x1, box.y1}, {box.x2, box.y1}, {box.x2, box.y2}, {box.x1, box.y2}, {box.x1, box.y1}},
            color);
}

void draw_text(Image& img, int x, int y, std::string_view text, Rgb color, int scale) {
  for (char c : text) {
    if (const Glyph* g = find_glyph(c)) {
      for (int row = 0; row < 5; ++row)
        for (int col = 0; col < 3; ++col)
          if (g->rows[row] & (4 >> col))
            for (int sy = 0; sy < scale; ++sy)
              for (int sx = 0; sx < scale; ++sx) plot(img, x + col * scale + sx, y + row * scale + sy, color);
    }
    x += 4 * scale;
  }
}

Image render_overlay(const Image& tile, const std::vector<GroundTruth>& gts,
                     const std::vector<Detection>& dets) {
  Image out = tile;
  for (const GroundTruth& g : gts) {
    if (g.mask) {
      draw_ring(out, *g.mask, kGroundTruthColor);
    } else {
      draw_box(out, g.box, kGroundTruthColor);
    }
  }
  for (const Detection& d : dets) {
    draw_box(out, d.box, kDetectionColor);
    if (d.mask) draw_ring(out, *d.mask, kDetectionColor);
    draw_text(out, int(d.box.x1) + 2, std::max(0, int(d.box.y1) - 12), fmt(d.score), kDetectionColor);
  }
  return out;
}

std::string pr_curve_csv(const PRCurve& curve) {
  std::string out = "recall,precision,threshold\n";
  for (const PRPoint& p : curve.points) {
    out += detail::format_double(p.recall) + "," + detail::format_double(p.precision) + "," +
           detail::format_double(p.threshold) + "\n";
  }
  return out;
}

std::string pr_curve_svg(const PRCurve& curve, std::string_view title) {
  constexpr double W = 480, H = 360, M = 40;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
    << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"" << H - 8 << "\" text-anchor=\"middle\" font-size=\"12\">recall</text>\n"
    << "<text x=\"12\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 12 " << H / 2
    << ")\">precision</text>\n";
  s << "<polyline fill=\"none\" stroke=\"" << kPalette[0] << "\" stroke-width=\"2\" points=\"";
  for (const PRPoint& p : curve.points) {
    s << M + p.recall * (W - 2 * M) << "," << (H - M) - p.precision * (H - 2 * M) << " ";
  }
  s << "\"/>\n</svg>\n";
  return s.str();
}

std::string loss_curve_csv(const std::vector<LossSeries>& series) {
  std::string out = "series,epoch,train_loss,val_loss,map\n";
  for (const LossSeries& ls : series) {
    for (const LossPoint& p : ls.points) {
      out += ls.label + "," + std::to_string(p.epoch) + "," + detail::format_double(p.train_loss) + "," +
             detail::format_double(p.val_loss) + "," + (p.map ? detail::format_double(*p.map) : "") + "\n";
    }
  }
  return out;
}

std::string loss_curve_svg(const std::vector<LossSeries>& series) {
  constexpr double W = 640, H = 400, M = 50;
  int max_epoch = 1;
  double max_loss = 1e-9;
  for (const LossSeries& ls : series) {
    for (const LossPoint& p : ls.points) {
      max_epoch = std::max(max_epoch, p.epoch);
      max_loss = std::max({max_loss, p.train_loss, p.val_loss});
    }
  }
  const auto px = [&](int epoch) { return M + double(epoch) / max_epoch * (W - 2 * M); };
  const auto py = [&](double loss) { return (H - M) - loss / max_loss * (H - 2 * M); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">epoch</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    const LossSeries& ls = series[i];
    s << "<g class=\"series\" data-label=\"" << ls.label << "\">\n";
    for (int which = 0; which < 2; ++which) {
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (which ? " stroke-dasharray=\"6 3\"" : "") << " points=\"";
      for (const LossPoint& p : ls.points) s << px(p.epoch) << "," << py(which ? p.val_loss : p.train_loss) << " ";
      s << "\"/>\n";
    }
    s << "<text x=\"" << W - M - 120 << "\" y=\"" << M + 16 * double(i) << "\" font-size=\"12\" fill=\"" << color
      << "\">" << ls.label << " (solid train, dashed val)</text>\n</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace treedet
