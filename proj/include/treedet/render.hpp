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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "treedet/evalkit.hpp"
#include "treedet/raster.hpp"
#include "treedet/trainlog.hpp"

namespace treedet {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

inline constexpr Rgb kGroundTruthColor{40, 220, 60};
inline constexpr Rgb kDetectionColor{240, 40, 40};

void draw_line(Image& img, Vec2 a, Vec2 b, Rgb color);
void draw_ring(Image& img, const Ring& ring, Rgb color);
void draw_box(Image& img, const Box& box, Rgb color);
/// 3x5 bitmap digits, '.', '%' and '-'; other characters render as blanks.
void draw_text(Image& img, int x, int y, std::string_view text, Rgb color, int scale = 2);

/// Ground truth outlines in one colour, detection boxes and masks in
/// another, each detection labelled with its score.
Image render_overlay(const Image& tile, const std::vector<GroundTruth>& gts,
                     const std::vector<Detection>& dets);

std::string pr_curve_svg(const PRCurve& curve, std::string_view title);
std::string pr_curve_csv(const PRCurve& curve);
std::string loss_curve_svg(const std::vector<LossSeries>& series);
std::string loss_curve_csv(const std::vector<LossSeries>& series);

}  // namespace treedet
