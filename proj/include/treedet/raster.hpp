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
#include <span>
#include <string>
#include <vector>

namespace treedet {

/// 8-bit interleaved RGB raster.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 3 bytes per pixel

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0);

  std::uint8_t* at(int x, int y) { return pixels.data() + (std::size_t(y) * width + x) * 3; }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (std::size_t(y) * width + x) * 3;
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  /// Copy of the window clamped to the image bounds.
  Image crop(int x, int y, int w, int h) const;
};

Image decode_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const Image& img);

/// Baseline TIFF, uncompressed, 8 bits per sample, chunky layout; 1, 3 or
/// 4 samples per pixel. Grayscale is expanded to RGB, extra samples dropped.
Image decode_tiff(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_tiff(const Image& img);

/// Dispatches on the file signature. Throws Errc::parse_error for anything
/// that is neither PNG nor baseline TIFF.
Image decode_raster(std::span<const std::uint8_t> bytes);
Image read_raster(const std::string& path);
void write_png(const std::string& path, const Image& img);

}  // namespace treedet
