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

#include "treedet/raster.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>

#include "text_util.hpp"
#include "treedet/error.hpp"

namespace treedet {

namespace {

constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

class TiffReader {
 public:
  explicit TiffReader(std::span<const std::uint8_t> b) : b_(b) {
    if (b_.size() < 8) throw Error(Errc::parse_error, "TIFF too short");
    if (b_[0] == 'I' && b_[1] == 'I') {
      le_ = true;
    } else if (b_[0] == 'M' && b_[1] == 'M') {
      le_ = false;
    } else {
      throw Error(Errc::parse_error, "not a TIFF byte-order mark");
    }
    if (u16(2) != 42) throw Error(Errc::parse_error, "TIFF magic 42 missing");
  }

  std::uint16_t u16(std::size_t off) const {
    need(off, 2);
    return le_ ? std::uint16_t(b_[off] | (b_[off + 1] << 8)) : std::uint16_t((b_[off] << 8) | b_[off + 1]);
  }
  std::uint32_t u32(std::size_t off) const {
    need(off, 4);
    if (le_) {
      return std::uint32_t(b_[off]) | (std::uint32_t(b_[off + 1]) << 8) |
             (std::uint32_t(b_[off + 2]) << 16) | (std::uint32_t(b_[off + 3]) << 24);
    }
    return (std::uint32_t(b_[off]) << 24) | (std::uint32_t(b_[off + 1]) << 16) |
           (std::uint32_t(b_[off + 2]) << 8) | std::uint32_t(b_[off + 3]);
  }
  void need(std::size_t off, std::size_t n) const {
    if (off > b_.size() || n > b_.size() - off) {
      throw Error(Errc::truncated, "TIFF read past end at offset " + std::to_string(off));
    }
  }
  std::span<const std::uint8_t> bytes() const { return b_; }

  // Values of a SHORT or LONG tag as 32-bit integers.
  std::vector<std::uint32_t> values(std::size_t entry) const {
    const std::uint16_t type = u16(entry + 2);
    const std::uint32_t count = u32(entry + 4);
    const std::size_t width = type == 3 ? 2 : type == 4 ? 4 : 0;
    if (width == 0) throw Error(Errc::parse_error, "unsupported TIFF tag type " + std::to_string(type));
    std::size_t off = entry + 8;
    if (std::size_t(count) * width > 4) off = u32(entry + 8);
    need(off, std::size_t(count) * width);
    std::vector<std::uint32_t> out(count);
    for (std::uint32_t i = 0; i < count; ++i) out[i] = width == 2 ? u16(off + i * 2) : u32(off + i * 4);
    return out;
  }

 private:
  std::span<const std::uint8_t> b_;
  bool le_ = true;
};

void put16(std::vector<std::uint8_t>& o, std::uint16_t v) {
  o.push_back(std::uint8_t(v & 0xFF));
  o.push_back(std::uint8_t(v >> 8));
}
void put32(std::vector<std::uint8_t>& o, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) o.push_back(std::uint8_t((v >> (8 * i)) & 0xFF));
}

}  // namespace

Image::Image(int w, int h, std::uint8_t fill) : width(w), height(h) {
  if (w < 0 || h < 0) throw Error(Errc::invalid_argument, "image dimensions must be >= 0");
  pixels.assign(std::size_t(w) * std::size_t(h) * 3, fill);
}

Image Image::crop(int x, int y, int w, int h) const {
  const int x0 = std::clamp(x, 0, width), y0 = std::clamp(y, 0, height);
  const int x1 = std::clamp(x + w, 0, width), y1 = std::clamp(y + h, 0, height);
  Image out(x1 - x0, y1 - y0);
  for (int r = y0; r < y1; ++r) {
    std::memcpy(out.at(0, r - y0), at(x0, r), std::size_t(x1 - x0) * 3);
  }
  return out;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw Error(Errc::parse_error, std::string("PNG decode failed: ") + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  Image out(int(img.width), int(img.height));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw Error(Errc::parse_error, "PNG decode failed: " + msg);
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const Image& src) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = png_uint_32(src.width);
  img.height = png_uint_32(src.height);
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, src.pixels.data(), 0, nullptr)) {
    throw Error(Errc::io, std::string("PNG encode failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, src.pixels.data(), 0, nullptr)) {
    throw Error(Errc::io, std::string("PNG encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

Image decode_tiff(std::span<const std::uint8_t> bytes) {
  const TiffReader r(bytes);
  const std::size_t ifd = r.u32(4);
  const std::uint16_t n = r.u16(ifd);
  std::uint32_t width = 0, height = 0, compression = 1, photometric = 2, samples = 1;
  std::uint32_t planar = 1, rows_per_strip = 0xFFFFFFFFu;
  std::vector<std::uint32_t> bits{8}, offsets, counts;
  for (std::uint16_t i = 0; i < n; ++i) {
    const std::size_t e = ifd + 2 + std::size_t(i) * 12;
    const std::uint16_t tag = r.u16(e);
    switch (tag) {
      case 256: width = r.values(e).at(0); break;
      case 257: height = r.values(e).at(0); break;
      case 258: bits = r.values(e); break;
      case 259: compression = r.values(e).at(0); break;
      case 262: photometric = r.values(e).at(0); break;
      case 273: offsets = r.values(e); break;
      case 277: samples = r.values(e).at(0); break;
      case 278: rows_per_strip = r.values(e).at(0); break;
      case 279: counts = r.values(e); break;
      case 284: planar = r.values(e).at(0); break;
      default: break;
    }
  }
  if (compression != 1) throw Error(Errc::parse_error, "only uncompressed TIFF is supported");
  if (planar != 1) throw Error(Errc::parse_error, "only chunky (contiguous) TIFF is supported");
  if (samples != 1 && samples != 3 && samples != 4) {
    throw Error(Errc::parse_error, "unsupported TIFF samples per pixel " + std::to_string(samples));
  }
  for (std::uint32_t b : bits)
    if (b != 8) throw Error(Errc::parse_error, "only 8-bit TIFF samples are supported");
  if (width == 0 || height == 0 || offsets.empty() || offsets.size() != counts.size()) {
    throw Error(Errc::parse_error, "TIFF is missing size or strip tags");
  }
  if (rows_per_strip == 0 || rows_per_strip > height) rows_per_strip = height;
  const std::size_t row_bytes = std::size_t(width) * samples;
  Image out{int(width), int(height)};
  std::uint32_t row = 0;
  for (std::size_t s = 0; s < offsets.size() && row < height; ++s) {
    const std::uint32_t rows = std::min(rows_per_strip, height - row);
    r.need(offsets[s], row_bytes * rows);
    const std::uint8_t* src = bytes.data() + offsets[s];
    for (std::uint32_t k = 0; k < rows; ++k, ++row) {
      const std::uint8_t* line = src + std::size_t(k) * row_bytes;
      for (std::uint32_t x = 0; x < width; ++x) {
        std::uint8_t* px = out.at(int(x), int(row));
        if (samples == 1) {
          const std::uint8_t g = photometric == 0 ? std::uint8_t(255 - line[x]) : line[x];
          px[0] = px[1] = px[2] = g;
        } else {
          std::memcpy(px, line + std::size_t(x) * samples, 3);
        }
      }
    }
  }
  if (row < height) throw Error(Errc::truncated, "TIFF strips cover fewer rows than ImageLength");
  return out;
}

std::vector<std::uint8_t> encode_tiff(const Image& img) {
  // Little-endian, one strip, RGB. Layout: header, IFD, bits-per-sample, pixels.
  constexpr std::uint16_t kEntries = 10;
  const std::uint32_t ifd_off = 8;
  const std::uint32_t ifd_size = 2 + kEntries * 12 + 4;
  const std::uint32_t bps_off = ifd_off + ifd_size;
  const std::uint32_t data_off = bps_off + 6;
  const std::uint32_t data_size = std::uint32_t(img.pixels.size());
  std::vector<std::uint8_t> o;
  o.reserve(data_off + data_size);
  o.push_back('I');
  o.push_back('I');
  put16(o, 42);
  put32(o, ifd_off);
  put16(o, kEntries);
  const auto entry = [&](std::uint16_t tag, std::uint16_t type, std::uint32_t count, std::uint32_t value) {
    put16(o, tag);
    put16(o, type);
    put32(o, count);
    if (type == 3 && count == 1) {
      put16(o, std::uint16_t(value));
      put16(o, 0);
    } else {
      put32(o, value);
    }
  };
  entry(256, 4, 1, std::uint32_t(img.width));
  entry(257, 4, 1, std::uint32_t(img.height));
  entry(258, 3, 3, bps_off);
  entry(259, 3, 1, 1);
  entry(262, 3, 1, 2);
  entry(273, 4, 1, data_off);
  entry(277, 3, 1, 3);
  entry(278, 4, 1, std::uint32_t(img.height));
  entry(279, 4, 1, data_size);
  entry(284, 3, 1, 1);
  put32(o, 0);
  put16(o, 8);
  put16(o, 8);
  put16(o, 8);
  o.insert(o.end(), img.pixels.begin(), img.pixels.end());
  return o;
}

Image decode_raster(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) return decode_png(bytes);
  if (bytes.size() >= 4 && ((bytes[0] == 'I' && bytes[1] == 'I') || (bytes[0] == 'M' && bytes[1] == 'M'))) {
    return decode_tiff(bytes);
  }
  throw Error(Errc::parse_error, "raster is neither PNG nor baseline TIFF");
}

Image read_raster(const std::string& path) {
  const auto bytes = detail::read_binary_file(path);
  try {
    return decode_raster(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void write_png(const std::string& path, const Image& img) {
  detail::write_binary_file(path, encode_png(img));
}

}  // namespace treedet
