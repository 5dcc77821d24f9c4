#pragma once

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "navkit/error.hpp"
#include "navkit/grid.hpp"

namespace navkit {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit RGB raster. Images rendered from a map remember which metric
/// window they show; images that came from elsewhere (goal photos) do not.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 3 bytes per pixel
  std::optional<Geometry> frame;

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {0, 0, 0}) : width(w), height(h), pixels(std::size_t(w) * h * 3) {
    for (std::size_t i = 0; i < std::size_t(w) * h; ++i) std::memcpy(&pixels[i * 3], fill.data(), 3);
  }

  bool contains(int row, int col) const { return row >= 0 && col >= 0 && row < height && col < width; }

  Rgb get(int row, int col) const {
    const auto* p = &pixels[(std::size_t(row) * width + col) * 3];
    return {p[0], p[1], p[2]};
  }
  void set(int row, int col, Rgb c) {
    if (!contains(row, col)) return;
    std::memcpy(&pixels[(std::size_t(row) * width + col) * 3], c.data(), 3);
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Decoded single-channel raster before any metric metadata is attached.
struct GrayRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;
};

struct MapMeta {
  double resolution = 0.05;
  WorldPoint origin{};
};

namespace detail {

inline bool skip_pnm_ws(std::span<const std::uint8_t> b, std::size_t& pos) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      return true;
    }
  }
  return false;
}

inline long read_pnm_int(std::span<const std::uint8_t> b, std::size_t& pos) {
  if (!skip_pnm_ws(b, pos) || !std::isdigit(b[pos])) throw Error(ErrorCode::DecodeError, "bad PNM header");
  long v = 0;
  while (pos < b.size() && std::isdigit(b[pos])) {
    v = v * 10 + (b[pos] - '0');
    if (v > 1'000'000) throw Error(ErrorCode::DecodeError, "PNM header value too large");
    ++pos;
  }
  return v;
}

}  // namespace detail

/// Binary PGM (P5), 8- or 16-bit. 16-bit samples are scaled down to 8 bits.
inline GrayRaster decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw Error(ErrorCode::DecodeError, "not a binary PGM");
  std::size_t pos = 2;
  GrayRaster r;
  r.width = int(detail::read_pnm_int(bytes, pos));
  r.height = int(detail::read_pnm_int(bytes, pos));
  long maxval = detail::read_pnm_int(bytes, pos);
  if (r.width <= 0 || r.height <= 0 || maxval <= 0 || maxval > 65535)
    throw Error(ErrorCode::DecodeError, "bad PGM dimensions");
  ++pos;  // single whitespace byte before the sample data
  std::size_t n = std::size_t(r.width) * r.height;
  std::size_t bps = maxval > 255 ? 2 : 1;
  if (bytes.size() < pos + n * bps) throw Error(ErrorCode::DecodeError, "truncated PGM data");
  r.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    long v = bps == 1 ? bytes[pos + i] : (long(bytes[pos + 2 * i]) << 8) | bytes[pos + 2 * i + 1];
    r.values[i] = std::uint8_t((v * 255 + maxval / 2) / maxval);
  }
  return r;
}

inline GrayRaster decode_png_gray(std::span<const std::uint8_t> bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
    throw Error(ErrorCode::DecodeError, std::string("png: ") + img.message);
  img.format = PNG_FORMAT_GRAY;
  GrayRaster r;
  r.width = int(img.width);
  r.height = int(img.height);
  r.values.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, r.values.data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(ErrorCode::DecodeError, std::string("png: ") + img.message);
  }
  return r;
}

inline RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
    throw Error(ErrorCode::DecodeError, std::string("png: ") + img.message);
  img.format = PNG_FORMAT_RGB;
  RgbImage out;
  out.width = int(img.width);
  out.height = int(img.height);
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(ErrorCode::DecodeError, std::string("png: ") + img.message);
  }
  return out;
}

/// Sniffs PGM vs PNG by magic bytes.
inline GrayRaster decode_gray(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t png_magic[4] = {0x89, 'P', 'N', 'G'};
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), png_magic, 4) == 0) return decode_png_gray(bytes);
  return decode_pgm(bytes);
}

inline std::vector<std::uint8_t> encode_png(const RgbImage& img) {
  png_image p;
  std::memset(&p, 0, sizeof p);
  p.version = PNG_IMAGE_VERSION;
  p.width = png_uint_32(img.width);
  p.height = png_uint_32(img.height);
  p.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&p, nullptr, &size, 0, img.pixels.data(), 0, nullptr))
    throw Error(ErrorCode::IoError, std::string("png encode: ") + p.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&p, out.data(), &size, 0, img.pixels.data(), 0, nullptr))
    throw Error(ErrorCode::IoError, std::string("png encode: ") + p.message);
  out.resize(size);
  return out;
}

inline std::vector<std::uint8_t> encode_pgm8(const GridMap& g) {
  std::string header = "P5\n" + std::to_string(g.width()) + " " + std::to_string(g.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), g.values().begin(), g.values().end());
  return out;
}

/// 16-bit big-endian PGM, used for label rasters.
inline std::vector<std::uint8_t> encode_pgm16(const LabelGrid& g) {
  std::string header = "P5\n" + std::to_string(g.width()) + " " + std::to_string(g.height()) + "\n65535\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + g.size() * 2);
  for (int v : g.values()) {
    auto u = std::uint16_t(std::clamp(v, 0, 65535));
    out.push_back(std::uint8_t(u >> 8));
    out.push_back(std::uint8_t(u & 0xff));
  }
  return out;
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline std::string base64_encode(std::span<const std::uint8_t> in) {
  static constexpr char tbl[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    std::uint32_t v = (std::uint32_t(in[i]) << 16) | (std::uint32_t(in[i + 1]) << 8) | in[i + 2];
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += tbl[(v >> 6) & 63];
    out += tbl[v & 63];
  }
  if (i + 1 == in.size()) {
    std::uint32_t v = std::uint32_t(in[i]) << 16;
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == in.size()) {
    std::uint32_t v = (std::uint32_t(in[i]) << 16) | (std::uint32_t(in[i + 1]) << 8);
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += tbl[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

/// Nearest-neighbour downscale so the longest side is at most max_side.
inline RgbImage cap_longest_side(const RgbImage& img, int max_side) {
  int longest = std::max(img.width, img.height);
  if (max_side <= 0 || longest <= max_side) return img;
  double s = double(max_side) / longest;
  int w = std::max(1, int(img.width * s)), h = std::max(1, int(img.height * s));
  RgbImage out(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      out.set(r, c, img.get(std::min(img.height - 1, int(r / s)), std::min(img.width - 1, int(c / s))));
  return out;
}

}  // namespace navkit
