#pragma once

// Raster annotation for the reasoning prompts and for result artifacts.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "navkit/gridmap.hpp"
#include "navkit/image_io.hpp"
#include "navkit/nodes.hpp"
#include "navkit/rooms.hpp"

namespace navkit {

namespace colors {
inline constexpr Rgb white{255, 255, 255};
inline constexpr Rgb label{255, 215, 0};
inline constexpr Rgb node{0, 200, 0};
inline constexpr Rgb blue{0, 0, 255};
inline constexpr Rgb red{255, 0, 0};
inline constexpr Rgb path{0, 160, 255};
inline constexpr Rgb start{0, 255, 0};
inline constexpr Rgb target{255, 0, 255};
}  // namespace colors

namespace detail {

// 5x7 digit bitmaps, one byte per row, low 5 bits used (MSB = leftmost).
inline constexpr std::array<std::array<std::uint8_t, 7>, 10> kDigits = {{
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},
}};

}  // namespace detail

inline constexpr int kGlyphW = 5, kGlyphH = 7, kGlyphGap = 1;

inline int text_width(std::string_view digits, int scale) {
  if (digits.empty()) return 0;
  return int(digits.size()) * (kGlyphW + kGlyphGap) * scale - kGlyphGap * scale;
}

/// Draws a decimal number centred on (row, col). Non-digit characters are skipped.
inline void draw_number(RgbImage& img, std::string_view digits, int row, int col, Rgb color, int scale = 1) {
  int x0 = col - text_width(digits, scale) / 2;
  int y0 = row - kGlyphH * scale / 2;
  for (char ch : digits) {
    if (ch < '0' || ch > '9') continue;
    const auto& g = detail::kDigits[std::size_t(ch - '0')];
    for (int gy = 0; gy < kGlyphH; ++gy)
      for (int gx = 0; gx < kGlyphW; ++gx) {
        if (!((g[std::size_t(gy)] >> (kGlyphW - 1 - gx)) & 1)) continue;
        for (int sy = 0; sy < scale; ++sy)
          for (int sx = 0; sx < scale; ++sx) img.set(y0 + gy * scale + sy, x0 + gx * scale + sx, color);
      }
    x0 += (kGlyphW + kGlyphGap) * scale;
  }
}

inline void draw_circle(RgbImage& img, double row, double col, double radius, Rgb color, double thickness = 1.0) {
  int r0 = int(std::floor(row - radius - thickness)), r1 = int(std::ceil(row + radius + thickness));
  int c0 = int(std::floor(col - radius - thickness)), c1 = int(std::ceil(col + radius + thickness));
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) {
      double d = std::hypot(r + 0.5 - row, c + 0.5 - col);
      if (std::abs(d - radius) <= thickness * 0.5 + 0.5) img.set(r, c, color);
    }
}

inline void draw_disc(RgbImage& img, double row, double col, double radius, Rgb color) {
  for (int r = int(std::floor(row - radius)); r <= int(std::ceil(row + radius)); ++r)
    for (int c = int(std::floor(col - radius)); c <= int(std::ceil(col + radius)); ++c)
      if (std::hypot(r + 0.5 - row, c + 0.5 - col) <= radius) img.set(r, c, color);
}

inline int glyph_scale_for(int width, int height) { return std::max(1, std::min(width, height) / 80); }

/// Grayscale map as RGB with the map's own geometry attached.
inline RgbImage render_map(const GridMap& map) {
  RgbImage img(map.width(), map.height());
  for (int r = 0; r < map.height(); ++r)
    for (int c = 0; c < map.width(); ++c) {
      auto v = map(r, c);
      img.set(r, c, {v, v, v});
    }
  img.frame = map.geometry();
  return img;
}

/// Labeled cells that have a 4-neighbour carrying a different positive label.
inline BinaryMask region_boundaries(const LabelGrid& labels) {
  BinaryMask out(labels.geometry());
  for (int r = 0; r < labels.height(); ++r)
    for (int c = 0; c < labels.width(); ++c) {
      int v = labels(r, c);
      if (v <= 0) continue;
      for (int k = 0; k < 4; ++k) {
        CellIndex n{r + kDy4[k], c + kDx4[k]};
        if (labels.contains(n) && labels[n] > 0 && labels[n] != v) {
          out(r, c) = true;
          break;
        }
      }
    }
  return out;
}

/// M(R): white region boundaries and each room id at its centroid.
inline RgbImage render_room_map(const GridMap& map, const RoomSegmentation& seg) {
  RgbImage img = render_map(map);
  BinaryMask b = region_boundaries(seg.labels);
  for (int r = 0; r < b.height(); ++r)
    for (int c = 0; c < b.width(); ++c)
      if (b(r, c)) img.set(r, c, colors::white);
  int scale = glyph_scale_for(map.width(), map.height());
  for (const auto& reg : seg.regions) {
    if (reg.area == 0) continue;
    CellIndex c = map.geometry().cell(reg.centroid);
    draw_number(img, std::to_string(reg.id), c.row, c.col, colors::label, scale);
  }
  return img;
}

inline CellRect expand_rect(const CellRect& r, int margin, const Geometry& g) {
  return {std::max(0, r.row_min - margin), std::max(0, r.col_min - margin), std::min(g.height - 1, r.row_max + margin),
          std::min(g.width - 1, r.col_max + margin)};
}

inline RgbImage crop(const RgbImage& img, const CellRect& rect) {
  RgbImage out(rect.cols(), rect.rows());
  for (int r = 0; r < rect.rows(); ++r)
    for (int c = 0; c < rect.cols(); ++c) out.set(r, c, img.get(rect.row_min + r, rect.col_min + c));
  if (img.frame) {
    Geometry g = *img.frame;
    g.origin = {g.origin.x + rect.col_min * g.resolution, g.origin.y + rect.row_min * g.resolution};
    g.width = rect.cols();
    g.height = rect.rows();
    out.frame = g;
  }
  return out;
}

struct NodeMapImages {
  RgbImage plain;      // M_{r*}
  RgbImage annotated;  // M_{r*}(N)
  CellRect window;
};

/// Cropped view of a room with and without numbered node markers.
inline NodeMapImages render_node_map(const GridMap& map, const CellRect& room_bbox, const NodeSet& nodes,
                                     int margin_cells = 5) {
  CellRect win = expand_rect(room_bbox, margin_cells, map.geometry());
  RgbImage full = render_map(map);
  NodeMapImages out{crop(full, win), {}, win};
  out.annotated = out.plain;
  int scale = glyph_scale_for(win.cols(), win.rows());
  for (const auto& n : nodes.nodes) {
    int r = n.cell.row - win.row_min, c = n.cell.col - win.col_min;
    if (!out.annotated.contains(r, c)) continue;
    out.annotated.set(r, c, colors::node);
    draw_number(out.annotated, std::to_string(n.id), r - (kGlyphH * scale) / 2 - 1, c, colors::label, scale);
  }
  return out;
}

/// Window of +-margin around a world point with a coloured circle on it.
inline RgbImage render_marker_crop(const GridMap& map, WorldPoint p, double margin_m, Rgb color) {
  const Geometry& g = map.geometry();
  CellIndex c = g.cell(p);
  int m = std::max(1, int(std::round(margin_m / g.resolution)));
  CellRect win = expand_rect({c.row, c.col, c.row, c.col}, m, g);
  RgbImage out = crop(render_map(map), win);
  double radius = std::max(2.0, 0.25 / g.resolution);
  draw_circle(out, g.fy(p) - win.row_min, g.fx(p) - win.col_min, radius, color, 1.0);
  return out;
}

/// Centroid (world) of pixels of exactly `color` in a framed image.
inline std::optional<WorldPoint> find_marker(const RgbImage& img, Rgb color) {
  if (!img.frame) return std::nullopt;
  double sr = 0, sc = 0;
  std::size_t n = 0;
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c)
      if (img.get(r, c) == color) {
        sr += r + 0.5;
        sc += c + 0.5;
        ++n;
      }
  if (n == 0) return std::nullopt;
  const Geometry& g = *img.frame;
  return WorldPoint{g.origin.x + sc / n * g.resolution, g.origin.y + sr / n * g.resolution};
}

/// Result overlay: region boundaries, nodes, the executed trajectory, start and target.
inline RgbImage render_overlay(const GridMap& map, const RoomSegmentation* seg, const NodeSet* nodes,
                               const std::vector<WorldPoint>& trajectory, const WorldPoint* target) {
  RgbImage img = seg ? render_room_map(map, *seg) : render_map(map);
  const Geometry& g = map.geometry();
  if (nodes)
    for (const auto& n : nodes->nodes) img.set(n.cell.row, n.cell.col, colors::node);
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    WorldPoint a = trajectory[i - 1], b = trajectory[i];
    int steps = std::max(1, int(std::ceil(distance(a, b) / (0.5 * g.resolution))));
    for (int s = 0; s <= steps; ++s) {
      double t = double(s) / steps;
      CellIndex c = g.cell({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
      img.set(c.row, c.col, colors::path);
    }
  }
  if (!trajectory.empty()) {
    CellIndex s = g.cell(trajectory.front());
    draw_disc(img, s.row + 0.5, s.col + 0.5, 2.0, colors::start);
  }
  if (target) draw_circle(img, g.fy(*target), g.fx(*target), std::max(2.0, 0.25 / g.resolution), colors::target);
  return img;
}

}  // namespace navkit
