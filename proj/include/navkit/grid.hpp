#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

#include "navkit/error.hpp"
#include "navkit/geometry.hpp"

namespace navkit {

/// Metric frame shared by every raster derived from one map.
///
/// Cell (row, col) covers world x in [origin.x + col*res, origin.x + (col+1)*res)
/// and y in [origin.y + row*res, origin.y + (row+1)*res). Row 0 is the first
/// raster line, so y grows downward in image space.
struct Geometry {
  int width = 0;
  int height = 0;
  double resolution = 1.0;
  WorldPoint origin{};

  std::size_t size() const { return std::size_t(width) * std::size_t(height); }

  bool contains(CellIndex c) const {
    return c.row >= 0 && c.col >= 0 && c.row < height && c.col < width;
  }

  std::size_t index(CellIndex c) const { return std::size_t(c.row) * width + std::size_t(c.col); }

  CellIndex cell_at(std::size_t i) const { return {int(i / width), int(i % width)}; }

  WorldPoint world(CellIndex c) const {
    return {origin.x + (c.col + 0.5) * resolution, origin.y + (c.row + 0.5) * resolution};
  }

  CellIndex cell(WorldPoint p) const {
    return {int(std::floor((p.y - origin.y) / resolution)),
            int(std::floor((p.x - origin.x) / resolution))};
  }

  /// Continuous cell coordinates (col, row) measured from the raster corner.
  double fx(WorldPoint p) const { return (p.x - origin.x) / resolution; }
  double fy(WorldPoint p) const { return (p.y - origin.y) / resolution; }

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

/// Dense row-major raster. bool grids are stored as bytes so they stay
/// addressable through spans.
template <typename T>
class Grid {
 public:
  using value_type = T;
  using storage_type = std::conditional_t<std::is_same_v<T, bool>, std::uint8_t, T>;

  Grid() = default;

  explicit Grid(const Geometry& geo, T fill = T{}) : geo_(geo) {
    if (geo.width <= 0 || geo.height <= 0)
      throw Error(ErrorCode::InvalidArgument, "grid dimensions must be positive");
    if (!(geo.resolution > 0.0)) throw Error(ErrorCode::BadMetadata, "resolution must be > 0");
    data_.assign(geo.size(), storage_type(fill));
  }

  template <typename U>
  static Grid like(const Grid<U>& other, T fill = T{}) {
    return Grid(other.geometry(), fill);
  }

  const Geometry& geometry() const { return geo_; }
  int width() const { return geo_.width; }
  int height() const { return geo_.height; }
  double resolution() const { return geo_.resolution; }
  std::size_t size() const { return data_.size(); }
  bool contains(CellIndex c) const { return geo_.contains(c); }

  storage_type& operator()(int row, int col) { return data_[std::size_t(row) * geo_.width + col]; }
  const storage_type& operator()(int row, int col) const {
    return data_[std::size_t(row) * geo_.width + col];
  }
  storage_type& operator[](CellIndex c) { return data_[geo_.index(c)]; }
  const storage_type& operator[](CellIndex c) const { return data_[geo_.index(c)]; }
  storage_type& at_index(std::size_t i) { return data_[i]; }
  const storage_type& at_index(std::size_t i) const { return data_[i]; }

  std::span<storage_type> values() { return data_; }
  std::span<const storage_type> values() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Geometry geo_{};
  std::vector<storage_type> data_;
};

using GridMap = Grid<std::uint8_t>;
using BinaryMask = Grid<bool>;
using DistanceField = Grid<double>;
using LabelGrid = Grid<int>;

inline constexpr int kDx8[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
inline constexpr int kDy8[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
inline constexpr int kDx4[4] = {0, -1, 1, 0};
inline constexpr int kDy4[4] = {-1, 0, 0, 1};

inline std::size_t count_true(const BinaryMask& m) {
  std::size_t n = 0;
  for (auto v : m.values()) n += v ? 1 : 0;
  return n;
}

inline BinaryMask invert(const BinaryMask& m) {
  BinaryMask out(m.geometry());
  for (std::size_t i = 0; i < m.size(); ++i) out.at_index(i) = !m.at_index(i);
  return out;
}

inline void require_same_geometry(const Geometry& a, const Geometry& b, const char* what) {
  if (a.width != b.width || a.height != b.height)
    throw Error(ErrorCode::InvalidArgument, std::string("geometry mismatch: ") + what);
}

}  // namespace navkit
