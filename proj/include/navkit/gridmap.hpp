#pragma once

// Map ingestion and the raster primitives every later stage is built on.

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "navkit/error.hpp"
#include "navkit/grid.hpp"
#include "navkit/image_io.hpp"

namespace navkit {

enum class WallPolarity { High, Low };

inline GridMap load_map(std::span<const std::uint8_t> image_bytes, const MapMeta& meta) {
  if (!(meta.resolution > 0.0) || !std::isfinite(meta.resolution))
    throw Error(ErrorCode::BadMetadata, "resolution must be > 0");
  GrayRaster r = decode_gray(image_bytes);
  GridMap g(Geometry{r.width, r.height, meta.resolution, meta.origin});
  std::copy(r.values.begin(), r.values.end(), g.values().begin());
  return g;
}

/// High polarity: value >= threshold is wall. Low polarity: value < threshold is wall.
inline BinaryMask extract_wall_mask(const GridMap& map, int wall_threshold,
                                    WallPolarity polarity = WallPolarity::High) {
  if (wall_threshold < 0 || wall_threshold > 255)
    throw Error(ErrorCode::InvalidArgument, "wall threshold outside [0,255]");
  BinaryMask m(map.geometry());
  for (std::size_t i = 0; i < map.size(); ++i) {
    bool high = map.at_index(i) >= wall_threshold;
    m.at_index(i) = polarity == WallPolarity::High ? high : !high;
  }
  return m;
}

enum class MorphOp { Close, Erode, Dilate };

namespace detail {

// Square structuring element = row pass followed by column pass. Cells
// outside the raster are ignored, so borders neither grow nor shrink masks.
inline BinaryMask square_filter(const BinaryMask& in, int r, bool dilate) {
  if (r <= 0) return in;
  const int w = in.width(), h = in.height();
  BinaryMask tmp(in.geometry()), out(in.geometry());
  auto pass = [&](const BinaryMask& src, BinaryMask& dst, bool horizontal) {
    const int len = horizontal ? w : h, lines = horizontal ? h : w;
    std::vector<int> prefix(len + 1);
    for (int line = 0; line < lines; ++line) {
      auto at = [&](int i) -> bool { return horizontal ? src(line, i) : src(i, line); };
      prefix[0] = 0;
      for (int i = 0; i < len; ++i) prefix[i + 1] = prefix[i] + (at(i) ? 1 : 0);
      for (int i = 0; i < len; ++i) {
        int lo = std::max(0, i - r), hi = std::min(len - 1, i + r);
        int ones = prefix[hi + 1] - prefix[lo];
        bool v = dilate ? ones > 0 : ones == hi - lo + 1;
        if (horizontal) dst(line, i) = v; else dst(i, line) = v;
      }
    }
  };
  pass(in, tmp, true);
  pass(tmp, out, false);
  return out;
}

}  // namespace detail

inline BinaryMask morphology(const BinaryMask& mask, MorphOp op, int kernel_radius) {
  if (kernel_radius < 0) throw Error(ErrorCode::InvalidArgument, "kernel radius must be >= 0");
  switch (op) {
    case MorphOp::Dilate: return detail::square_filter(mask, kernel_radius, true);
    case MorphOp::Erode: return detail::square_filter(mask, kernel_radius, false);
    case MorphOp::Close:
      return detail::square_filter(detail::square_filter(mask, kernel_radius, true), kernel_radius, false);
  }
  return mask;
}

namespace detail {

// Exact 1-D squared distance transform (lower envelope of parabolas).
// Non-feature cells carry a large finite sentinel so the envelope algebra stays finite.
inline constexpr double kFar = 1e20;

inline void edt_1d(std::span<const double> f, std::span<double> d, std::vector<int>& v, std::vector<double>& z) {
  const int n = int(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = double(q - v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

/// Squared exact Euclidean distance (cell units) to the nearest true cell;
/// infinity everywhere when the mask is empty.
inline DistanceField squared_edt(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  DistanceField out(mask.geometry(), detail::kFar);
  const int n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) f[r] = mask(r, c) ? 0.0 : detail::kFar;
    detail::edt_1d(std::span(f).first(h), std::span(d).first(h), v, z);
    for (int r = 0; r < h; ++r) out(r, c) = d[r];
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) f[c] = out(r, c);
    detail::edt_1d(std::span(f).first(w), std::span(d).first(w), v, z);
    for (int c = 0; c < w; ++c) out(r, c) = d[c] >= detail::kFar * 0.5 ? std::numeric_limits<double>::infinity() : d[c];
  }
  return out;
}

inline DistanceField edt(const BinaryMask& mask) {
  if (count_true(mask) == 0) throw Error(ErrorCode::DegenerateField, "edt of a mask with no true cells");
  DistanceField out = squared_edt(mask);
  for (auto& v : out.values()) v = std::sqrt(v);
  return out;
}

/// Separable Gaussian blur, kernel truncated at 3 sigma, replicated borders.
inline DistanceField gaussian_blur(const DistanceField& in, double sigma) {
  if (sigma <= 0.0) return in;
  const int radius = std::max(1, int(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) sum += k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& x : k) x /= sum;
  const int w = in.width(), h = in.height();
  DistanceField tmp(in.geometry()), out(in.geometry());
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * in(r, std::clamp(c + i, 0, w - 1));
      tmp(r, c) = acc;
    }
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * tmp(std::clamp(r + i, 0, h - 1), c);
      out(r, c) = acc;
    }
  return out;
}

/// Otsu's threshold over a 256-bin histogram. Returns the first bin of the
/// upper class, or nullopt when the histogram holds a single value.
inline std::optional<int> otsu_threshold(const std::array<std::size_t, 256>& hist) {
  std::size_t total = 0;
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) {
    total += hist[i];
    sum_all += double(i) * double(hist[i]);
  }
  int nonzero = 0;
  for (auto h : hist) nonzero += h > 0;
  if (total == 0 || nonzero < 2) return std::nullopt;

  double best = -1.0;
  int best_t = 0;
  std::size_t w0 = 0;
  double sum0 = 0.0;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[t];
    sum0 += double(t) * double(hist[t]);
    std::size_t w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    double m0 = sum0 / double(w0), m1 = (sum_all - sum0) / double(w1);
    double between = double(w0) * double(w1) * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t + 1;
}

struct SeedOptions {
  double blur_sigma = 2.0;
  /// Fixed threshold on the distance field (cells); replaces Otsu when set.
  std::optional<double> distance_threshold;
};

/// Room-core seeds: normalize -> blur -> Otsu, restricted to free cells.
/// A constant field over free space yields the whole free mask.
inline BinaryMask compute_seeds(const DistanceField& dist, const BinaryMask& free, const SeedOptions& opt = {}) {
  require_same_geometry(dist.geometry(), free.geometry(), "compute_seeds");
  BinaryMask seeds(free.geometry());

  if (opt.distance_threshold) {
    for (std::size_t i = 0; i < free.size(); ++i)
      seeds.at_index(i) = free.at_index(i) && dist.at_index(i) >= *opt.distance_threshold;
    return seeds;
  }

  double lo = std::numeric_limits<double>::infinity(), hi = -lo, gmax = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    double v = dist.at_index(i);
    if (std::isfinite(v)) gmax = std::max(gmax, v);
    if (!free.at_index(i)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo) || gmax <= 0.0) return free;

  DistanceField norm(dist.geometry());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    double v = dist.at_index(i);
    norm.at_index(i) = std::isfinite(v) ? 255.0 * v / gmax : 255.0;
  }
  DistanceField blurred = gaussian_blur(norm, opt.blur_sigma);

  std::array<std::size_t, 256> hist{};
  for (std::size_t i = 0; i < free.size(); ++i)
    if (free.at_index(i)) ++hist[std::size_t(std::clamp(std::lround(blurred.at_index(i)), 0L, 255L))];
  auto t = otsu_threshold(hist);
  if (!t) return free;
  for (std::size_t i = 0; i < free.size(); ++i)
    seeds.at_index(i) = free.at_index(i) && std::clamp(std::lround(blurred.at_index(i)), 0L, 255L) >= *t;
  return seeds;
}

struct Components {
  int count = 0;
  LabelGrid labels;
};

/// 8-connected components, labels 1..count assigned in raster scan order.
inline Components connected_components(const BinaryMask& mask) {
  Components out{0, LabelGrid(mask.geometry(), 0)};
  const int w = mask.width(), h = mask.height();
  std::vector<CellIndex> stack;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      if (!mask(r, c) || out.labels(r, c) != 0) continue;
      int id = ++out.count;
      out.labels(r, c) = id;
      stack.push_back({r, c});
      while (!stack.empty()) {
        CellIndex cur = stack.back();
        stack.pop_back();
        for (int k = 0; k < 8; ++k) {
          CellIndex n{cur.row + kDy8[k], cur.col + kDx8[k]};
          if (!mask.contains(n) || !mask[n] || out.labels[n] != 0) continue;
          out.labels[n] = id;
          stack.push_back(n);
        }
      }
    }
  return out;
}

}  // namespace navkit
