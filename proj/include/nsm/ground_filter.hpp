#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "nsm/core/error.hpp"
#include "nsm/core/geometry.hpp"
#include "nsm/core/log.hpp"

namespace nsm {

enum class WindowGrowth { linear, exponential };

struct PmfParams {
  double cell_size = 0.33;
  int initial_window = 3;   ///< cells
  int max_window = 33;      ///< cells
  double slope = 0.15;      ///< rise over run
  double initial_height_thresh = 0.15;
  double max_height_thresh = 3.0;
  WindowGrowth window_growth = WindowGrowth::exponential;

  void validate() const {
    if (!(cell_size > 0.0)) throw ValidationError("pmf.cell_size must be > 0");
    if (initial_window < 1) throw ValidationError("pmf.initial_window must be >= 1");
    if (max_window < initial_window) throw ValidationError("pmf.max_window must be >= initial_window");
    if (!(slope >= 0.0)) throw ValidationError("pmf.slope must be >= 0");
    if (!(initial_height_thresh > 0.0) || !(max_height_thresh > 0.0)) {
      throw ValidationError("pmf height thresholds must be > 0");
    }
    if (max_height_thresh < initial_height_thresh) {
      throw ValidationError("pmf.max_height_thresh must be >= initial_height_thresh");
    }
  }
};

struct GroundLabeling {
  std::vector<std::uint8_t> is_ground;  ///< 1 = ground, per input point
  PointCloud ground;
  PointCloud non_ground;
  bool degenerate = false;  ///< all points fell into one cell

  std::size_t ground_count() const { return ground.size(); }
};

/// Window sequence w_0 < w_1 < ... <= max_window, in cells.
inline std::vector<int> pmf_window_sizes(const PmfParams& params) {
  params.validate();
  std::vector<int> windows{params.initial_window};
  for (;;) {
    const int w = windows.back();
    const int next = params.window_growth == WindowGrowth::linear ? w + 2 : std::max(w + 2, 2 * w - 1);
    if (next > params.max_window) break;
    windows.push_back(next);
  }
  return windows;
}

/// Height threshold for iteration k of the window sequence.
inline double pmf_height_threshold(const PmfParams& params, const std::vector<int>& windows, std::size_t k) {
  if (k == 0) return params.initial_height_thresh;
  const double grown = params.initial_height_thresh +
                       params.slope * static_cast<double>(windows[k] - windows[k - 1]) * params.cell_size;
  return std::min(grown, params.max_height_thresh);
}

namespace detail {

class ElevationGrid {
 public:
  ElevationGrid(std::size_t nx, std::size_t ny, double fill) : nx_(nx), ny_(ny), v_(nx * ny, fill) {}
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double& at(std::size_t ix, std::size_t iy) { return v_[iy * nx_ + ix]; }
  double at(std::size_t ix, std::size_t iy) const { return v_[iy * nx_ + ix]; }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

 private:
  std::size_t nx_, ny_;
  std::vector<double> v_;
};

/// Separable square-window min (erode) or max (dilate); window clipped at the border.
inline ElevationGrid morph(const ElevationGrid& in, int half, bool take_min) {
  const std::size_t nx = in.nx(), ny = in.ny();
  ElevationGrid rows(nx, ny, 0.0), out(nx, ny, 0.0);
  auto pick = [take_min](double a, double b) { return take_min ? std::min(a, b) : std::max(a, b); };
  const auto h = static_cast<std::ptrdiff_t>(half);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(ix) - h);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(nx) - 1, static_cast<std::ptrdiff_t>(ix) + h);
      double acc = in.at(static_cast<std::size_t>(lo), iy);
      for (std::ptrdiff_t j = lo + 1; j <= hi; ++j) acc = pick(acc, in.at(static_cast<std::size_t>(j), iy));
      rows.at(ix, iy) = acc;
    }
  }
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(iy) - h);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(ny) - 1, static_cast<std::ptrdiff_t>(iy) + h);
      double acc = rows.at(ix, static_cast<std::size_t>(lo));
      for (std::ptrdiff_t j = lo + 1; j <= hi; ++j) acc = pick(acc, rows.at(ix, static_cast<std::size_t>(j)));
      out.at(ix, iy) = acc;
    }
  }
  return out;
}

inline ElevationGrid opening(const ElevationGrid& in, int window) {
  const int half = (window - 1) / 2;
  if (half <= 0) return in;
  return morph(morph(in, half, true), half, false);
}

/// Empty cells take the elevation of the nearest occupied cell (4-connected BFS, index order).
inline void fill_empty(ElevationGrid& grid, const std::vector<bool>& occupied) {
  const std::size_t nx = grid.nx(), ny = grid.ny();
  std::vector<bool> done(occupied);
  std::deque<std::size_t> queue;
  for (std::size_t c = 0; c < occupied.size(); ++c)
    if (occupied[c]) queue.push_back(c);
  auto& v = grid.values();
  while (!queue.empty()) {
    const std::size_t c = queue.front();
    queue.pop_front();
    const std::size_t ix = c % nx, iy = c / nx;
    const std::size_t nbrs[4] = {ix > 0 ? c - 1 : SIZE_MAX, ix + 1 < nx ? c + 1 : SIZE_MAX,
                                 iy > 0 ? c - nx : SIZE_MAX, iy + 1 < ny ? c + nx : SIZE_MAX};
    for (std::size_t nb : nbrs) {
      if (nb == SIZE_MAX || done[nb]) continue;
      done[nb] = true;
      v[nb] = v[c];
      queue.push_back(nb);
    }
  }
}

}  // namespace detail

/**
 * @brief Progressive morphological ground filter.
 *
 * Rasterizes min-z per cell, then opens the surface with growing windows. A
 * cell whose elevation before an opening exceeds the opened surface by more
 * than that iteration's threshold becomes non-ground for good.
 *
 * Per point, a point is ground when its cell is ground and the point is within
 * initial_height_thresh of the cell minimum, or when it lies within
 * initial_height_thresh of the bilinearly interpolated final opened surface
 * (the reclaim step for points near cell borders and object feet).
 */
inline GroundLabeling filter_ground(const PointCloud& cloud, const PmfParams& params) {
  params.validate();
  if (cloud.empty()) throw ValidationError("filter_ground: empty cloud");

  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_x;
  for (const auto& p : cloud.points) {
    min_x = std::min(min_x, p.x());
    min_y = std::min(min_y, p.y());
    max_x = std::max(max_x, p.x());
    max_y = std::max(max_y, p.y());
  }
  const double c = params.cell_size;
  const auto nx = static_cast<std::size_t>(std::floor((max_x - min_x) / c)) + 1;
  const auto ny = static_cast<std::size_t>(std::floor((max_y - min_y) / c)) + 1;
  if (static_cast<double>(nx) * static_cast<double>(ny) > 2e8) {
    throw ValidationError("filter_ground: grid too large; increase pmf.cell_size");
  }

  GroundLabeling out;
  out.ground.frame_id = out.non_ground.frame_id = cloud.frame_id;
  out.is_ground.assign(cloud.size(), 1);
  if (nx == 1 && ny == 1) {
    log_warn("filter_ground: all points fall into a single cell; labeling everything ground");
    out.degenerate = true;
    out.ground.points = cloud.points;
    return out;
  }

  auto cell_of = [&](const Point& p) {
    const auto ix = std::min(nx - 1, static_cast<std::size_t>((p.x() - min_x) / c));
    const auto iy = std::min(ny - 1, static_cast<std::size_t>((p.y() - min_y) / c));
    return iy * nx + ix;
  };

  detail::ElevationGrid cell_min(nx, ny, std::numeric_limits<double>::infinity());
  std::vector<bool> occupied(nx * ny, false);
  std::vector<std::size_t> point_cell(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const std::size_t cell = cell_of(cloud[i]);
    point_cell[i] = cell;
    occupied[cell] = true;
    cell_min.values()[cell] = std::min(cell_min.values()[cell], cloud[i].z());
  }
  detail::ElevationGrid surface = cell_min;
  detail::fill_empty(surface, occupied);

  const auto windows = pmf_window_sizes(params);
  std::vector<bool> cell_non_ground(nx * ny, false);
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const double dh = pmf_height_threshold(params, windows, k);
    detail::ElevationGrid opened = detail::opening(surface, windows[k]);
    for (std::size_t cell = 0; cell < nx * ny; ++cell) {
      if (surface.values()[cell] - opened.values()[cell] > dh) cell_non_ground[cell] = true;
    }
    surface = std::move(opened);
  }

  auto interpolate = [&](const Point& p) {
    const double fx = (p.x() - min_x) / c - 0.5;
    const double fy = (p.y() - min_y) / c - 0.5;
    const double cx = std::clamp(fx, 0.0, static_cast<double>(nx - 1));
    const double cy = std::clamp(fy, 0.0, static_cast<double>(ny - 1));
    const auto ix0 = static_cast<std::size_t>(cx), iy0 = static_cast<std::size_t>(cy);
    const std::size_t ix1 = std::min(ix0 + 1, nx - 1), iy1 = std::min(iy0 + 1, ny - 1);
    const double tx = cx - static_cast<double>(ix0), ty = cy - static_cast<double>(iy0);
    const double top = (1 - tx) * surface.at(ix0, iy0) + tx * surface.at(ix1, iy0);
    const double bottom = (1 - tx) * surface.at(ix0, iy1) + tx * surface.at(ix1, iy1);
    return (1 - ty) * top + ty * bottom;
  };

  const double thresh = params.initial_height_thresh;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point& p = cloud[i];
    const std::size_t cell = point_cell[i];
    const bool near_cell_floor = !cell_non_ground[cell] && p.z() - cell_min.values()[cell] <= thresh;
    const bool near_surface = p.z() - interpolate(p) <= thresh;
    const bool ground = near_cell_floor || near_surface;
    out.is_ground[i] = ground ? 1 : 0;
    (ground ? out.ground : out.non_ground).points.push_back(p);
  }
  return out;
}

}  // namespace nsm
