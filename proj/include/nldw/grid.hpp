#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "nldw/errors.hpp"

namespace nldw {

// ============================================================================
// Periodic grid and scalar fields
// ============================================================================
//
// Uniform periodic grid on the box [-L, L)^n, n in {1, 2}, with N points per
// axis.  N must be a power of two (the DFT backend is radix-2); N = 1 is
// admitted as a degenerate single-mode grid on which the Laplacian vanishes
// identically — the ODE-reduction cross-check runs there.

struct Grid {
  int dim = 1;
  double half_width = 1.0;   // L
  std::size_t points = 32;   // N per axis

  Grid() = default;

  Grid(int n, double L, std::size_t N) : dim(n), half_width(L), points(N) {
    if (n != 1 && n != 2) throw OutOfRange("Grid: dim must be 1 or 2");
    if (!(L > 0.0)) throw OutOfRange("Grid: half-width must be > 0");
    const bool pow2 = N > 0 && (N & (N - 1)) == 0;
    if (!pow2 || (N != 1 && N < 32)) {
      throw OutOfRange(
          "Grid: points per axis must be a power of two >= 32 (or 1 for the "
          "single-mode ODE reduction)");
    }
  }

  double dx() const { return 2.0 * half_width / static_cast<double>(points); }

  std::size_t size() const { return dim == 1 ? points : points * points; }

  double cell_volume() const { return dim == 1 ? dx() : dx() * dx(); }

  /// Node coordinate along one axis: x_i = -L + i dx, i in [0, N).
  double coord(std::size_t i) const {
    return -half_width + dx() * static_cast<double>(i);
  }

  /// Wrap a separation onto the minimal periodic image in [-L, L].
  double min_image(double d) const {
    const double span = 2.0 * half_width;
    return d - span * std::round(d / span);
  }

  /// Squared minimal-image distance from flat node index to a center point.
  double r2_to(std::size_t flat, double cx, double cy = 0.0) const {
    if (dim == 1) {
      const double d = min_image(coord(flat) - cx);
      return d * d;
    }
    const double dx1 = min_image(coord(flat / points) - cx);
    const double dy1 = min_image(coord(flat % points) - cy);
    return dx1 * dx1 + dy1 * dy1;
  }

  bool operator==(const Grid&) const = default;
};

struct Field {
  Grid grid;
  std::vector<double> values;

  static Field zeros(const Grid& g) {
    Field f;
    f.grid = g;
    f.values.assign(g.size(), 0.0);
    return f;
  }

  /// Sample a radial function of the squared minimal-image distance to a
  /// center point.
  template <class F>
  static Field sample_radial(const Grid& g, F&& f, double cx = 0.0,
                             double cy = 0.0) {
    Field out = zeros(g);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      out.values[i] = f(g.r2_to(i, cx, cy));
    }
    return out;
  }

  std::size_t idx(std::size_t i, std::size_t j = 0) const {
    return grid.dim == 1 ? i : i * grid.points + j;
  }

  /// Σ f dx^n, accumulated in fixed order (deterministic).
  double integral() const {
    long double acc = 0.0L;
    for (double v : values) acc += v;
    return static_cast<double>(acc) * grid.cell_volume();
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }

  double l2() const {
    long double acc = 0.0L;
    for (double v : values) acc += static_cast<long double>(v) * v;
    return std::sqrt(static_cast<double>(acc) * grid.cell_volume());
  }
};

inline void require_same_grid(const Field& a, const Field& b,
                              const char* where) {
  if (!(a.grid == b.grid)) {
    throw GridMismatch(std::string(where) + ": fields live on different grids");
  }
}

}  // namespace nldw
