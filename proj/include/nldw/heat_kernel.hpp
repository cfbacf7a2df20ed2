#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "nldw/fft.hpp"
#include "nldw/grid.hpp"

namespace nldw {

// ============================================================================
// Heat kernel on the periodic box
// ============================================================================
//
// G(tau, x) = (4 pi tau)^{-n/2} exp(-|x|^2 / (4 tau)) sampled with the
// minimal periodic image, together with its first and second tau-derivatives:
//   d/dtau   G = ( -n/(2 tau) + |x|^2/(4 tau^2) ) G,
//   d2/dtau2 G = ( (2n + n^2)/(4 tau^2) - (n+2)|x|^2/(4 tau^3)
//                 + |x|^4/(16 tau^4) ) G.
// A box of half-width L holds the kernel faithfully only while L >= 8 sqrt(tau)
// (sub-1e-14 mass outside); narrower boxes raise DomainTooSmall.

namespace detail {

inline void check_kernel_args(const Grid& g, double tau) {
  if (!(tau > 0.0)) throw OutOfRange("heat kernel: tau must be > 0");
  if (8.0 * std::sqrt(tau) > g.half_width) {
    throw DomainTooSmall(
        "heat kernel: box half-width " + std::to_string(g.half_width) +
        " < 8 sqrt(tau) = " + std::to_string(8.0 * std::sqrt(tau)));
  }
}

}  // namespace detail

/// Pointwise kernel value given squared distance.
inline double gaussian_value(int dim, double tau, double r2) {
  const double norm = std::pow(4.0 * M_PI * tau, -0.5 * dim);
  return norm * std::exp(-r2 / (4.0 * tau));
}

inline double gaussian_dt_value(int dim, double tau, double r2) {
  const double mult = -0.5 * dim / tau + r2 / (4.0 * tau * tau);
  return mult * gaussian_value(dim, tau, r2);
}

inline double gaussian_dtt_value(int dim, double tau, double r2) {
  const double n = dim;
  const double mult = (2.0 * n + n * n) / (4.0 * tau * tau) -
                      (n + 2.0) * r2 / (4.0 * tau * tau * tau) +
                      r2 * r2 / (16.0 * tau * tau * tau * tau);
  return mult * gaussian_value(dim, tau, r2);
}

inline Field gaussian(const Grid& g, double tau) {
  detail::check_kernel_args(g, tau);
  return Field::sample_radial(
      g, [&](double r2) { return gaussian_value(g.dim, tau, r2); });
}

inline Field gaussian_dt(const Grid& g, double tau) {
  detail::check_kernel_args(g, tau);
  return Field::sample_radial(
      g, [&](double r2) { return gaussian_dt_value(g.dim, tau, r2); });
}

inline Field gaussian_dtt(const Grid& g, double tau) {
  detail::check_kernel_args(g, tau);
  return Field::sample_radial(
      g, [&](double r2) { return gaussian_dtt_value(g.dim, tau, r2); });
}

/// Periodic convolution via the DFT, scaled by dx^n so it approximates the
/// continuum convolution on the box.  Fields are position-indexed with x = 0
/// at index N/2, while the index-domain circular convolution assumes the
/// origin at index 0, so the result is rotated back by N/2 along each axis.
inline Field convolve(const Field& a, const Field& b) {
  require_same_grid(a, b, "convolve");
  const Grid& g = a.grid;
  const std::size_t n = g.points;
  const std::size_t total = g.size();
  std::vector<std::complex<double>> fa(total), fb(total);
  for (std::size_t i = 0; i < total; ++i) {
    fa[i] = a.values[i];
    fb[i] = b.values[i];
  }
  if (g.dim == 1) {
    fft::transform(fa, false);
    fft::transform(fb, false);
    for (std::size_t i = 0; i < total; ++i) fa[i] *= fb[i];
    fft::transform(fa, true);
  } else {
    fft::transform_2d(fa, n, false);
    fft::transform_2d(fb, n, false);
    for (std::size_t i = 0; i < total; ++i) fa[i] *= fb[i];
    fft::transform_2d(fa, n, true);
  }
  Field out = Field::zeros(g);
  const double vol = g.cell_volume();
  const std::size_t half = n / 2;
  if (g.dim == 1) {
    for (std::size_t k = 0; k < n; ++k) {
      out.values[k] = fa[(k + half) % n].real() * vol;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        out.values[i * n + j] =
            fa[((i + half) % n) * n + (j + half) % n].real() * vol;
      }
    }
  }
  return out;
}

}  // namespace nldw
