#pragma once

#include <complex>
#include <cstddef>
#include <unordered_map>
#include <vector>

#include "nldw/errors.hpp"

namespace nldw::fft {

// ============================================================================
// Radix-2 Cooley–Tukey FFT
// ============================================================================
//
// Self-contained iterative transform for power-of-two lengths.  Twiddle
// factors come from a per-length table (cached thread-locally) so repeated
// transforms of the same length do no trigonometry and accumulate no
// recurrence drift.

namespace detail {

inline const std::vector<std::complex<double>>& twiddles(std::size_t n) {
  thread_local std::unordered_map<std::size_t,
                                  std::vector<std::complex<double>>>
      cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<std::complex<double>> w(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double ang = -2.0 * M_PI * static_cast<double>(k) /
                         static_cast<double>(n);
      w[k] = {std::cos(ang), std::sin(ang)};
    }
    it = cache.emplace(n, std::move(w)).first;
  }
  return it->second;
}

}  // namespace detail

/// In-place transform of a power-of-two-length vector.  inverse = true
/// applies the conjugate transform and the 1/n scaling.
inline void transform(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw OutOfRange("fft: length must be a power of two");
  }
  if (n == 1) return;

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const auto& w = detail::twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t blk = 0; blk < n; blk += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> tw =
            inverse ? std::conj(w[k * stride]) : w[k * stride];
        const std::complex<double> u = a[blk + k];
        const std::complex<double> v = a[blk + k + len / 2] * tw;
        a[blk + k] = u + v;
        a[blk + k + len / 2] = u - v;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& z : a) z *= scale;
  }
}

/// 2D transform of an n-by-n row-major array: rows, then columns.
inline void transform_2d(std::vector<std::complex<double>>& a, std::size_t n,
                         bool inverse) {
  if (a.size() != n * n) throw OutOfRange("fft: 2d size mismatch");
  std::vector<std::complex<double>> line(n);
  for (std::size_t r = 0; r < n; ++r) {
    line.assign(a.begin() + r * n, a.begin() + (r + 1) * n);
    transform(line, inverse);
    std::copy(line.begin(), line.end(), a.begin() + r * n);
  }
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) line[r] = a[r * n + c];
    transform(line, inverse);
    for (std::size_t r = 0; r < n; ++r) a[r * n + c] = line[r];
  }
}

}  // namespace nldw::fft
