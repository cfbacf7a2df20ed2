#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "nldw/errors.hpp"

namespace nldw {

// ============================================================================
// Monotone cubic interpolation (Fritsch–Carlson)
// ============================================================================
//
// C^1 piecewise-cubic Hermite interpolant whose node slopes are limited so
// that data monotone on an interval stays monotone between the nodes.  Used
// for querying cached curves (g, G, Gamma) between their grid nodes.

class MonotoneCubic {
 public:
  MonotoneCubic() = default;

  MonotoneCubic(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) {
      throw OutOfRange("MonotoneCubic: need >= 2 nodes and matching arrays");
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (!(x_[k + 1] > x_[k])) {
        throw OutOfRange("MonotoneCubic: abscissae must strictly increase");
      }
    }
    d_.assign(n, 0.0);
    std::vector<double> h(n - 1), s(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      h[k] = x_[k + 1] - x_[k];
      s[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    if (n == 2) {
      d_[0] = d_[1] = s[0];
    } else {
      for (std::size_t k = 1; k + 1 < n; ++k) {
        if (s[k - 1] * s[k] <= 0.0) {
          d_[k] = 0.0;
        } else {
          const double w1 = 2.0 * h[k] + h[k - 1];
          const double w2 = h[k] + 2.0 * h[k - 1];
          d_[k] = (w1 + w2) / (w1 / s[k - 1] + w2 / s[k]);
        }
      }
      d_[0] = endpoint_slope(h[0], h[1], s[0], s[1]);
      d_[n - 1] = endpoint_slope(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
    }
  }

  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }

  double operator()(double x) const {
    const std::size_t k = locate(x);
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[k] + h * h10 * d_[k] + h01 * y_[k + 1] + h * h11 * d_[k + 1];
  }

  double derivative(double x) const {
    const std::size_t k = locate(x);
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t;
    const double dh00 = (6.0 * t2 - 6.0 * t) / h;
    const double dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    const double dh01 = (-6.0 * t2 + 6.0 * t) / h;
    const double dh11 = 3.0 * t2 - 2.0 * t;
    return dh00 * y_[k] + dh10 * d_[k] + dh01 * y_[k + 1] + dh11 * d_[k + 1];
  }

 private:
  // Non-centered three-point endpoint rule, clipped per Fritsch–Carlson so
  // the first panel cannot overshoot.
  static double endpoint_slope(double h0, double h1, double s0, double s1) {
    double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if (d * s0 <= 0.0) {
      d = 0.0;
    } else if (s0 * s1 <= 0.0 && std::abs(d) > 3.0 * std::abs(s0)) {
      d = 3.0 * s0;
    }
    return d;
  }

  std::size_t locate(double x) const {
    if (!(x >= x_.front() && x <= x_.back())) {
      throw OutOfRange("MonotoneCubic: query outside interpolation range");
    }
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t k = static_cast<std::size_t>(it - x_.begin());
    if (k > 0) --k;
    if (k + 1 >= x_.size()) k = x_.size() - 2;
    return k;
  }

  std::vector<double> x_, y_, d_;
};

}  // namespace nldw
