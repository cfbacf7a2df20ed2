#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "nldw/errors.hpp"

namespace nldw {

// ============================================================================
// Adaptive quadrature
// ============================================================================

struct QuadratureLimits {
  int max_depth = 48;                       // recursion depth per panel
  std::size_t max_evaluations = 10'000'000; // hard budget across all panels
};

namespace detail {

template <class F>
double adaptive_simpson_rec(F& f, double a, double fa, double m, double fm,
                            double b, double fb, double whole, double tol,
                            int depth, const QuadratureLimits& lim,
                            std::size_t& evals) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  evals += 2;
  if (evals > lim.max_evaluations) {
    throw NonConvergent("adaptive Simpson: evaluation budget exhausted");
  }
  const double h12 = (b - a) / 12.0;
  const double left = h12 * (fa + 4.0 * flm + fm);
  const double right = h12 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth >= lim.max_depth || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, fa, lm, flm, m, fm, left, 0.5 * tol,
                              depth + 1, lim, evals) +
         adaptive_simpson_rec(f, m, fm, rm, frm, b, fb, right, 0.5 * tol,
                              depth + 1, lim, evals);
}

}  // namespace detail

/// Integral of f over [a, b] to absolute tolerance abs_tol.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol,
                        const QuadratureLimits& lim = {}) {
  if (!(b >= a)) throw OutOfRange("adaptive_simpson: b < a");
  if (a == b) return 0.0;
  std::size_t evals = 3;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_rec(f, a, fa, m, fm, b, fb, whole, abs_tol,
                                      0, lim, evals);
}

/// Integral of a decaying f over [0, inf).  `scale` sets the width of the
/// first panel; panel edges then double geometrically.  Each panel is
/// resolved by adaptive Simpson and integration stops once a panel
/// contributes less than rel_tol of the running total.  Throws NonConvergent
/// if the tail refuses to decay within the panel budget.
template <class F>
double semi_infinite_integral(F&& f, double scale, double rel_tol,
                              const QuadratureLimits& lim = {}) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw OutOfRange("semi_infinite_integral: scale must be positive");
  }
  if (!(rel_tol > 0.0)) {
    throw OutOfRange("semi_infinite_integral: rel_tol must be positive");
  }
  double acc = 0.0;
  double lo = 0.0;
  double hi = scale;
  const int kMaxPanels = 1100;  // edge growth 2^1100 overflows long before
  for (int panel = 0; panel < kMaxPanels; ++panel) {
    // Rough size estimate drives the per-panel absolute tolerance.
    const double rough =
        (hi - lo) / 6.0 *
        (std::abs(f(lo)) + 4.0 * std::abs(f(0.5 * (lo + hi))) + std::abs(f(hi)));
    const double tol =
        rel_tol * std::max(std::abs(acc), rough) * 0.125 +
        std::numeric_limits<double>::min();
    const double part = adaptive_simpson(f, lo, hi, tol, lim);
    acc += part;
    if (panel >= 2 && std::abs(part) <= rel_tol * std::abs(acc)) {
      return acc;
    }
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) break;
  }
  throw NonConvergent(
      "semi_infinite_integral: tail did not decay within panel budget");
}

}  // namespace nldw
