#pragma once

// ============================================================================
// ode_lab.hpp -- blow-up laboratory for the scalar comparison ODEs
//
// Three second-order model problems, each written in the equality form
//
//     mu(x) f'' + c(x) f' = S(x, f),   S = C2 * |f|^p * (kind-dependent decay)
//
// where x is the integration variable:
//
//   LiZhouBase        f'' + C1 f' = C2 f^p                      (x = t)
//   LemmaA1           (t+1)^beta f'' + C1 f' = C2 f^p / (t+1)   (x = t)
//   LemmaA2           (t+1)^{-1} f'' + C1 f' =
//                         C2 f^p / ((t+1)(log(t+1)+1))          (x = t)
//   LemmaA1Log        substitute_log of LemmaA1                 (x = tau)
//   LemmaA2DoubleLog  substitute_doublelog of LemmaA2           (x = tau)
//
// The substitutions compactify time: t = e^tau - 1 maps lifespans that are
// exponential in the data size to tau-values that are merely polynomial, and
// t = e^{e^tau - 1} - 1 does the same for doubly exponential lifespans.  The
// price is stiffness: mu(tau) decays (doubly) exponentially while c(tau)
// approaches C1, so the slope variable relaxes onto the slow manifold
// w = S/c on a timescale mu/c that quickly drops below any useful step.
// integrate_blowup therefore runs an explicit Dormand-Prince 5(4) pair with
// a stability cap h <= 2.5*mu/c and, once mu/c < 1e-4, collapses the system
// onto the slow manifold (w := S/c) and continues with the reduced
// first-order equation h' = S/c.  At the switch the neglected correction is
// O(mu/c * d log(S/c)/dx), relative, i.e. parts in 1e-5 -- far below the
// bracket tolerances used here -- and it shrinks as mu/c keeps falling.
//
// Blow-up is declared when f >= 1e12 and the last doubling occupied a small
// fraction of the elapsed run; the crossing is then bisected to a bracket of
// relative width <= tol in x.  Lifespans too large for double precision are
// reported through the stable transforms log T and log log T.
// ============================================================================

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nldw/errors.hpp"
#include "nldw/lifespan.hpp"

namespace nldw {

// ============================================================================
// Problem description
// ============================================================================

enum class OdeKind {
  LiZhouBase,
  LemmaA1,
  LemmaA2,
  LemmaA1Log,
  LemmaA2DoubleLog,
};

inline const char* ode_kind_name(OdeKind k) {
  switch (k) {
    case OdeKind::LiZhouBase: return "lizhou";
    case OdeKind::LemmaA1: return "lemmaA1";
    case OdeKind::LemmaA2: return "lemmaA2";
    case OdeKind::LemmaA1Log: return "lemmaA1-log";
    case OdeKind::LemmaA2DoubleLog: return "lemmaA2-doublelog";
  }
  return "unknown";
}

/// One scalar comparison problem.  For the direct kinds t0/f0/f0p are the
/// initial time, value and slope in t; for the substituted kinds they are
/// the same data expressed in the transformed variable tau.
struct OdeProblem {
  OdeKind kind = OdeKind::LiZhouBase;
  double beta = 0.0;  ///< damping exponent; used by the LemmaA1 family only
  double C1 = 1.0;    ///< damping coefficient, >= 1
  double C2 = 1.0;    ///< source coefficient, > 0
  double p = 3.0;     ///< nonlinearity exponent, > 1
  double t0 = 0.0;    ///< start of the integration variable
  double f0 = 1.0;    ///< initial value, > 0
  double f0p = 0.0;   ///< initial slope, >= 0

  void validate() const {
    if (!(C1 >= 1.0) || !std::isfinite(C1)) {
      throw OutOfRange("OdeProblem: C1 must satisfy C1 >= 1, got " +
                       std::to_string(C1));
    }
    if (!(C2 > 0.0) || !std::isfinite(C2)) {
      throw OutOfRange("OdeProblem: C2 must be positive, got " +
                       std::to_string(C2));
    }
    if (!(p > 1.0) || !std::isfinite(p)) {
      throw OutOfRange("OdeProblem: p must be > 1, got " + std::to_string(p));
    }
    if (!(t0 >= 0.0) || !std::isfinite(t0)) {
      throw OutOfRange("OdeProblem: t0 must be >= 0, got " +
                       std::to_string(t0));
    }
    if (!(f0 > 0.0) || !std::isfinite(f0)) {
      throw OutOfRange("OdeProblem: f0 must be positive, got " +
                       std::to_string(f0));
    }
    if (!(f0p >= 0.0) || !std::isfinite(f0p)) {
      throw OutOfRange("OdeProblem: f0p must be >= 0, got " +
                       std::to_string(f0p));
    }
    if (kind == OdeKind::LemmaA1 || kind == OdeKind::LemmaA1Log) {
      if (!(beta >= -1.0) || !(beta < 1.0)) {
        throw OutOfRange("OdeProblem: beta must lie in [-1, 1), got " +
                         std::to_string(beta));
      }
    }
  }
};

// ============================================================================
// Coefficients mu(x) f'' + c(x) f' = S(x, f)
// ============================================================================

namespace detail {

inline double ode_mu(const OdeProblem& pr, double x) {
  switch (pr.kind) {
    case OdeKind::LiZhouBase: return 1.0;
    case OdeKind::LemmaA1: return std::pow(x + 1.0, pr.beta);
    case OdeKind::LemmaA2: return 1.0 / (x + 1.0);
    case OdeKind::LemmaA1Log: return std::exp((pr.beta - 1.0) * x);
    case OdeKind::LemmaA2DoubleLog:
      return std::exp(-2.0 * std::expm1(x)) * std::exp(-x);
  }
  return 1.0;
}

inline double ode_damping(const OdeProblem& pr, double x) {
  switch (pr.kind) {
    case OdeKind::LiZhouBase:
    case OdeKind::LemmaA1:
    case OdeKind::LemmaA2:
      return pr.C1;
    case OdeKind::LemmaA1Log:
      return pr.C1 - std::exp((pr.beta - 1.0) * x);
    case OdeKind::LemmaA2DoubleLog: {
      const double m = std::exp(-2.0 * std::expm1(x));
      return pr.C1 - m - m * std::exp(-x);
    }
  }
  return pr.C1;
}

inline double ode_source(const OdeProblem& pr, double x, double f) {
  const double fp = std::pow(std::abs(f), pr.p);
  switch (pr.kind) {
    case OdeKind::LiZhouBase: return pr.C2 * fp;
    case OdeKind::LemmaA1: return pr.C2 * fp / (x + 1.0);
    case OdeKind::LemmaA2:
      return pr.C2 * fp / ((x + 1.0) * (std::log1p(x) + 1.0));
    case OdeKind::LemmaA1Log:
    case OdeKind::LemmaA2DoubleLog:
      return pr.C2 * fp;
  }
  return pr.C2 * fp;
}

/// log(e^x - 1) evaluated stably for all x > 0.
inline double log_expm1(double x) {
  return x + std::log1p(-std::exp(-x));
}

}  // namespace detail

// ============================================================================
// Variable maps
// ============================================================================

/// Back-map from the integration variable to physical time t.  Returns +inf
/// when t overflows double precision.
inline double back_map_time(OdeKind kind, double x) {
  switch (kind) {
    case OdeKind::LiZhouBase:
    case OdeKind::LemmaA1:
    case OdeKind::LemmaA2:
      return x;
    case OdeKind::LemmaA1Log:
      return std::expm1(x);
    case OdeKind::LemmaA2DoubleLog:
      return std::expm1(std::expm1(x));
  }
  return x;
}

/// log t for the blow-up point at integration variable x (stable even when
/// t itself overflows).  NaN when t <= 0.
inline double log_time(OdeKind kind, double x) {
  switch (kind) {
    case OdeKind::LiZhouBase:
    case OdeKind::LemmaA1:
    case OdeKind::LemmaA2:
      return x > 0.0 ? std::log(x) : std::numeric_limits<double>::quiet_NaN();
    case OdeKind::LemmaA1Log:
      return x > 0.0 ? detail::log_expm1(x)
                     : std::numeric_limits<double>::quiet_NaN();
    case OdeKind::LemmaA2DoubleLog: {
      if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
      return detail::log_expm1(std::expm1(x));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Horizon in the integration variable corresponding to a horizon in t.
/// An infinite horizon_t means "integrate until blow-up or until t would no
/// longer be meaningful", capped only as a safety net.
inline double horizon_x(OdeKind kind, double horizon_t) {
  const double cap = 1e15;
  double hx;
  switch (kind) {
    case OdeKind::LiZhouBase:
    case OdeKind::LemmaA1:
    case OdeKind::LemmaA2:
      hx = horizon_t;
      break;
    case OdeKind::LemmaA1Log:
      hx = std::log1p(horizon_t);
      break;
    case OdeKind::LemmaA2DoubleLog:
      hx = std::log1p(std::log1p(horizon_t));
      break;
    default:
      hx = horizon_t;
      break;
  }
  if (!(hx < cap)) hx = cap;
  return hx;
}

// ============================================================================
// Substitutions
// ============================================================================

/// Log-time substitution t = e^tau - 1 applied to a LemmaA1 problem:
///
///   e^{(beta-1) tau} h'' + (C1 - e^{(beta-1) tau}) h' = C2 h^p,
///
/// with h(tau) = f(e^tau - 1), tau0 = log(t0 + 1) and transformed slope
/// h'(tau0) = f'(t0) (t0 + 1).  Throws HypothesisViolation when the
/// transformed damping C1 - e^{(beta-1) tau0} is not positive.
inline OdeProblem substitute_log(const OdeProblem& pr) {
  if (pr.kind != OdeKind::LemmaA1) {
    throw OutOfRange("substitute_log expects a LemmaA1 problem");
  }
  pr.validate();
  const double tau0 = std::log1p(pr.t0);
  const double c0 = pr.C1 - std::exp((pr.beta - 1.0) * tau0);
  if (!(c0 > 0.0)) {
    throw HypothesisViolation(
        "substitute_log: transformed damping C1 - e^{(beta-1) tau0} = " +
        std::to_string(c0) + " must be positive");
  }
  OdeProblem out = pr;
  out.kind = OdeKind::LemmaA1Log;
  out.t0 = tau0;
  out.f0p = pr.f0p * (pr.t0 + 1.0);
  return out;
}

/// Double-log substitution t = e^{e^tau - 1} - 1 applied to a LemmaA2
/// problem:
///
///   e^{-2(e^tau - 1)} e^{-tau} h''
///     + (C1 - e^{-2(e^tau - 1)} - e^{-2(e^tau - 1)} e^{-tau}) h' = C2 h^p,
///
/// with tau0 = log(log(t0 + 1) + 1) and transformed slope
/// h'(tau0) = f'(t0) (t0 + 1) (log(t0 + 1) + 1).  Throws
/// HypothesisViolation when the transformed damping at tau0 is not positive.
inline OdeProblem substitute_doublelog(const OdeProblem& pr) {
  if (pr.kind != OdeKind::LemmaA2) {
    throw OutOfRange("substitute_doublelog expects a LemmaA2 problem");
  }
  pr.validate();
  const double tau0 = std::log1p(std::log1p(pr.t0));
  const double m = std::exp(-2.0 * std::expm1(tau0));
  const double c0 = pr.C1 - m - m * std::exp(-tau0);
  if (!(c0 > 0.0)) {
    throw HypothesisViolation(
        "substitute_doublelog: transformed damping at tau0 = " +
        std::to_string(c0) + " must be positive");
  }
  OdeProblem out = pr;
  out.kind = OdeKind::LemmaA2DoubleLog;
  out.t0 = tau0;
  out.f0p = pr.f0p * (pr.t0 + 1.0) * (std::log1p(pr.t0) + 1.0);
  return out;
}

// ============================================================================
// Blow-up integration
// ============================================================================

/// Result of one blow-up run.  x is the integration variable of the problem
/// that was integrated (t for direct kinds, tau for substituted kinds); the
/// bracket [x_lo, x_hi] is mapped back to physical time in [T_lo, T_hi]
/// (infinite when t overflows) and to the stable transforms log_T and
/// loglog_T evaluated at the bracket midpoint.
struct OdeBlowup {
  bool blew_up = false;
  LifespanReason reason = LifespanReason::NoBlowupWithinHorizon;
  double x_lo = 0.0;
  double x_hi = 0.0;
  double T_lo = std::numeric_limits<double>::quiet_NaN();
  double T_hi = std::numeric_limits<double>::quiet_NaN();
  double log_T = std::numeric_limits<double>::quiet_NaN();
  double loglog_T = std::numeric_limits<double>::quiet_NaN();
  bool confirmed = false;         ///< final doubling was locally fast
  bool slopes_positive = true;    ///< f' > 0 held at every accepted step
  bool convex = true;             ///< f'' >= 0 held while second order active
  bool reduced_phase = false;     ///< slow-manifold reduction engaged
  std::uint64_t steps = 0;
  std::uint64_t rejected = 0;
};

namespace detail {

// Dormand-Prince 5(4) tableau (FSAL property unused; 7 stages per step).
struct Dopri5 {
  static constexpr std::array<double, 7> c = {
      0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};
  static constexpr std::array<std::array<double, 6>, 7> a = {{
      {0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
      {1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0},
      {3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0},
      {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0},
      {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0,
       0.0, 0.0},
      {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
       -5103.0 / 18656.0, 0.0},
      {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
       11.0 / 84.0},
  }};
  static constexpr std::array<double, 7> b5 = {
      35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
      11.0 / 84.0, 0.0};
  static constexpr std::array<double, 7> b4 = {
      5179.0 / 57600.0, 0.0,          7571.0 / 16695.0, 393.0 / 640.0,
      -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0};
};

/// State for the blow-up integrator: y[0] = f, y[1] = f' (second-order
/// phase); after the slow-manifold switch only y[0] evolves.
struct OdeState {
  double x = 0.0;
  std::array<double, 2> y = {0.0, 0.0};
};

inline std::array<double, 2> ode_rhs(const OdeProblem& pr, bool reduced,
                                     double x, const std::array<double, 2>& y) {
  if (reduced) {
    return {ode_source(pr, x, y[0]) / ode_damping(pr, x), 0.0};
  }
  const double mu = ode_mu(pr, x);
  const double c = ode_damping(pr, x);
  return {y[1], (ode_source(pr, x, y[0]) - c * y[1]) / mu};
}

/// One DOPRI5 step of size h from s; fills out and the embedded error
/// estimate (5th minus 4th order solution).
inline void dopri5_step(const OdeProblem& pr, bool reduced, const OdeState& s,
                        double h, OdeState& out, std::array<double, 2>& err) {
  std::array<std::array<double, 2>, 7> k;
  for (std::size_t st = 0; st < 7; ++st) {
    std::array<double, 2> yi = s.y;
    for (std::size_t j = 0; j < st; ++j) {
      const double aij = Dopri5::a[st][j];
      if (aij != 0.0) {
        yi[0] += h * aij * k[j][0];
        yi[1] += h * aij * k[j][1];
      }
    }
    k[st] = ode_rhs(pr, reduced, s.x + Dopri5::c[st] * h, yi);
  }
  out.x = s.x + h;
  out.y = s.y;
  err = {0.0, 0.0};
  for (std::size_t st = 0; st < 7; ++st) {
    out.y[0] += h * Dopri5::b5[st] * k[st][0];
    out.y[1] += h * Dopri5::b5[st] * k[st][1];
    err[0] += h * (Dopri5::b5[st] - Dopri5::b4[st]) * k[st][0];
    err[1] += h * (Dopri5::b5[st] - Dopri5::b4[st]) * k[st][1];
  }
}

}  // namespace detail

/// Integrate one comparison problem until f crosses `threshold` (blow-up),
/// the horizon is reached, or the step collapses.  Adaptive embedded
/// Dormand-Prince 5(4) with step rejection; in the stiff substituted kinds a
/// stability cap h <= 2.5 mu/c protects the explicit pair and the system is
/// collapsed onto the slow manifold w = S/c once mu/c < 1e-4 (see the file
/// header for the error budget).  The crossing is bisected to a bracket of
/// relative width <= tol in the integration variable.
///
/// `horizon_t` is measured in physical time t regardless of kind; pass
/// +infinity to run until blow-up no matter how large t becomes (brackets
/// beyond double range are still reported exactly through log_T/loglog_T).
inline OdeBlowup integrate_blowup(
    const OdeProblem& pr, double tol = 1e-6, double horizon_t = 1e12,
    double threshold = 1e12) {
  pr.validate();
  if (!(tol > 0.0) || !(tol < 1.0)) {
    throw OutOfRange("integrate_blowup: tol must lie in (0, 1)");
  }
  if (!(threshold > 0.0)) {
    throw OutOfRange("integrate_blowup: threshold must be positive");
  }
  if (!(pr.f0 < 0.5 * threshold)) {
    throw OutOfRange(
        "integrate_blowup: f0 must sit below half the blow-up threshold");
  }
  if (!(horizon_x(pr.kind, horizon_t) > pr.t0)) {
    throw OutOfRange(
        "integrate_blowup: horizon must lie beyond the initial point");
  }
  // Substituted kinds constructed by hand (not via substitute_*) still need
  // a positive transformed damping at the start.
  if (pr.kind == OdeKind::LemmaA1Log || pr.kind == OdeKind::LemmaA2DoubleLog) {
    if (!(detail::ode_damping(pr, pr.t0) > 0.0)) {
      throw HypothesisViolation(
          "integrate_blowup: transformed damping must be positive at the "
          "initial point");
    }
  }

  const double x_end = horizon_x(pr.kind, horizon_t);
  const double rtol = std::clamp(tol * 1e-2, 1e-13, 1e-6);
  const double atol0 = 1e-14 * pr.f0;
  const double atol1 =
      1e-14 * std::max({pr.f0, pr.f0p,
                        detail::ode_source(pr, pr.t0, pr.f0) /
                            detail::ode_damping(pr, pr.t0)});
  const double switch_ratio = 1e-4;  // slow-manifold engagement point
  const std::uint64_t max_steps = 20'000'000;

  OdeBlowup out;
  detail::OdeState s{pr.t0, {pr.f0, pr.f0p}};
  bool reduced = false;
  const bool watch_convexity =
      (pr.kind == OdeKind::LiZhouBase) && pr.f0p == 0.0;

  // Initial step: small relative to both the horizon scale and the
  // relaxation time; the controller regrows it geometrically.
  double h = std::min(1e-3, 0.1 * detail::ode_mu(pr, s.x) /
                                 detail::ode_damping(pr, s.x));
  h = std::min(h, 0.25 * (x_end - s.x));
  if (!(h > 0.0)) h = 1e-6;

  double x_half = s.x;  // last accepted x with f <= threshold/2
  detail::OdeState snew;
  std::array<double, 2> err{};

  const auto finish_bracket = [&](detail::OdeState from, double width) {
    // Bisect the crossing step: halve [from.x, from.x + width] keeping f on
    // the below-threshold side, re-stepping from `from` each halving.
    double x_a = from.x;
    double x_b = from.x + width;
    detail::OdeState ya = from;
    for (int it = 0; it < 200 && (x_b - x_a) > tol * std::max(x_b, 1.0);
         ++it) {
      const double hm = 0.5 * (x_b - x_a);
      detail::OdeState ym;
      std::array<double, 2> em{};
      detail::dopri5_step(pr, reduced, ya, hm, ym, em);
      if (!(ym.y[0] < threshold)) {
        x_b = ym.x;
      } else {
        x_a = ym.x;
        ya = ym;
      }
    }
    out.x_lo = x_a;
    out.x_hi = x_b;
    out.blew_up = true;
    out.reason = LifespanReason::ThresholdCrossed;
    const double span = std::max(out.x_hi - pr.t0, 1e-12);
    out.confirmed = (out.x_hi - x_half) <= 0.1 * span;
  };

  while (true) {
    if (s.x >= x_end) {
      out.reason = LifespanReason::NoBlowupWithinHorizon;
      break;
    }
    if (out.steps + out.rejected > max_steps) {
      throw NonConvergent("integrate_blowup: step budget exhausted at x = " +
                          std::to_string(s.x));
    }
    if (!reduced) {
      const double mu = detail::ode_mu(pr, s.x);
      const double c = detail::ode_damping(pr, s.x);
      if (mu / c < switch_ratio) {
        // One-way collapse onto the slow manifold: w := S/c.
        s.y[1] = detail::ode_source(pr, s.x, s.y[0]) / c;
        reduced = true;
        out.reduced_phase = true;
      } else {
        h = std::min(h, 2.5 * mu / c);  // explicit stability cap
      }
    }
    h = std::min(h, x_end - s.x);

    detail::dopri5_step(pr, reduced, s, h, snew, err);

    const double sc0 = atol0 + rtol * std::max(std::abs(s.y[0]),
                                               std::abs(snew.y[0]));
    const double sc1 = atol1 + rtol * std::max(std::abs(s.y[1]),
                                               std::abs(snew.y[1]));
    double en = std::abs(err[0]) / sc0;
    if (!reduced) en = std::max(en, std::abs(err[1]) / sc1);

    if (!std::isfinite(snew.y[0]) || !std::isfinite(snew.y[1]) ||
        !std::isfinite(en)) {
      // The trial step left double range before the threshold test could
      // run; shrink hard and retry, or give up when the step collapses.
      h *= 0.1;
      ++out.rejected;
      if (h < 1e-14 * std::max(std::abs(s.x), 1.0)) {
        out.reason = LifespanReason::Overflow;
        out.x_lo = s.x;
        out.x_hi = s.x;
        out.blew_up = true;
        out.confirmed = false;
        break;
      }
      continue;
    }

    if (en > 1.0) {
      ++out.rejected;
      h *= std::clamp(0.9 * std::pow(en, -0.2), 0.2, 0.9);
      if (h < 1e-14 * std::max(std::abs(s.x), 1.0)) {
        out.reason = LifespanReason::DtUnderflow;
        break;
      }
      continue;
    }

    ++out.steps;

    if (snew.y[0] >= threshold) {
      finish_bracket(s, snew.x - s.x);
      break;
    }

    const double slope = reduced
        ? detail::ode_rhs(pr, true, snew.x, snew.y)[0]
        : snew.y[1];
    if (snew.x > pr.t0 && !(slope > 0.0) && out.steps > 1) {
      out.slopes_positive = false;
    }
    if (watch_convexity && !reduced) {
      const double acc = detail::ode_rhs(pr, false, snew.x, snew.y)[1];
      if (acc < -1e-9 * std::max(1.0, std::abs(snew.y[1]))) {
        out.convex = false;
      }
    }
    if (snew.y[0] <= 0.5 * threshold) x_half = snew.x;

    s = snew;
    h *= std::clamp(0.9 * std::pow(std::max(en, 1e-10), -0.2), 0.2, 5.0);
  }

  if (out.blew_up) {
    out.T_lo = back_map_time(pr.kind, out.x_lo);
    out.T_hi = back_map_time(pr.kind, out.x_hi);
    const double x_mid = 0.5 * (out.x_lo + out.x_hi);
    out.log_T = log_time(pr.kind, x_mid);
    out.loglog_T = out.log_T > 0.0 ? std::log(out.log_T)
                                   : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

// ============================================================================
// Scaling studies
// ============================================================================

struct OdeScalingRow {
  double epsilon = 0.0;
  OdeBlowup result;
};

struct OdeScalingStudy {
  std::vector<OdeScalingRow> rows;  // epsilon-descending (largest data first)
  ScalingFit fit;
};

/// Run a family of blow-up problems with f0 = epsilon, f0p = 0 and fit the
/// predicted lifespan law:
///
///   LiZhouBase  log T  vs  log eps          (polynomial law)
///   LemmaA1     log T  vs  eps^{-(p-1)}     (exponential law, via log sub)
///   LemmaA2     loglog T  vs  eps^{-(p-1)}  (double exponential law)
///
/// The Lemma kinds are integrated in their substituted forms; the default
/// damping constants C1 = 2 (LemmaA1) and C1 = 3 (LemmaA2) are the smallest
/// integers that keep the transformed damping positive from t0 = 0.
/// The default horizon is unbounded because these lifespans overflow any
/// fixed physical horizon within the epsilon ranges of interest.
inline OdeScalingStudy scaling_study(
    OdeKind kind, double beta, double p, std::vector<double> epsilons,
    double tol = 1e-6,
    double horizon_t = std::numeric_limits<double>::infinity()) {
  if (kind != OdeKind::LiZhouBase && kind != OdeKind::LemmaA1 &&
      kind != OdeKind::LemmaA2) {
    throw OutOfRange("scaling_study expects a base kind (lizhou/lemmaA1/A2)");
  }
  for (double e : epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw OutOfRange("scaling_study: epsilons must be positive and finite");
    }
  }
  std::sort(epsilons.begin(), epsilons.end(), std::greater<double>());
  epsilons.erase(std::unique(epsilons.begin(), epsilons.end()),
                 epsilons.end());
  if (epsilons.size() < 3) {
    throw InsufficientPoints("scaling_study: need at least 3 distinct epsilons");
  }

  OdeScalingStudy study;
  for (double eps : epsilons) {
    OdeProblem base;
    base.kind = kind;
    base.beta = beta;
    base.p = p;
    base.t0 = 0.0;
    base.f0 = eps;
    base.f0p = 0.0;
    OdeProblem run = base;
    switch (kind) {
      case OdeKind::LiZhouBase:
        run.C1 = 1.0;
        run.C2 = 1.0;
        break;
      case OdeKind::LemmaA1:
        base.C1 = 2.0;
        base.C2 = 1.0;
        run = substitute_log(base);
        break;
      case OdeKind::LemmaA2:
        base.C1 = 3.0;
        base.C2 = 1.0;
        run = substitute_doublelog(base);
        break;
      default:
        break;
    }
    study.rows.push_back({eps, integrate_blowup(run, tol, horizon_t)});
  }

  ScalingFit fit;
  fit.regime = (kind == OdeKind::LiZhouBase) ? ScalingRegime::SubcriticalPoly
               : (kind == OdeKind::LemmaA1)  ? ScalingRegime::CriticalExp
                                             : ScalingRegime::CriticalDoubleExp;
  std::vector<std::pair<double, double>> pts;  // (epsilon, y)
  for (const auto& row : study.rows) {
    if (!row.result.blew_up) continue;
    const double y = (fit.regime == ScalingRegime::CriticalDoubleExp)
                         ? row.result.loglog_T
                         : row.result.log_T;
    if (!std::isfinite(y)) continue;
    pts.emplace_back(row.epsilon, y);
  }
  std::sort(pts.begin(), pts.end());  // epsilon-ascending for the fit
  if (pts.size() < 3) {
    throw InsufficientPoints(
        "scaling_study: need at least 3 blow-up points, have " +
        std::to_string(pts.size()));
  }
  for (const auto& [eps, y] : pts) {
    fit.xs.push_back(fit.regime == ScalingRegime::SubcriticalPoly
                         ? std::log(eps)
                         : std::pow(eps, -(p - 1.0)));
    fit.ys.push_back(y);
  }
  fit.n_points = pts.size();
  const LinearFit line = linear_fit(fit.xs, fit.ys);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.r_squared = line.r_squared;
  study.fit = fit;
  return study;
}

}  // namespace nldw
