#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "nldw/errors.hpp"
#include "nldw/solver.hpp"

namespace nldw {

// ============================================================================
// Lifespan estimation and scaling fits
// ============================================================================
//
// The numerical lifespan proxy is the first confirmed crossing of a sup-norm
// threshold theta.  Near blow-up max|u| follows (T - t)^(-2/(p-1)), so
// thresholds 1e4..1e8 all sit within ~theta^(-(p-1)/2) of the true time; the
// spread across that span is reported as the insensitivity ratio.

struct BlowupDetector {
  double theta = 1e6;        // primary sup-norm threshold
  bool confirm_doubling = true;
  double theta_low = 1e4;    // robustness span around theta
  double theta_high = 1e8;

  void validate() const {
    if (!(theta_low > 0.0 && theta_low < theta && theta < theta_high)) {
      throw OutOfRange(
          "BlowupDetector: need 0 < theta_low < theta < theta_high");
    }
  }
};

enum class LifespanReason {
  ThresholdCrossed,
  DtUnderflow,
  Overflow,
  NoBlowupWithinHorizon
};

inline const char* lifespan_reason_name(LifespanReason r) {
  switch (r) {
    case LifespanReason::ThresholdCrossed: return "threshold_crossed";
    case LifespanReason::DtUnderflow: return "dt_underflow";
    case LifespanReason::Overflow: return "overflow";
    case LifespanReason::NoBlowupWithinHorizon: return "no_blowup";
  }
  return "unknown";
}

struct LifespanRecord {
  double epsilon = 0.0;
  bool blew_up = false;
  double T_lo = 0.0;   // last accepted time with max|u| < theta
  double T_hi = 0.0;   // first accepted time with max|u| >= theta
  double lifespan = std::numeric_limits<double>::quiet_NaN();  // midpoint
  LifespanReason reason = LifespanReason::NoBlowupWithinHorizon;
  double theta_used = 0.0;
  double insensitivity_ratio = std::numeric_limits<double>::quiet_NaN();
  bool confirmed = false;
  bool classical_damping = false;  // beta == 0 admitted with a warning flag
  double dt_final = 0.0;           // step in effect at the refined crossing
  std::uint64_t steps = 0;
  std::string error;  // non-empty when the run failed outright

  /// Usable for fits: a confirmed, bracketed crossing of theta.
  bool accepted() const { return blew_up && error.empty(); }
};

namespace detail {

inline const ThetaCrossing* find_crossing(
    const std::vector<ThetaCrossing>& cs, double theta) {
  for (const auto& c : cs) {
    if (c.theta == theta) return &c;
  }
  return nullptr;
}

inline LifespanReason map_reason(StopReason r) {
  switch (r) {
    case StopReason::ThresholdCrossed: return LifespanReason::ThresholdCrossed;
    case StopReason::Overflow: return LifespanReason::Overflow;
    case StopReason::DtUnderflow: return LifespanReason::DtUnderflow;
    case StopReason::ReachedTEnd: return LifespanReason::NoBlowupWithinHorizon;
  }
  return LifespanReason::NoBlowupWithinHorizon;
}

}  // namespace detail

/// Two-phase lifespan estimate.  A scout run integrates until theta_high (or
/// the horizon) while keeping the latest state below theta_low/4; a refined
/// run restarts there with dt/4 and records the crossings of all three
/// thresholds, giving the bracket for theta and the insensitivity spread.
inline LifespanRecord estimate_lifespan(const ProblemParams& prm,
                                        const InitialData& data,
                                        const Grid& grid,
                                        const BlowupDetector& det,
                                        double horizon) {
  det.validate();
  if (!prm.nonlinearity_on) {
    throw OutOfRange("estimate_lifespan: nonlinearity must be on");
  }
  if (!(horizon > 0.0)) throw OutOfRange("estimate_lifespan: horizon <= 0");

  LifespanRecord rec;
  rec.epsilon = prm.epsilon;
  rec.theta_used = det.theta;
  rec.classical_damping = prm.damping.classical();

  SimState scout = init_state(prm, data, grid);
  const double m0 = scout.u.max_abs();
  if (!(det.theta >= 1e3 * m0)) {
    throw OutOfRange(
        "estimate_lifespan: theta must exceed the initial max|u| by 1e3");
  }

  WaveStepper stepper(grid);
  StepControls ctl;
  ctl.t_end = horizon;
  ctl.stop_theta = det.theta;
  ctl.confirm_doubling = det.confirm_doubling;
  ctl.safe_theta = 0.25 * det.theta_low;
  const IntegrationReport scout_rep = integrate(scout, prm, stepper, ctl);

  if (scout_rep.reason == StopReason::ReachedTEnd) {
    rec.reason = LifespanReason::NoBlowupWithinHorizon;
    rec.blew_up = false;
    rec.steps = scout.steps;
    rec.dt_final = scout_rep.dt_final;
    return rec;
  }

  // Refined window: restart below theta_low/4 with a four-fold finer step
  // and record the crossings of all three thresholds in one continuation
  // (deterministic stepping makes this identical to separate reruns).  The
  // scout has a safe state whenever theta >= 1e3 * max|u(0)| and the span is
  // at default geometry; a fresh start covers pathological detectors.
  SimState fine = scout_rep.safe_state ? *scout_rep.safe_state
                                       : init_state(prm, data, grid);
  StepControls fctl = ctl;
  fctl.stop_theta = det.theta_high;
  fctl.watch_thetas = {det.theta_low, det.theta, det.theta_high};
  fctl.safe_theta = 0.0;
  fctl.dt_init = 0.25 * fine.dt;
  const IntegrationReport fine_rep = integrate(fine, prm, stepper, fctl);

  rec.reason = detail::map_reason(fine_rep.reason);
  rec.steps = fine.steps;
  const ThetaCrossing* cm = detail::find_crossing(fine_rep.crossings, det.theta);
  if (cm == nullptr) {
    // never reached theta again (horizon, underflow, or overflow first)
    rec.blew_up = false;
    rec.dt_final = fine_rep.dt_final;
    return rec;
  }
  rec.blew_up = true;
  // The continuation past theta (chasing theta_high for the insensitivity
  // spread) may end in dt underflow at the singularity; the estimate itself
  // is the bracketed crossing, so that is the reason reported.
  rec.reason = LifespanReason::ThresholdCrossed;
  rec.T_lo = cm->t_below;
  rec.T_hi = cm->t_cross;
  rec.lifespan = 0.5 * (cm->t_below + cm->t_cross);
  rec.confirmed = cm->confirmed;
  rec.dt_final = cm->dt_at_cross;

  const ThetaCrossing* clo =
      detail::find_crossing(fine_rep.crossings, det.theta_low);
  const ThetaCrossing* chi =
      detail::find_crossing(fine_rep.crossings, det.theta_high);
  double spread = 0.0;
  bool have_alternate = false;
  for (const ThetaCrossing* c : {clo, chi}) {
    if (c == nullptr) continue;
    const double mid = 0.5 * (c->t_below + c->t_cross);
    spread = std::max(spread, std::abs(mid - rec.lifespan) /
                                  std::max(rec.lifespan, 1e-300));
    have_alternate = true;
  }
  if (have_alternate) rec.insensitivity_ratio = spread;
  return rec;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Worker-pool size: NLDW_WORKERS if set, else the hardware concurrency.
inline int sweep_workers() {
  if (const char* env = std::getenv("NLDW_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Independent estimate_lifespan per epsilon (strictly decreasing, all > 0).
/// Per-point failures are recorded in the returned records; the sweep
/// continues.  Results are ordered exactly as the input epsilons.
inline std::vector<LifespanRecord> sweep(const ProblemParams& prm_template,
                                         const InitialData& data,
                                         const Grid& grid,
                                         const BlowupDetector& det,
                                         const std::vector<double>& epsilons,
                                         double horizon,
                                         int workers = sweep_workers()) {
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw OutOfRange("sweep: epsilons must be > 0");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
      throw OutOfRange("sweep: epsilons must be strictly decreasing");
    }
  }
  std::vector<LifespanRecord> records(epsilons.size());
  if (epsilons.empty()) return records;

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= epsilons.size()) return;
      ProblemParams prm = prm_template;
      prm.epsilon = epsilons[i];
      try {
        records[i] = estimate_lifespan(prm, data, grid, det, horizon);
      } catch (const Error& e) {
        records[i] = LifespanRecord{};
        records[i].epsilon = epsilons[i];
        records[i].theta_used = det.theta;
        records[i].error = e.what();
      }
    }
  };

  const int n_threads =
      std::max(1, std::min<int>(workers, static_cast<int>(epsilons.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

/// Non-strict monotonicity of T over a decreasing-epsilon sweep: smaller data
/// must not blow up sooner.  Records that did not blow up are skipped.
inline bool sweep_monotone(const std::vector<LifespanRecord>& records) {
  double t_prev = -std::numeric_limits<double>::infinity();
  for (const auto& r : records) {  // epsilon strictly decreasing
    if (!r.accepted()) continue;
    if (r.lifespan < t_prev) return false;
    t_prev = r.lifespan;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Scaling fits
// ---------------------------------------------------------------------------

enum class ScalingRegime { SubcriticalPoly, CriticalExp, CriticalDoubleExp };

inline const char* scaling_regime_name(ScalingRegime r) {
  switch (r) {
    case ScalingRegime::SubcriticalPoly: return "subcritical_poly";
    case ScalingRegime::CriticalExp: return "critical_exp";
    case ScalingRegime::CriticalDoubleExp: return "critical_double_exp";
  }
  return "unknown";
}

inline ScalingRegime parse_scaling_regime(const std::string& name) {
  if (name == "subcritical_poly") return ScalingRegime::SubcriticalPoly;
  if (name == "critical_exp") return ScalingRegime::CriticalExp;
  if (name == "critical_double_exp") return ScalingRegime::CriticalDoubleExp;
  throw OutOfRange("unknown scaling regime: " + name);
}

struct ScalingFit {
  ScalingRegime regime = ScalingRegime::SubcriticalPoly;
  std::vector<double> xs, ys;  // transformed coordinates, epsilon-ascending
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n_points = 0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Straight-line least squares in long double; r^2 clamped to [0, 1].
/// Exactly constant ys count as a perfect fit (the line hits every point).
inline LinearFit linear_fit(const std::vector<double>& xs,
                            const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n) {
    throw InsufficientPoints("linear_fit: need >= 2 matched points");
  }
  long double sx = 0.0L, sy = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const long double mx = sx / static_cast<long double>(n);
  const long double my = sy / static_cast<long double>(n);
  long double sxx = 0.0L, sxy = 0.0L, syy = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const long double dx = xs[i] - mx;
    const long double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0L)) {
    throw OutOfRange("linear_fit: degenerate abscissae (all x equal)");
  }
  LinearFit fit;
  fit.slope = static_cast<double>(sxy / sxx);
  fit.intercept = static_cast<double>(my - (sxy / sxx) * mx);
  if (syy > 0.0L) {
    long double r2 = (sxy * sxy) / (sxx * syy);
    if (r2 > 1.0L) r2 = 1.0L;
    if (r2 < 0.0L) r2 = 0.0L;
    fit.r_squared = static_cast<double>(r2);
  } else {
    fit.r_squared = 1.0;
  }
  return fit;
}

/// Predicted subcritical power of the lifespan law T ~ eps^(-nu):
/// nu = 1 / ((1/(p-1) - n/2) (1+beta)), defined for p below Fujita.
inline double subcritical_exponent(int dim, double p, double beta) {
  const double gap = 1.0 / (p - 1.0) - 0.5 * dim;
  if (!(gap > 0.0)) {
    throw OutOfRange("subcritical_exponent: p must lie below Fujita");
  }
  return 1.0 / (gap * (1.0 + beta));
}

/// Least-squares line through the regime's transformed coordinates:
///   SubcriticalPoly:    (log eps,        log T)
///   CriticalExp:        (eps^-(p-1),     log T)
///   CriticalDoubleExp:  (eps^-(p-1),     log log T)
/// T is the bracket midpoint.  Records that did not blow up (or whose T
/// cannot be transformed) are excluded.  The fit is bitwise independent of
/// record order: points are sorted by epsilon first.
inline ScalingFit fit_scaling(const std::vector<LifespanRecord>& records,
                              ScalingRegime regime, double p) {
  if (regime != ScalingRegime::SubcriticalPoly && !(p > 1.0)) {
    throw OutOfRange("fit_scaling: p must be > 1 for critical regimes");
  }
  std::vector<std::pair<double, double>> pts;  // (epsilon, T)
  for (const auto& r : records) {
    if (!r.accepted()) continue;
    const double T = r.lifespan;
    if (!(T > 0.0)) continue;
    if (regime == ScalingRegime::CriticalDoubleExp && !(std::log(T) > 0.0)) {
      continue;  // log log T needs T > 1
    }
    pts.emplace_back(r.epsilon, T);
  }
  std::sort(pts.begin(), pts.end());
  if (pts.size() < 3) {
    throw InsufficientPoints("fit_scaling: need at least 3 usable records, have " +
                             std::to_string(pts.size()));
  }

  ScalingFit fit;
  fit.regime = regime;
  fit.n_points = pts.size();
  for (const auto& [eps, T] : pts) {
    double x = 0.0, y = 0.0;
    switch (regime) {
      case ScalingRegime::SubcriticalPoly:
        x = std::log(eps);
        y = std::log(T);
        break;
      case ScalingRegime::CriticalExp:
        x = std::pow(eps, -(p - 1.0));
        y = std::log(T);
        break;
      case ScalingRegime::CriticalDoubleExp:
        x = std::pow(eps, -(p - 1.0));
        y = std::log(std::log(T));
        break;
    }
    fit.xs.push_back(x);
    fit.ys.push_back(y);
  }

  const LinearFit line = linear_fit(fit.xs, fit.ys);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.r_squared = line.r_squared;
  return fit;
}

}  // namespace nldw
