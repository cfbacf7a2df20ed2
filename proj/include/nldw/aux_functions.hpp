#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "nldw/damping.hpp"
#include "nldw/errors.hpp"
#include "nldw/interp.hpp"
#include "nldw/quadrature.hpp"

namespace nldw {

// ============================================================================
// Auxiliary functions of the damping coefficient
// ============================================================================
//
// The diffusive change of variables hinges on the solution g of
//     g'(t) = b(t) g(t) - 1,   g(0) = b* := ∫_0^∞ exp(-B(tau)) dtau,
// whose forward integration is violently unstable (the homogeneous mode grows
// like exp(B)).  Everything here therefore evaluates the rearranged tail form
//     g(t) = ∫_0^∞ exp(-(B(t+s) - B(t))) ds,
// which is a plain decaying integral at every t.  On top of g sit the
// cumulative integrals G(t) = ∫_0^t g and Gamma(t) = ∫_0^t 1/g.

/// b* = g(0): tail integral of exp(-B).
inline double compute_b_star(const DampingModel& model, double rel_tol = 1e-10) {
  const double scale = 1.0;  // b(0) = 1 for the power-law family
  return semi_infinite_integral(
      [&](double s) { return std::exp(-model.B_between(0.0, s)); }, scale,
      rel_tol);
}

/// g(t) by the tail form.  The first quadrature panel is sized by the local
/// decay length 1/b(t) = (t+1)^beta.
inline double compute_g(const DampingModel& model, double t,
                        double rel_tol = 1e-10) {
  if (!(t >= 0.0)) throw OutOfRange("compute_g: time must be >= 0");
  const double scale = std::pow(t + 1.0, model.beta());
  return semi_infinite_integral(
      [&](double s) { return std::exp(-model.B_between(t, s)); }, scale,
      rel_tol);
}

/// Diagnostics for the asymptotic statements tested at a probe time:
///   (i)   b(t) g(t) -> 1,
///   (ii)  g comparable to 1/b,
///   (iii) g'(t) / (d/dt b^{-1})(t) = g' / (-b' b^{-2}) -> 1,
///   (iv)  G+1 grows like (t+1)^(beta+1)  (like log(t+1)+1 when beta = -1),
///   (v)   Gamma+1 grows like (t+1)^(1-beta).
struct Lemma22Report {
  double t_probe = 0.0;
  double bg_minus_one = 0.0;      // (i)
  double g_times_b = 0.0;         // (ii), same quantity as (i)+1
  double gprime_ratio = 0.0;      // (iii); NaN when b' == 0 (beta = 0)
  double G_log_slope = 0.0;       // (iv) in the coordinate noted below
  double gamma_log_slope = 0.0;   // (v) d log(Gamma+1) / d log(t+1)
  bool G_slope_in_loglog = false; // true iff beta = -1: slope taken against
                                  // log(log(t+1)+1) instead of log(t+1)
  double G_slope_expected = 0.0;  // beta+1, or 1 in the log-log coordinate
  double gamma_slope_expected = 0.0;  // 1 - beta
};

/// Sampled auxiliary curves on a geometric time grid t_k + 1 = r^k with
/// monotone-cubic queries between nodes.  The grid is geometric so the
/// log-time asymptotics are resolved with uniform relative spacing.
class AuxFunctions {
 public:
  AuxFunctions(const DampingModel& model, double t_max, std::size_t samples,
               double rel_tol = 1e-10)
      : model_(model), t_max_(t_max), rel_tol_(rel_tol) {
    if (!(t_max > 0.0)) throw OutOfRange("AuxFunctions: t_max must be > 0");
    if (samples < 16) throw OutOfRange("AuxFunctions: need >= 16 samples");
    b_star_ = compute_b_star(model_, rel_tol_);

    const std::size_t m = samples;
    const double xi_max = std::log1p(t_max);
    xi_.resize(m);
    t_.resize(m);
    g_.resize(m);
    gp_.resize(m);
    G_.resize(m);
    Gamma_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      xi_[k] = xi_max * static_cast<double>(k) / static_cast<double>(m - 1);
      t_[k] = std::expm1(xi_[k]);
      g_[k] = (k == 0) ? b_star_ : compute_g(model_, t_[k], rel_tol_);
      gp_[k] = model_.b(t_[k]) * g_[k] - 1.0;  // the defining ODE, exactly
    }

    // Cumulative integrals by composite Simpson per panel, taken in the
    // log-time variable xi = log(t+1):  ∫ f dt = ∫ f(e^xi - 1) e^xi dxi.
    G_[0] = 0.0;
    Gamma_[0] = 0.0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
      const double xi_mid = 0.5 * (xi_[k] + xi_[k + 1]);
      const double t_mid = std::expm1(xi_mid);
      const double g_mid = compute_g(model_, t_mid, rel_tol_);
      const double w = (xi_[k + 1] - xi_[k]) / 6.0;
      const double e0 = t_[k] + 1.0;
      const double em = t_mid + 1.0;
      const double e1 = t_[k + 1] + 1.0;
      G_[k + 1] = G_[k] + w * (g_[k] * e0 + 4.0 * g_mid * em + g_[k + 1] * e1);
      Gamma_[k + 1] =
          Gamma_[k] + w * (e0 / g_[k] + 4.0 * em / g_mid + e1 / g_[k + 1]);
    }

    g_curve_ = MonotoneCubic(xi_, g_);
    gp_curve_ = MonotoneCubic(xi_, gp_);
    G_curve_ = MonotoneCubic(xi_, G_);
    Gamma_curve_ = MonotoneCubic(xi_, Gamma_);
  }

  const DampingModel& model() const { return model_; }
  double t_max() const { return t_max_; }
  std::size_t samples() const { return t_.size(); }
  double b_star() const { return b_star_; }

  double g(double t) const { return g_curve_(xi_of(t)); }
  double g_prime(double t) const { return gp_curve_(xi_of(t)); }
  double G(double t) const { return G_curve_(xi_of(t)); }
  double Gamma(double t) const { return Gamma_curve_(xi_of(t)); }

  /// d/dt of the interpolated g curve (not the ODE identity); lets callers
  /// cross-check g' = b g - 1 against the cached curve itself.
  double g_interp_derivative(double t) const {
    const double xi = xi_of(t);
    return g_curve_.derivative(xi) / (t + 1.0);
  }

  /// Smallest time with G(t) >= target, by bisection on the cached curve.
  double time_at_G(double target) const {
    if (!(target >= 0.0)) throw OutOfRange("time_at_G: target must be >= 0");
    if (target > G_.back()) {
      throw OutOfRange("time_at_G: target beyond cached range");
    }
    double lo = 0.0, hi = xi_.back();
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (G_curve_(mid) >= target ? hi : lo) = mid;
    }
    return std::expm1(hi);
  }

  // Raw node access for diagnostics and tests.
  const std::vector<double>& nodes_t() const { return t_; }
  const std::vector<double>& nodes_g() const { return g_; }
  const std::vector<double>& nodes_G() const { return G_; }
  const std::vector<double>& nodes_Gamma() const { return Gamma_; }

 private:
  double xi_of(double t) const {
    if (!(t >= 0.0 && t <= t_max_)) {
      throw OutOfRange("AuxFunctions: query outside [0, t_max]");
    }
    return std::log1p(t);
  }

  DampingModel model_;
  double t_max_;
  double rel_tol_;
  double b_star_ = 0.0;
  std::vector<double> xi_, t_, g_, gp_, G_, Gamma_;
  MonotoneCubic g_curve_, gp_curve_, G_curve_, Gamma_curve_;
};

/// Evaluate the Lemma-style asymptotic diagnostics at t_probe.  Log-log
/// slopes are centered differences over a two-node stencil of the cached
/// geometric grid, so t_probe must sit at least two nodes away from either
/// end of the grid.
inline Lemma22Report validate_lemma22(const AuxFunctions& aux, double t_probe) {
  const auto& t = aux.nodes_t();
  const auto& G = aux.nodes_G();
  const auto& Gam = aux.nodes_Gamma();
  const std::size_t m = t.size();
  if (!(t_probe > 0.0 && t_probe <= aux.t_max())) {
    throw OutOfRange("validate_lemma22: probe outside grid");
  }
  // Nearest node index in xi-space.
  const double xi_probe = std::log1p(t_probe);
  const double xi_max = std::log1p(aux.t_max());
  std::size_t k = static_cast<std::size_t>(
      std::lround(xi_probe / xi_max * static_cast<double>(m - 1)));
  if (k < 2) k = 2;
  if (k + 2 >= m) k = m - 3;

  const DampingModel& model = aux.model();
  const double beta = model.beta();
  Lemma22Report rep;
  rep.t_probe = t[k];
  const double bg = model.b(t[k]) * aux.nodes_g()[k];
  rep.g_times_b = bg;
  rep.bg_minus_one = bg - 1.0;

  const double bp = model.b_prime(t[k]);
  if (bp == 0.0) {
    rep.gprime_ratio = std::numeric_limits<double>::quiet_NaN();
  } else {
    const double dinv_b = -bp / (model.b(t[k]) * model.b(t[k]));
    rep.gprime_ratio = (model.b(t[k]) * aux.nodes_g()[k] - 1.0) / dinv_b;
  }

  const auto log_slope = [&](const std::vector<double>& y, bool loglog_abscissa) {
    const double yp = std::log(y[k + 2] + 1.0);
    const double ym = std::log(y[k - 2] + 1.0);
    double xp = std::log1p(t[k + 2]);
    double xm = std::log1p(t[k - 2]);
    if (loglog_abscissa) {
      xp = std::log1p(xp);
      xm = std::log1p(xm);
    }
    return (yp - ym) / (xp - xm);
  };

  rep.G_slope_in_loglog = (beta == -1.0);
  rep.G_log_slope = log_slope(G, rep.G_slope_in_loglog);
  rep.G_slope_expected = rep.G_slope_in_loglog ? 1.0 : beta + 1.0;
  rep.gamma_log_slope = log_slope(Gam, false);
  rep.gamma_slope_expected = 1.0 - beta;
  return rep;
}

}  // namespace nldw
