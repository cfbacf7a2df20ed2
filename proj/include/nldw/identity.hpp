#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nldw/aux_functions.hpp"
#include "nldw/errors.hpp"
#include "nldw/grid.hpp"
#include "nldw/heat_kernel.hpp"
#include "nldw/solver.hpp"

namespace nldw {

// ============================================================================
// Heat-kernel identity certificate
// ============================================================================
//
// For a solution of the damped wave problem, the Duhamel/heat-kernel algebra
// gives an exact identity among five Gaussian-weighted functionals,
//
//     A(t) + B(t) = C(t) + D(t) + E(t),
//
//     A = ∫ w u dx,           w(x) = exp(-|x|^2 / 4(G(t)+1)),
//     B = g(t) ∫ w u_t dx,
//     C = eps (4pi(G+1))^(n/2) ∫ K(2G+1, x) (u0 + g(0) u1) dx,
//     D =     (4pi(G+1))^(n/2) ∫_0^t g(s)  ∫ K (2G(t)-G(s)+1, x) |u|^p dx ds,
//     E =    -(4pi(G+1))^(n/2) ∫_0^t g(s)^2 ∫ K'(2G(t)-G(s)+1, x) u_s dx ds,
//
// with K the Gaussian heat kernel and K' its tau-derivative.  Evaluating all
// five on a stored trajectory certifies solver + auxiliary functions at once:
// every module's output enters the residual.  With the nonlinearity switched
// off the same algebra holds with D absent.
//
// All whole-space integrals truncate to the periodic box; the guard
// L >= 8 sqrt(2G(t)+1) keeps the truncation below ~1e-12 relative and limits
// how far in t the certificate reaches.  The margin L - 8 sqrt(2G+1) is
// reported alongside every residual.

namespace detail {

/// ∫ f(x) exp(-|x|^2 / 4 tau) dx over the box (tau > 0).
inline double weighted_mass(const Field& f, double tau) {
  if (!(tau > 0.0)) throw OutOfRange("weighted_mass: tau must be > 0");
  const Grid& g = f.grid;
  long double acc = 0.0L;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    acc += static_cast<long double>(f.values[i]) *
           std::exp(-g.r2_to(i, 0.0, 0.0) / (4.0 * tau));
  }
  return static_cast<double>(acc) * f.grid.cell_volume();
}

/// ∫ f(x) (|x|^2 / 4 tau) exp(-|x|^2 / 4 tau) dx over the box.
inline double weighted_second_moment(const Field& f, double tau) {
  if (!(tau > 0.0)) throw OutOfRange("weighted_second_moment: tau <= 0");
  const Grid& g = f.grid;
  long double acc = 0.0L;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double z = g.r2_to(i, 0.0, 0.0) / (4.0 * tau);
    acc += static_cast<long double>(f.values[i]) * z * std::exp(-z);
  }
  return static_cast<double>(acc) * f.grid.cell_volume();
}

inline double box_prefactor(int dim, double gp1) {
  return std::pow(4.0 * M_PI * gp1, 0.5 * dim);
}

/// Inner product ∫ k(x) f(x) dx of a sampled kernel with a field.
inline double kernel_dot(const Field& k, const Field& f) {
  require_same_grid(k, f, "identity kernel_dot");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < k.values.size(); ++i) {
    acc += static_cast<long double>(k.values[i]) * f.values[i];
  }
  return static_cast<double>(acc) * k.grid.cell_volume();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// The five terms
// ---------------------------------------------------------------------------

/// A(t) = ∫ exp(-|x|^2/4(G(t)+1)) u(t,x) dx.
inline double term_A(const Field& u, double t, const AuxFunctions& aux) {
  return detail::weighted_mass(u, aux.G(t) + 1.0);
}

/// B(t) = g(t) ∫ exp(-|x|^2/4(G(t)+1)) u_t(t,x) dx.
inline double term_B(const Field& v, double t, const AuxFunctions& aux) {
  return aux.g(t) * detail::weighted_mass(v, aux.G(t) + 1.0);
}

/// C(t) = eps (4pi(G+1))^(n/2) ∫ K(2G(t)+1, x)(u0 + g(0) u1)(x) dx.
/// Throws DomainTooSmall when L < 8 sqrt(2G(t)+1).
inline double term_C(const InitialData& data, double epsilon, double t,
                     const AuxFunctions& aux, const Grid& grid) {
  const double gp1 = aux.G(t) + 1.0;
  const Field kernel = gaussian(grid, 2.0 * aux.G(t) + 1.0);
  Field combo = data.sample_u0(grid);
  const Field u1 = data.sample_u1(grid);
  const double g0 = aux.g(0.0);  // = b*
  for (std::size_t i = 0; i < combo.values.size(); ++i) {
    combo.values[i] += g0 * u1.values[i];
  }
  return epsilon * detail::box_prefactor(grid.dim, gp1) *
         detail::kernel_dot(kernel, combo);
}

namespace detail {

/// Snapshots with time <= t (+slack).  The store must hold at least 4
/// snapshots overall (history quality) and span [0, t].
inline std::vector<const SnapshotStore::Entry*> history_upto(
    const SnapshotStore& store, double t) {
  const auto& all = store.entries();
  if (all.size() < 4) {
    throw InsufficientSnapshots("identity: need at least 4 stored snapshots");
  }
  if (all.front().t != 0.0) {
    throw InsufficientSnapshots("identity: history must start at t = 0");
  }
  const double slack = 1e-12 * (1.0 + std::abs(t));
  std::vector<const SnapshotStore::Entry*> hist;
  for (const auto& e : all) {
    if (e.t <= t + slack) hist.push_back(&e);
  }
  if (hist.empty() || hist.back()->t < t - slack) {
    throw InsufficientSnapshots("identity: snapshots do not span [0, t]");
  }
  return hist;
}

}  // namespace detail

/// D(t) = (4pi(G+1))^(n/2) ∫_0^t g(s) ∫ K(2G(t)-G(s)+1, x)|u(s,x)|^p dx ds,
/// trapezoid in s over the stored snapshots.  D >= 0 always.
inline double term_D(const SnapshotStore& store, double t,
                     const AuxFunctions& aux, double p) {
  const auto hist = detail::history_upto(store, t);
  if (t == 0.0 || hist.size() == 1) return 0.0;
  const double Gt = aux.G(t);
  const Grid& grid = hist.front()->u.grid;

  std::vector<double> vals(hist.size());
  for (std::size_t k = 0; k < hist.size(); ++k) {
    const double s = hist[k]->t;
    const Field kernel = gaussian(grid, 2.0 * Gt - aux.G(s) + 1.0);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < kernel.values.size(); ++i) {
      acc += static_cast<long double>(kernel.values[i]) *
             std::pow(std::abs(hist[k]->u.values[i]), p);
    }
    vals[k] = aux.g(s) * static_cast<double>(acc) * grid.cell_volume();
  }
  long double integral = 0.0L;
  for (std::size_t k = 1; k < hist.size(); ++k) {
    integral += 0.5L * (vals[k - 1] + vals[k]) * (hist[k]->t - hist[k - 1]->t);
  }
  return detail::box_prefactor(grid.dim, Gt + 1.0) *
         static_cast<double>(integral);
}

/// E(t) = -(4pi(G+1))^(n/2) ∫_0^t g(s)^2 ∫ K'(2G(t)-G(s)+1, x) u_s(s,x) dx ds.
inline double term_E(const SnapshotStore& store, double t,
                     const AuxFunctions& aux) {
  const auto hist = detail::history_upto(store, t);
  if (t == 0.0 || hist.size() == 1) return 0.0;
  const double Gt = aux.G(t);
  const Grid& grid = hist.front()->u.grid;

  std::vector<double> vals(hist.size());
  for (std::size_t k = 0; k < hist.size(); ++k) {
    const double s = hist[k]->t;
    const Field kernel = gaussian_dt(grid, 2.0 * Gt - aux.G(s) + 1.0);
    const double gs = aux.g(s);
    vals[k] = gs * gs * detail::kernel_dot(kernel, hist[k]->v);
  }
  long double integral = 0.0L;
  for (std::size_t k = 1; k < hist.size(); ++k) {
    integral += 0.5L * (vals[k - 1] + vals[k]) * (hist[k]->t - hist[k - 1]->t);
  }
  return -detail::box_prefactor(grid.dim, Gt + 1.0) *
         static_cast<double>(integral);
}

// ---------------------------------------------------------------------------
// The limit functional H(t) and its limit J0
// ---------------------------------------------------------------------------

/// H(t) = ((G+1)/(2G+1))^(n/2) [ ∫ w (u0 + g(0)u1) dx
///        + (n g(0)^2 / 2(2G+1)) ∫ w u0 dx
///        - (g(0)^2 / (2G+1)) ∫ (|x|^2/4(2G+1)) w u0 dx ],
/// with w(x) = exp(-|x|^2/4(2G+1)).  H(t) -> J0 as t -> infinity.
inline double functional_H(double t, const AuxFunctions& aux,
                           const InitialData& data, const Grid& grid) {
  const double Gt = aux.G(t);
  const double q = 2.0 * Gt + 1.0;
  if (grid.half_width < 8.0 * std::sqrt(q)) {
    throw DomainTooSmall("functional_H: box requires L >= 8 sqrt(2G+1)");
  }
  const double g0 = aux.g(0.0);
  const Field u0 = data.sample_u0(grid);
  const Field u1 = data.sample_u1(grid);
  Field combo = u0;
  for (std::size_t i = 0; i < combo.values.size(); ++i) {
    combo.values[i] += g0 * u1.values[i];
  }
  const double n = static_cast<double>(grid.dim);
  const double t1 = detail::weighted_mass(combo, q);
  const double t2 = (n * g0 * g0 / (2.0 * q)) * detail::weighted_mass(u0, q);
  const double t3 = (g0 * g0 / q) * detail::weighted_second_moment(u0, q);
  return std::pow((Gt + 1.0) / q, 0.5 * n) * (t1 + t2 - t3);
}

/// J0 = 2^(-n/2) ∫ (u0 + g(0) u1) dx; positive exactly when the data satisfy
/// the sign hypothesis of the blow-up theorem on the same quadrature.
inline double estimate_J0(const AuxFunctions& aux, const InitialData& data,
                          const Grid& grid) {
  const double g0 = aux.g(0.0);
  const double mass =
      data.sample_u0(grid).integral() + g0 * data.sample_u1(grid).integral();
  return std::pow(2.0, -0.5 * grid.dim) * mass;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct IdentityReport {
  std::vector<double> times;  // snapped to snapshot times
  std::vector<double> A, B, C, D, E;
  std::vector<double> residual;           // |A+B-C-D-E| (D dropped if linear)
  std::vector<double> relative_residual;  // residual / sum |terms|
  std::vector<double> H;
  std::vector<double> margin;  // L - 8 sqrt(2G(t)+1), the certificate budget
  std::vector<std::string> notes;  // per-time failure notes, "" when clean
  double J0 = 0.0;
  bool linear_run = false;

  double max_relative_residual() const {
    double m = 0.0;
    for (std::size_t i = 0; i < relative_residual.size(); ++i) {
      if (notes[i].empty()) m = std::max(m, relative_residual[i]);
    }
    return m;
  }
};

/// Evaluate the identity at the snapshot times nearest to each requested
/// time.  Per-time failures are recorded in `notes` and evaluation continues.
/// For a linear run (nonlinearity off) the identity is A+B = C+E; D is still
/// reported as a diagnostic but excluded from the residual.
inline IdentityReport identity_report(const SnapshotStore& store,
                                      const AuxFunctions& aux,
                                      const InitialData& data, double epsilon,
                                      double p, const std::vector<double>& times,
                                      bool linear_run = false) {
  const auto& entries = store.entries();
  if (entries.size() < 4) {
    throw InsufficientSnapshots("identity_report: need at least 4 snapshots");
  }
  const Grid& grid = entries.front().u.grid;
  IdentityReport rep;
  rep.linear_run = linear_run;
  rep.J0 = estimate_J0(aux, data, grid);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const double t_req : times) {
    // snap to the nearest stored time
    const auto it = std::min_element(
        entries.begin(), entries.end(), [&](const auto& a, const auto& b) {
          return std::abs(a.t - t_req) < std::abs(b.t - t_req);
        });
    const double t = it->t;
    rep.times.push_back(t);
    rep.margin.push_back(grid.half_width -
                         8.0 * std::sqrt(2.0 * aux.G(t) + 1.0));
    try {
      const double a = term_A(it->u, t, aux);
      const double b = term_B(it->v, t, aux);
      const double c = term_C(data, epsilon, t, aux, grid);
      const double d = term_D(store, t, aux, p);
      const double e = term_E(store, t, aux);
      const double res =
          std::abs(a + b - c - (linear_run ? 0.0 : d) - e);
      const double denom = std::abs(a) + std::abs(b) + std::abs(c) +
                           std::abs(d) + std::abs(e);
      rep.A.push_back(a);
      rep.B.push_back(b);
      rep.C.push_back(c);
      rep.D.push_back(d);
      rep.E.push_back(e);
      rep.residual.push_back(res);
      rep.relative_residual.push_back(denom > 0.0 ? res / denom : 0.0);
      rep.H.push_back(functional_H(t, aux, data, grid));
      rep.notes.emplace_back();
    } catch (const Error& err) {
      for (auto* col : {&rep.A, &rep.B, &rep.C, &rep.D, &rep.E, &rep.residual,
                        &rep.relative_residual, &rep.H}) {
        col->push_back(nan);
      }
      rep.notes.emplace_back(err.what());
    }
  }
  return rep;
}

}  // namespace nldw
