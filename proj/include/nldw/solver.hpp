#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "nldw/aux_functions.hpp"
#include "nldw/damping.hpp"
#include "nldw/errors.hpp"
#include "nldw/fft.hpp"
#include "nldw/grid.hpp"

namespace nldw {

// ============================================================================
// Semilinear damped wave solver
// ============================================================================
//
// First-order form of  u_tt - Lap u + b(t) u_t = |u|^p  on the periodic box:
//     u' = v,    v' = Lap u - b(t) v + |u|^p,
// advanced by classical RK4 with a Fourier-spectral Laplacian.  Blow-up is
// the object of study, so the step controller only ever shrinks dt: whenever
// max|u| doubles within ten accepted steps the step halves (floor 1e-8).

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

enum class DataShape { GaussianBump, CompactBump };

struct InitialData {
  DataShape shape = DataShape::GaussianBump;
  double amplitude_u0 = 1.0;  // u0 = amplitude_u0 * phi
  double amplitude_u1 = 0.0;  // u1 = amplitude_u1 * phi
  double width = 1.0;
  double offset = 0.0;  // bump center along each axis

  /// Unit-peak profile as a function of squared distance to the center.
  double profile(double r2) const {
    if (!(width > 0.0)) throw OutOfRange("InitialData: width must be > 0");
    const double w2 = width * width;
    if (shape == DataShape::GaussianBump) return std::exp(-r2 / w2);
    const double rho2 = r2 / w2;
    return rho2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - rho2)) : 0.0;
  }

  Field sample_u0(const Grid& g) const {
    return Field::sample_radial(
        g, [&](double r2) { return amplitude_u0 * profile(r2); }, offset,
        offset);
  }

  Field sample_u1(const Grid& g) const {
    return Field::sample_radial(
        g, [&](double r2) { return amplitude_u1 * profile(r2); }, offset,
        offset);
  }

  /// Radius outside which the profile is numerically negligible.
  double support_radius() const {
    return shape == DataShape::CompactBump ? width : 6.1 * width;
  }
};

// ---------------------------------------------------------------------------
// Problem parameters and state
// ---------------------------------------------------------------------------

struct ProblemParams {
  int dim = 1;
  double p = 2.0;          // nonlinearity exponent, > 1
  double epsilon = 1.0;    // data size, >= 0
  DampingModel damping{0.0};
  bool nonlinearity_on = true;
  bool damping_on = true;
  bool theorem_regime = true;  // enforce the sign hypothesis on the data
  double cfl = 0.5;
  double dt_cap = 0.1;

  void validate(const Grid& grid) const {
    if (!(p > 1.0)) throw OutOfRange("ProblemParams: p must be > 1");
    if (!(epsilon >= 0.0)) throw OutOfRange("ProblemParams: epsilon < 0");
    if (!(cfl > 0.0 && cfl <= 1.0)) {
      throw OutOfRange("ProblemParams: cfl must lie in (0, 1]");
    }
    if (!(dt_cap > 0.0)) throw OutOfRange("ProblemParams: dt_cap must be > 0");
    if (dim != grid.dim) {
      throw GridMismatch("ProblemParams: dim does not match the grid");
    }
  }
};

struct SimState {
  double t = 0.0;
  Field u, v;
  std::uint64_t steps = 0;
  double dt = 0.0;  // current step size
};

/// Fujita exponent 1 + 2/n, the critical power for these scaling laws.
inline double fujita_exponent(int dim) { return 1.0 + 2.0 / dim; }

/// Initial state eps*(u0, u1).  In the theorem regime the discrete positivity
/// functional ∫(u0 + b* u1) dx of the *unscaled* data must be positive.
inline SimState init_state(const ProblemParams& prm, const InitialData& data,
                           const Grid& grid) {
  prm.validate(grid);
  Field phi0 = data.sample_u0(grid);
  Field phi1 = data.sample_u1(grid);
  if (prm.theorem_regime && prm.nonlinearity_on) {
    const double b_star = compute_b_star(prm.damping);
    const double q = phi0.integral() + b_star * phi1.integral();
    if (!(q > 0.0)) {
      throw PositivityViolation(
          "init_state: theorem-regime data must satisfy "
          "∫(u0 + b* u1) dx > 0; got " +
          std::to_string(q));
    }
  }
  SimState s;
  s.t = 0.0;
  s.steps = 0;
  s.u = std::move(phi0);
  s.v = std::move(phi1);
  for (auto& x : s.u.values) x *= prm.epsilon;
  for (auto& x : s.v.values) x *= prm.epsilon;
  s.dt = std::min(prm.cfl * grid.dx(), prm.dt_cap);
  return s;
}

// ---------------------------------------------------------------------------
// Spectral operators
// ---------------------------------------------------------------------------

class SpectralLaplacian {
 public:
  explicit SpectralLaplacian(const Grid& g) : grid_(g) {
    const std::size_t n = g.points;
    if (n == 1) return;
    kaxis_.resize(n);
    const double k0 = M_PI / g.half_width;
    for (std::size_t j = 0; j < n; ++j) {
      const double m = (j <= n / 2) ? static_cast<double>(j)
                                    : static_cast<double>(j) -
                                          static_cast<double>(n);
      kaxis_[j] = k0 * m;
    }
    buf_.resize(g.size());
  }

  const Grid& grid() const { return grid_; }

  void laplacian(const std::vector<double>& in, std::vector<double>& out) {
    const std::size_t n = grid_.points;
    out.resize(in.size());
    if (n == 1) {  // single-mode grid: Lap == 0
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    for (std::size_t i = 0; i < in.size(); ++i) buf_[i] = in[i];
    if (grid_.dim == 1) {
      fft::transform(buf_, false);
      for (std::size_t j = 0; j < n; ++j) buf_[j] *= -kaxis_[j] * kaxis_[j];
      fft::transform(buf_, true);
    } else {
      fft::transform_2d(buf_, n, false);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          buf_[i * n + j] *= -(kaxis_[i] * kaxis_[i] + kaxis_[j] * kaxis_[j]);
        }
      }
      fft::transform_2d(buf_, n, true);
    }
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = buf_[i].real();
  }

  /// Spectral d/dx_axis (Nyquist mode dropped, as usual for odd derivatives).
  void derivative(const std::vector<double>& in, std::vector<double>& out,
                  int axis) {
    const std::size_t n = grid_.points;
    out.resize(in.size());
    if (n == 1) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    for (std::size_t i = 0; i < in.size(); ++i) buf_[i] = in[i];
    const auto mult = [&](std::size_t j) {
      return (j == n / 2) ? std::complex<double>(0.0, 0.0)
                          : std::complex<double>(0.0, kaxis_[j]);
    };
    if (grid_.dim == 1) {
      fft::transform(buf_, false);
      for (std::size_t j = 0; j < n; ++j) buf_[j] *= mult(j);
      fft::transform(buf_, true);
    } else {
      fft::transform_2d(buf_, n, false);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          buf_[i * n + j] *= mult(axis == 0 ? i : j);
        }
      }
      fft::transform_2d(buf_, n, true);
    }
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = buf_[i].real();
  }

 private:
  Grid grid_;
  std::vector<double> kaxis_;
  std::vector<std::complex<double>> buf_;
};

// ---------------------------------------------------------------------------
// RK4 stepper
// ---------------------------------------------------------------------------

class WaveStepper {
 public:
  explicit WaveStepper(const Grid& g) : lap_(g) {
    const std::size_t total = g.size();
    for (auto* w : {&k1u_, &k1v_, &k2u_, &k2v_, &k3u_, &k3v_, &k4u_, &k4v_,
                    &tu_, &tv_, &lapbuf_}) {
      w->resize(total);
    }
  }

  SpectralLaplacian& laplacian_op() { return lap_; }

  void step(SimState& s, const ProblemParams& prm, double dt) {
    const auto& u = s.u.values;
    const auto& v = s.v.values;
    const std::size_t total = u.size();
    rhs(s.t, prm, u, v, k1u_, k1v_);
    axpy(u, k1u_, 0.5 * dt, tu_);
    axpy(v, k1v_, 0.5 * dt, tv_);
    rhs(s.t + 0.5 * dt, prm, tu_, tv_, k2u_, k2v_);
    axpy(u, k2u_, 0.5 * dt, tu_);
    axpy(v, k2v_, 0.5 * dt, tv_);
    rhs(s.t + 0.5 * dt, prm, tu_, tv_, k3u_, k3v_);
    axpy(u, k3u_, dt, tu_);
    axpy(v, k3v_, dt, tv_);
    rhs(s.t + dt, prm, tu_, tv_, k4u_, k4v_);
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < total; ++i) {
      s.u.values[i] += w * (k1u_[i] + 2.0 * k2u_[i] + 2.0 * k3u_[i] + k4u_[i]);
      s.v.values[i] += w * (k1v_[i] + 2.0 * k2v_[i] + 2.0 * k3v_[i] + k4v_[i]);
    }
    s.t += dt;
    s.steps += 1;
    s.dt = dt;
  }

  /// E(t) = 1/2 ∫ (v^2 + |grad u|^2) dx.
  double energy(const SimState& s) {
    long double acc = 0.0L;
    for (double x : s.v.values) acc += static_cast<long double>(x) * x;
    const int naxes = s.u.grid.dim;
    for (int axis = 0; axis < naxes; ++axis) {
      lap_.derivative(s.u.values, lapbuf_, axis);
      for (double x : lapbuf_) acc += static_cast<long double>(x) * x;
    }
    return 0.5 * static_cast<double>(acc) * s.u.grid.cell_volume();
  }

 private:
  static void axpy(const std::vector<double>& y, const std::vector<double>& k,
                   double c, std::vector<double>& out) {
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + c * k[i];
  }

  /// |u|^p with the common integer powers fast-pathed.
  static double power_abs(double x, double p) {
    if (p == 2.0) return x * x;
    if (p == 3.0) {
      const double a = std::abs(x);
      return a * a * a;
    }
    return std::pow(std::abs(x), p);
  }

  void rhs(double t, const ProblemParams& prm, const std::vector<double>& u,
           const std::vector<double>& v, std::vector<double>& du,
           std::vector<double>& dv) {
    lap_.laplacian(u, dv);  // dv = Lap u
    const double bt = prm.damping_on ? prm.damping.b(t) : 0.0;
    const bool nl = prm.nonlinearity_on;
    const double p = prm.p;
    for (std::size_t i = 0; i < u.size(); ++i) {
      du[i] = v[i];
      dv[i] += -bt * v[i] + (nl ? power_abs(u[i], p) : 0.0);
    }
  }

  SpectralLaplacian lap_;
  std::vector<double> k1u_, k1v_, k2u_, k2v_, k3u_, k3v_, k4u_, k4v_, tu_,
      tv_, lapbuf_;
};

// ---------------------------------------------------------------------------
// Snapshot store
// ---------------------------------------------------------------------------

class SnapshotStore {
 public:
  struct Entry {
    double t;
    Field u, v;
  };

  enum class Mode { Off, Full };

  SnapshotStore() = default;
  SnapshotStore(Mode mode, int stride) : mode_(mode), stride_(stride) {
    if (stride < 1) throw OutOfRange("SnapshotStore: stride must be >= 1");
  }

  void offer(const SimState& s) {
    if (mode_ != Mode::Full) return;
    if (s.steps % static_cast<std::uint64_t>(stride_) == 0) push(s);
  }

  void finalize(const SimState& s) {
    if (mode_ != Mode::Full) return;
    if (entries_.empty() || entries_.back().t != s.t) push(s);
  }

  const std::vector<Entry>& entries() const { return entries_; }
  int stride() const { return stride_; }
  Mode mode() const { return mode_; }

  void push(const SimState& s) { entries_.push_back({s.t, s.u, s.v}); }

 private:
  Mode mode_ = Mode::Off;
  int stride_ = 8;
  std::vector<Entry> entries_;
};

// ---------------------------------------------------------------------------
// Driver loop
// ---------------------------------------------------------------------------

enum class StopReason { ReachedTEnd, ThresholdCrossed, Overflow, DtUnderflow };

inline const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::ReachedTEnd: return "reached_t_end";
    case StopReason::ThresholdCrossed: return "threshold_crossed";
    case StopReason::Overflow: return "overflow";
    case StopReason::DtUnderflow: return "dt_underflow";
  }
  return "unknown";
}

struct TrajectoryRow {
  double t, max_abs_u, l2_u, energy, dt;
};

struct ThetaCrossing {
  double theta = 0.0;
  double t_below = 0.0;     // last accepted time with max|u| < theta
  double t_cross = 0.0;     // first accepted time with max|u| >= theta
  double dt_at_cross = 0.0;
  bool confirmed = false;   // doubling interval < 10 dt at the crossing
};

struct StepControls {
  double t_end = 10.0;
  double dt_init = 0.0;          // 0: use state.dt
  double dt_floor = 1e-8;
  double stop_theta = 0.0;       // stop on first crossing of this threshold
  std::vector<double> watch_thetas;  // thresholds whose crossings to record
  bool confirm_doubling = true;
  double safe_theta = 0.0;       // keep the latest state at or below this
  SnapshotStore* store = nullptr;
  std::vector<TrajectoryRow>* trajectory = nullptr;
  int trajectory_stride = 1;
};

struct IntegrationReport {
  StopReason reason = StopReason::ReachedTEnd;
  double t_final = 0.0;
  double t_last_finite = 0.0;  // last time the state was finite (Overflow)
  double dt_final = 0.0;
  std::uint64_t steps = 0;
  std::vector<ThetaCrossing> crossings;
  std::optional<SimState> safe_state;
};

/// Advance `s` until t_end, a confirmed threshold crossing, overflow, or step
/// collapse.  The growth controller halves dt whenever max|u| doubles within
/// ten accepted steps.
inline IntegrationReport integrate(SimState& s, const ProblemParams& prm,
                                   WaveStepper& stepper,
                                   const StepControls& ctl) {
  IntegrationReport rep;
  double dt = ctl.dt_init > 0.0 ? ctl.dt_init : s.dt;
  if (!(dt > 0.0)) throw OutOfRange("integrate: no usable dt");
  // Confirmation yardstick: the nominal step of the run, not the
  // controller-shrunk one (which tracks ~1/10 of the doubling time by
  // construction and would veto genuine blow-ups).
  const double dt_base = dt;

  std::vector<double> thetas = ctl.watch_thetas;
  if (ctl.stop_theta > 0.0) thetas.push_back(ctl.stop_theta);
  std::sort(thetas.begin(), thetas.end());
  thetas.erase(std::unique(thetas.begin(), thetas.end()), thetas.end());
  std::vector<ThetaCrossing> cross(thetas.size());
  std::vector<bool> crossed(thetas.size(), false);
  std::vector<double> t_half(thetas.size(), 0.0);  // last time below theta/2
  std::vector<double> t_below(thetas.size(), 0.0); // last time below theta

  const auto record_row = [&](double m) {
    if (ctl.trajectory &&
        (s.steps % static_cast<std::uint64_t>(ctl.trajectory_stride) == 0)) {
      ctl.trajectory->push_back(
          {s.t, m, s.u.l2(), stepper.energy(s), dt});
    }
  };

  double m = s.u.max_abs();
  // Seed the bracket clocks from the starting state, not t = 0: a run
  // resumed mid-flight (the refined lifespan phase) may cross a threshold
  // on its very first step.
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    if (m <= 0.5 * thetas[k]) t_half[k] = s.t;
    if (m < thetas[k]) t_below[k] = s.t;
  }
  record_row(m);
  if (ctl.store) ctl.store->offer(s);
  if (ctl.safe_theta > 0.0 && m <= ctl.safe_theta) rep.safe_state = s;

  std::deque<double> window;  // recent max|u| values, oldest first
  window.push_back(m);

  SimState before;  // pre-step copy, restored when a step is rejected
  double t_prev = s.t;
  const double t_eps = 1e-12 * (1.0 + std::abs(ctl.t_end));
  while (true) {
    if (s.t >= ctl.t_end - t_eps) {
      rep.reason = StopReason::ReachedTEnd;
      break;
    }
    if (dt < ctl.dt_floor) {
      rep.reason = StopReason::DtUnderflow;
      break;
    }
    const double dt_step = std::min(dt, ctl.t_end - s.t);
    const double m_prev = m;
    t_prev = s.t;
    before = s;
    stepper.step(s, prm, dt_step);
    m = s.u.max_abs();

    // Growth rejection: a step that quadruples max|u| (or blows it out of
    // range) is too coarse to bracket thresholds near the singularity —
    // redo it with a finer dt until the floor forbids further refinement.
    const bool too_coarse =
        m_prev > 0.0 && (!std::isfinite(m) || m > 4.0 * m_prev);
    if (too_coarse && dt_step > ctl.dt_floor) {
      s = before;
      m = m_prev;
      dt = 0.5 * dt_step;
      window.clear();
      window.push_back(m);
      continue;
    }

    if (!std::isfinite(m)) {
      rep.reason = StopReason::Overflow;
      rep.t_last_finite = t_prev;
      break;
    }

    // Growth controller: doubling within the 10-step window halves dt.
    window.push_back(m);
    if (window.size() > 11) window.pop_front();
    if (window.size() == 11 && window.front() > 0.0 &&
        m >= 2.0 * window.front()) {
      dt *= 0.5;
      window.clear();
      window.push_back(m);
    }

    bool stop_now = false;
    for (std::size_t k = 0; k < thetas.size(); ++k) {
      if (m <= 0.5 * thetas[k]) t_half[k] = s.t;
      if (m < thetas[k]) t_below[k] = s.t;
      if (!crossed[k] && m >= thetas[k]) {
        crossed[k] = true;
        cross[k].theta = thetas[k];
        cross[k].t_below = t_below[k];
        cross[k].t_cross = s.t;
        cross[k].dt_at_cross = dt_step;
        cross[k].confirmed =
            !ctl.confirm_doubling || (s.t - t_half[k]) < 10.0 * dt_base;
        if (ctl.stop_theta > 0.0 && thetas[k] == ctl.stop_theta) {
          stop_now = true;
        }
      }
    }

    if (ctl.safe_theta > 0.0 && m <= ctl.safe_theta) rep.safe_state = s;
    record_row(m);
    if (ctl.store) ctl.store->offer(s);

    if (stop_now) {
      rep.reason = StopReason::ThresholdCrossed;
      break;
    }
  }

  rep.t_final = s.t;
  if (rep.reason != StopReason::Overflow) rep.t_last_finite = s.t;
  rep.dt_final = dt;
  rep.steps = s.steps;
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    if (crossed[k]) rep.crossings.push_back(cross[k]);
  }
  if (ctl.store && rep.reason != StopReason::Overflow) ctl.store->finalize(s);
  s.dt = dt;
  return rep;
}

// ---------------------------------------------------------------------------
// One-call run wrapper
// ---------------------------------------------------------------------------

struct RunOptions {
  double t_end = 10.0;
  bool keep_snapshots = false;
  int snapshot_stride = 8;
  int trajectory_stride = 1;
  double stop_theta = 0.0;
  bool confirm_doubling = true;
  double dt_floor = 1e-8;
};

struct RunOutcome {
  IntegrationReport report;
  SnapshotStore snapshots;
  std::vector<TrajectoryRow> trajectory;
  SimState final_state;
  bool domain_guard_ok = true;  // L >= R0 + t_end + margin
};

inline RunOutcome run(const ProblemParams& prm, const InitialData& data,
                      const Grid& grid, const RunOptions& opt) {
  RunOutcome out;
  out.snapshots = SnapshotStore(
      opt.keep_snapshots ? SnapshotStore::Mode::Full : SnapshotStore::Mode::Off,
      opt.snapshot_stride);
  out.domain_guard_ok =
      grid.half_width >=
      data.support_radius() + std::abs(data.offset) + opt.t_end + 1.0;
  SimState s = init_state(prm, data, grid);
  WaveStepper stepper(grid);
  StepControls ctl;
  ctl.t_end = opt.t_end;
  ctl.stop_theta = opt.stop_theta;
  ctl.confirm_doubling = opt.confirm_doubling;
  ctl.dt_floor = opt.dt_floor;
  ctl.store = &out.snapshots;
  ctl.trajectory = &out.trajectory;
  ctl.trajectory_stride = opt.trajectory_stride;
  out.report = integrate(s, prm, stepper, ctl);
  out.final_state = std::move(s);
  return out;
}

}  // namespace nldw
