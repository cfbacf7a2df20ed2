#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "nldw/solver.hpp"
#include "oracles.hpp"

using Catch::Approx;
using namespace nldw;

namespace {

Grid line_grid(double half_width, std::size_t n) {
  return Grid{1, half_width, n};
}

SimState manual_state(const Grid& g, const std::vector<double>& u,
                      const std::vector<double>& v, double dt) {
  SimState s;
  s.u = Field::zeros(g);
  s.v = Field::zeros(g);
  s.u.values = u;
  s.v.values = v;
  s.dt = dt;
  return s;
}

}  // namespace

// ============================================================================
// Initial data
// ============================================================================

TEST_CASE("initial data profiles and sampling", "[solver]") {
  SECTION("gaussian peak, width, and support radius") {
    InitialData d;
    d.amplitude_u0 = 2.0;
    d.width = 1.5;
    CHECK(d.profile(0.0) == Approx(1.0));
    CHECK(d.profile(1.5 * 1.5) == Approx(std::exp(-1.0)));
    CHECK(d.support_radius() == Approx(6.1 * 1.5));
    const Grid g = line_grid(10.0, 512);
    const Field u0 = d.sample_u0(g);
    // center x = 0 falls exactly on node N/2
    CHECK(u0.values[256] == Approx(2.0));
    CHECK(u0.max_abs() == Approx(2.0));
    // mass of A*exp(-x^2/w^2) is A*w*sqrt(pi)
    CHECK(u0.integral() ==
          Approx(2.0 * 1.5 * std::sqrt(M_PI)).epsilon(1e-10));
  }

  SECTION("compact bump vanishes outside its support") {
    InitialData d;
    d.shape = DataShape::CompactBump;
    d.width = 2.0;
    CHECK(d.profile(0.0) == Approx(1.0));
    CHECK(d.profile(4.0) == 0.0);
    CHECK(d.profile(4.1) == 0.0);
    CHECK(d.profile(1.0) == Approx(std::exp(1.0 - 1.0 / (1.0 - 0.25))));
    CHECK(d.support_radius() == Approx(2.0));
  }

  SECTION("u1 amplitude and offset") {
    InitialData d;
    d.amplitude_u0 = 0.0;
    d.amplitude_u1 = 3.0;
    d.offset = 2.5;
    const Grid g = line_grid(10.0, 512);
    const Field u1 = d.sample_u1(g);
    // x = 2.5 sits on a node: dx = 20/512, (2.5+10)/dx = 320
    CHECK(u1.values[320] == Approx(3.0));
    CHECK(d.sample_u0(g).max_abs() == 0.0);
  }

  SECTION("invalid width throws") {
    InitialData d;
    d.width = 0.0;
    CHECK_THROWS_AS(d.profile(1.0), OutOfRange);
  }
}

// ============================================================================
// init_state
// ============================================================================

TEST_CASE("init_state scales data and validates", "[solver]") {
  const Grid g = line_grid(10.0, 512);

  SECTION("epsilon scaling and dt choice") {
    ProblemParams prm;
    prm.epsilon = 0.25;
    prm.damping = DampingModel(0.5);
    InitialData d;
    d.amplitude_u0 = 1.0;
    d.amplitude_u1 = 0.5;
    const SimState s = init_state(prm, d, g);
    CHECK(s.t == 0.0);
    CHECK(s.steps == 0);
    CHECK(s.u.max_abs() == Approx(0.25));
    CHECK(s.v.max_abs() == Approx(0.125));
    CHECK(s.dt == Approx(std::min(0.5 * g.dx(), 0.1)));
  }

  SECTION("positivity functional enforced in the theorem regime") {
    ProblemParams prm;  // beta = 0, so b* = 1
    InitialData bad;
    bad.amplitude_u0 = 0.0;
    bad.amplitude_u1 = -1.0;
    CHECK_THROWS_AS(init_state(prm, bad, g), PositivityViolation);

    // exact cancellation (integral zero) is also rejected
    InitialData edge;
    edge.amplitude_u0 = 1.0;
    edge.amplitude_u1 = -1.0;
    CHECK_THROWS_AS(init_state(prm, edge, g), PositivityViolation);

    // same data passes once the sign hypothesis is waived or the
    // nonlinearity is off
    prm.theorem_regime = false;
    CHECK_NOTHROW(init_state(prm, bad, g));
    prm.theorem_regime = true;
    prm.nonlinearity_on = false;
    CHECK_NOTHROW(init_state(prm, bad, g));
  }

  SECTION("parameter validation") {
    InitialData d;
    ProblemParams prm;
    prm.p = 1.0;
    CHECK_THROWS_AS(init_state(prm, d, g), OutOfRange);
    prm = ProblemParams{};
    prm.epsilon = -0.5;
    CHECK_THROWS_AS(init_state(prm, d, g), OutOfRange);
    prm = ProblemParams{};
    prm.cfl = 0.0;
    CHECK_THROWS_AS(init_state(prm, d, g), OutOfRange);
    prm = ProblemParams{};
    prm.dim = 2;
    CHECK_THROWS_AS(init_state(prm, d, g), GridMismatch);
  }

  SECTION("fujita exponent") {
    CHECK(fujita_exponent(1) == Approx(3.0));
    CHECK(fujita_exponent(2) == Approx(2.0));
  }
}

// ============================================================================
// Linear dynamics (exact solutions)
// ============================================================================

TEST_CASE("zero data stays zero", "[solver]") {
  const Grid g = line_grid(5.0, 64);
  ProblemParams prm;
  prm.p = 2.0;
  prm.damping = DampingModel(0.5);
  SimState s = manual_state(g, std::vector<double>(64, 0.0),
                            std::vector<double>(64, 0.0), 0.05);
  WaveStepper stepper(g);
  for (int i = 0; i < 100; ++i) stepper.step(s, prm, 0.05);
  CHECK(s.u.max_abs() == 0.0);
  CHECK(s.v.max_abs() == 0.0);
  CHECK(s.t == Approx(5.0));
  CHECK(s.steps == 100);
}

TEST_CASE("undamped linear eigenmode cos(t)cos(x)", "[solver]") {
  // With b = 0 and no nonlinearity, u0 = cos(x), u1 = 0 evolves exactly as
  // u(t,x) = cos(t) cos(x) on the 2*pi-periodic line.
  const Grid g = line_grid(M_PI, 256);
  ProblemParams prm;
  prm.nonlinearity_on = false;
  prm.damping_on = false;
  std::vector<double> u(256), v(256, 0.0);
  for (std::size_t i = 0; i < 256; ++i) u[i] = std::cos(g.coord(i));
  SimState s = manual_state(g, u, v, 0.01);
  WaveStepper stepper(g);

  StepControls ctl;
  ctl.t_end = 1.0;
  ctl.dt_init = 0.01;
  std::vector<TrajectoryRow> rows;
  ctl.trajectory = &rows;
  const double e0 = stepper.energy(s);
  const IntegrationReport rep = integrate(s, prm, stepper, ctl);

  REQUIRE(rep.reason == StopReason::ReachedTEnd);
  CHECK(s.t == Approx(1.0));
  double max_err = 0.0;
  for (std::size_t i = 0; i < 256; ++i) {
    const double exact = std::cos(1.0) * std::cos(g.coord(i));
    max_err = std::max(max_err, std::abs(s.u.values[i] - exact));
  }
  CHECK(max_err <= 1e-6);  // RK4 at dt = 0.01 is far below this
  // velocity too: u_t = -sin(t)cos(x)
  double max_verr = 0.0;
  for (std::size_t i = 0; i < 256; ++i) {
    const double exact = -std::sin(1.0) * std::cos(g.coord(i));
    max_verr = std::max(max_verr, std::abs(s.v.values[i] - exact));
  }
  CHECK(max_verr <= 1e-6);
  // energy of the undamped wave is conserved
  CHECK(stepper.energy(s) == Approx(e0).epsilon(1e-9));
  // exact energy: E = 1/2 ∫ (sin^2 t cos^2 x + cos^2 t sin^2 x) = pi/2
  CHECK(e0 == Approx(M_PI / 2.0).epsilon(1e-10));
}

TEST_CASE("damping dissipates linear energy monotonically", "[solver]") {
  const Grid g = line_grid(M_PI, 128);
  ProblemParams prm;
  prm.nonlinearity_on = false;
  prm.damping = DampingModel(0.5);
  std::vector<double> u(128), v(128, 0.0);
  for (std::size_t i = 0; i < 128; ++i) u[i] = std::cos(g.coord(i));
  SimState s = manual_state(g, u, v, 0.02);
  WaveStepper stepper(g);

  double e_prev = stepper.energy(s);
  const double slack = 1e-8 * e_prev;
  for (int k = 0; k < 250; ++k) {
    stepper.step(s, prm, 0.02);
    const double e = stepper.energy(s);
    CHECK(e <= e_prev + slack);
    e_prev = e;
  }
  CHECK(e_prev < 0.5 * M_PI / 2.0);  // genuinely dissipated by t = 5
}

TEST_CASE("linear evolution is homogeneous in epsilon", "[solver]") {
  const Grid g = line_grid(10.0, 256);
  InitialData d;
  d.amplitude_u0 = 1.0;
  d.amplitude_u1 = -0.3;
  ProblemParams prm;
  prm.nonlinearity_on = false;
  prm.theorem_regime = false;
  prm.damping = DampingModel(-0.5);

  prm.epsilon = 1.0;
  SimState a = init_state(prm, d, g);
  prm.epsilon = 0.5;
  SimState b = init_state(prm, d, g);
  WaveStepper stepper(g);
  for (int k = 0; k < 200; ++k) {
    stepper.step(a, prm, 0.02);
    stepper.step(b, prm, 0.02);
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(b.u.values[i] == Approx(0.5 * a.u.values[i]).epsilon(1e-10));
    CHECK(b.v.values[i] == Approx(0.5 * a.v.values[i]).epsilon(1e-10));
  }
}

// ============================================================================
// Convergence order
// ============================================================================

TEST_CASE("refinement study shows high-order convergence", "[solver]") {
  // Halve dx (and with it dt = cfl*dx) twice and compare max|u| at a fixed
  // pre-blow-up time.  Successive differences must shrink by at least the
  // second-order factor; RK4 + spectral space gives ~16x in practice.
  InitialData d;
  d.amplitude_u0 = 1.0;
  d.width = 1.0;
  auto peak_at = [&](std::size_t n) {
    const Grid g = line_grid(20.0, n);
    ProblemParams prm;
    prm.p = 2.0;
    prm.epsilon = 1.0;
    prm.damping = DampingModel(0.0);
    SimState s = init_state(prm, d, g);
    WaveStepper stepper(g);
    StepControls ctl;
    ctl.t_end = 1.0;
    integrate(s, prm, stepper, ctl);
    return s.u.max_abs();
  };
  const double m1 = peak_at(256);
  const double m2 = peak_at(512);
  const double m3 = peak_at(1024);
  const double e1 = std::abs(m1 - m2);
  const double e2 = std::abs(m2 - m3);
  INFO("m1=" << m1 << " m2=" << m2 << " m3=" << m3);
  REQUIRE(e2 > 0.0);
  CHECK(e1 / e2 >= 3.0);
}

// ============================================================================
// Finite propagation speed
// ============================================================================

TEST_CASE("compact data spreads no faster than speed one", "[solver]") {
  const Grid g = line_grid(10.0, 1024);
  InitialData d;
  d.shape = DataShape::CompactBump;
  d.width = 2.0;
  ProblemParams prm;
  prm.p = 2.0;
  prm.epsilon = 0.1;
  prm.damping = DampingModel(0.5);
  SimState s = init_state(prm, d, g);
  WaveStepper stepper(g);
  StepControls ctl;
  ctl.t_end = 3.0;
  integrate(s, prm, stepper, ctl);

  // support can reach |x| = 2 + 3; look beyond with a small margin
  const double guard = 2.0 + 3.0 + 0.5;
  double outside = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(g.coord(i)) >= guard) {
      outside = std::max(outside, std::abs(s.u.values[i]));
    }
  }
  const double peak = s.u.max_abs();
  INFO("outside=" << outside << " peak=" << peak);
  CHECK(peak > 0.01);  // the bump is alive
  CHECK(outside <= 1e-6 * peak);
}

// ============================================================================
// Growth controller, thresholds, and stop reasons
// ============================================================================

TEST_CASE("single-mode grid blows up like the reference ODE", "[solver]") {
  // N = 1 degenerates the box to one Fourier mode with Lap u = 0, so the PDE
  // becomes u'' = |u|^p - b(t) u'.  Check the threshold crossing against an
  // independent Fehlberg integration of the same ODE.
  const Grid g{1, 1.0, 1};
  ProblemParams prm;
  prm.p = 2.0;
  prm.damping = DampingModel(0.0);  // b = 1
  InitialData d;
  d.amplitude_u0 = 2.0;
  d.offset = -1.0;  // the single node sits at x = -1
  SimState s = init_state(prm, d, g);
  REQUIRE(s.u.values[0] == Approx(2.0));
  REQUIRE(s.dt == Approx(0.1));  // dt_cap is the binding constraint

  WaveStepper stepper(g);
  StepControls ctl;
  ctl.t_end = 1e9;
  ctl.stop_theta = 1e6;
  ctl.watch_thetas = {1e4, 1e6};
  ctl.safe_theta = 2.5e3;
  const IntegrationReport rep = integrate(s, prm, stepper, ctl);

  REQUIRE(rep.reason == StopReason::ThresholdCrossed);
  REQUIRE(rep.crossings.size() == 2);
  const auto& c4 = rep.crossings[0];
  const auto& c6 = rep.crossings[1];
  CHECK(c4.theta == 1e4);
  CHECK(c6.theta == 1e6);
  CHECK(c4.t_cross <= c6.t_cross);
  CHECK(c4.confirmed);
  CHECK(c6.confirmed);
  CHECK(c6.t_cross - c6.t_below <= 5.0 * rep.dt_final + 1e-12);

  // safe state was captured strictly below the low threshold
  REQUIRE(rep.safe_state.has_value());
  CHECK(rep.safe_state->u.max_abs() <= 2.5e3);
  CHECK(rep.safe_state->t < c4.t_below + 1e-12);

  const auto rhs = [](double t, const std::array<double, 2>& y) {
    (void)t;
    // |u|^2 = u^2 along this trajectory (u starts at 2 and grows)
    return std::array<double, 2>{y[1], y[0] * y[0] - y[1]};
  };
  const auto ref = oracle::rkf45_blowup<2>(rhs, 0.0, {2.0, 0.0}, 1e6, 50.0);
  REQUIRE(ref.crossed);
  const double mid = 0.5 * (c6.t_below + c6.t_cross);
  INFO("solver mid=" << mid << " oracle=" << ref.t_cross);
  CHECK(std::abs(mid - ref.t_cross) <= 0.02 * ref.t_cross);

  // the low threshold crossing also matches its own reference
  const auto ref4 = oracle::rkf45_blowup<2>(rhs, 0.0, {2.0, 0.0}, 1e4, 50.0);
  const double mid4 = 0.5 * (c4.t_below + c4.t_cross);
  CHECK(std::abs(mid4 - ref4.t_cross) <= 0.02 * ref4.t_cross);
}

TEST_CASE("blow-up without a stop threshold ends in overflow or underflow",
          "[solver]") {
  const Grid g{1, 1.0, 1};
  ProblemParams prm;
  prm.p = 2.0;
  prm.damping = DampingModel(0.0);
  InitialData d;
  d.amplitude_u0 = 2.0;
  d.offset = -1.0;
  SimState s = init_state(prm, d, g);
  WaveStepper stepper(g);
  StepControls ctl;
  ctl.t_end = 1e9;
  ctl.watch_thetas = {1e4, 1e6, 1e8};
  const IntegrationReport rep = integrate(s, prm, stepper, ctl);
  CHECK((rep.reason == StopReason::Overflow ||
         rep.reason == StopReason::DtUnderflow));
  CHECK(rep.crossings.size() == 3);  // sailed past every watched threshold
  CHECK(rep.t_last_finite > 0.0);
  // the growth controller was forced to shrink the step
  CHECK(rep.dt_final < 0.1);
}

TEST_CASE("run wrapper: snapshots, trajectory, and domain guard", "[solver]") {
  const Grid g = line_grid(10.0, 256);
  InitialData d;
  ProblemParams prm;
  prm.p = 2.0;
  prm.epsilon = 0.05;
  prm.damping = DampingModel(0.5);
  RunOptions opt;
  opt.t_end = 2.0;
  opt.keep_snapshots = true;
  opt.snapshot_stride = 4;
  opt.trajectory_stride = 2;
  const RunOutcome out = run(prm, d, g, opt);

  REQUIRE(out.report.reason == StopReason::ReachedTEnd);
  CHECK(out.final_state.t == Approx(2.0));

  const auto& snaps = out.snapshots.entries();
  REQUIRE(snaps.size() >= 3);
  CHECK(snaps.front().t == 0.0);
  CHECK(snaps.back().t == Approx(2.0));
  for (std::size_t i = 1; i < snaps.size(); ++i) {
    CHECK(snaps[i].t > snaps[i - 1].t);
  }

  REQUIRE(!out.trajectory.empty());
  CHECK(out.trajectory.front().t == 0.0);
  for (const auto& row : out.trajectory) {
    CHECK(std::isfinite(row.energy));
    CHECK(std::isfinite(row.l2_u));
    CHECK(row.max_abs_u >= 0.0);
    CHECK(row.dt > 0.0);
  }

  // guard: L = 10 < support(6.1) + t_end(2) + 1 fails only if sum > 10
  CHECK(out.domain_guard_ok == (10.0 >= d.support_radius() + 2.0 + 1.0));

  // a short domain trips the guard flag without aborting the run
  const Grid tight = line_grid(4.0, 256);
  const RunOutcome out2 = run(prm, d, tight, opt);
  CHECK(!out2.domain_guard_ok);
  CHECK(out2.report.reason == StopReason::ReachedTEnd);
}

TEST_CASE("integration is bitwise deterministic", "[solver]") {
  const Grid g = line_grid(10.0, 128);
  InitialData d;
  ProblemParams prm;
  prm.p = 2.0;
  prm.epsilon = 0.2;
  prm.damping = DampingModel(-0.5);
  RunOptions opt;
  opt.t_end = 1.5;
  const RunOutcome a = run(prm, d, g, opt);
  const RunOutcome b = run(prm, d, g, opt);
  REQUIRE(a.final_state.u.values.size() == b.final_state.u.values.size());
  for (std::size_t i = 0; i < a.final_state.u.values.size(); ++i) {
    CHECK(a.final_state.u.values[i] == b.final_state.u.values[i]);
    CHECK(a.final_state.v.values[i] == b.final_state.v.values[i]);
  }
}
