// ============================================================================
// heat_kernel: sampled Gaussians, tau-derivatives, DFT convolution
// ============================================================================

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "nldw/heat_kernel.hpp"
#include "oracles.hpp"

using nldw::Field;
using nldw::Grid;

TEST_CASE("pointwise kernel values", "[heat_kernel]") {
  SECTION("closed-form spot checks") {
    // n=1, tau=2, x=0: (8 pi)^{-1/2}.
    CHECK(nldw::gaussian_value(1, 2.0, 0.0) ==
          Catch::Approx(1.0 / std::sqrt(8.0 * M_PI)).epsilon(1e-14));
    // n=2, tau=1, |x|^2=4: (4 pi)^{-1} e^{-1}.
    CHECK(nldw::gaussian_value(2, 1.0, 4.0) ==
          Catch::Approx(std::exp(-1.0) / (4.0 * M_PI)).epsilon(1e-14));
    // d/dtau at n=1, tau=1, x=0: -(1/2) (4 pi)^{-1/2}.
    CHECK(nldw::gaussian_dt_value(1, 1.0, 0.0) ==
          Catch::Approx(-0.5 / std::sqrt(4.0 * M_PI)).epsilon(1e-14));
    // d2/dtau2 at n=1, tau=1, x=0: (3/4) (4 pi)^{-1/2}.
    CHECK(nldw::gaussian_dtt_value(1, 1.0, 0.0) ==
          Catch::Approx(0.75 / std::sqrt(4.0 * M_PI)).epsilon(1e-14));
  }

  SECTION("tau-derivatives against centered differences") {
    for (int dim : {1, 2}) {
      for (double tau : {0.4, 1.0, 3.5}) {
        for (double r2 : {0.0, 0.6, 2.9, 8.0}) {
          const double h = 1e-4 * tau;
          const double fd1 = (nldw::gaussian_value(dim, tau + h, r2) -
                              nldw::gaussian_value(dim, tau - h, r2)) /
                             (2.0 * h);
          const double fd2 = (nldw::gaussian_dt_value(dim, tau + h, r2) -
                              nldw::gaussian_dt_value(dim, tau - h, r2)) /
                             (2.0 * h);
          CHECK(nldw::gaussian_dt_value(dim, tau, r2) ==
                Catch::Approx(fd1).epsilon(1e-6).margin(1e-12));
          CHECK(nldw::gaussian_dtt_value(dim, tau, r2) ==
                Catch::Approx(fd2).epsilon(1e-5).margin(1e-12));
        }
      }
    }
  }
}

TEST_CASE("sampled kernel fields", "[heat_kernel]") {
  SECTION("unit mass for admissible boxes") {
    for (double tau : {0.25, 1.0, 4.0}) {
      Grid g1(1, 20.0, 1024);
      CHECK(nldw::gaussian(g1, tau).integral() ==
            Catch::Approx(1.0).margin(1e-8));
      Grid g2(2, 18.0, 128);
      CHECK(nldw::gaussian(g2, tau).integral() ==
            Catch::Approx(1.0).margin(1e-8));
    }
  }

  SECTION("discrete integrals of the tau-derivatives vanish") {
    Grid g(1, 20.0, 1024);
    CHECK(std::abs(nldw::gaussian_dt(g, 1.0).integral()) < 1e-6);
    CHECK(std::abs(nldw::gaussian_dtt(g, 1.0).integral()) < 1e-6);
  }

  SECTION("domain guard: kernel wider than the box") {
    Grid g(1, 10.0, 256);
    CHECK_THROWS_AS(nldw::gaussian(g, 2.0), nldw::DomainTooSmall);
    CHECK_THROWS_AS(nldw::gaussian_dt(g, 2.0), nldw::DomainTooSmall);
    CHECK_NOTHROW(nldw::gaussian(g, 1.5));
    CHECK_THROWS_AS(nldw::gaussian(g, 0.0), nldw::OutOfRange);
    CHECK_THROWS_AS(nldw::gaussian(g, -1.0), nldw::OutOfRange);
  }

  SECTION("peak sits at the center node") {
    Grid g(1, 20.0, 1024);
    const Field k = nldw::gaussian(g, 0.5);
    std::size_t argmax = 0;
    for (std::size_t i = 0; i < k.values.size(); ++i) {
      if (k.values[i] > k.values[argmax]) argmax = i;
    }
    CHECK(argmax == 512);  // x = 0
  }
}

TEST_CASE("DFT convolution", "[heat_kernel]") {
  SECTION("semigroup: G(1) * G(1) = G(2), n = 1") {
    Grid g(1, 20.0, 1024);
    const Field lhs = nldw::convolve(nldw::gaussian(g, 1.0), nldw::gaussian(g, 1.0));
    const Field rhs = nldw::gaussian(g, 2.0);
    double max_err = 0.0;
    for (std::size_t i = 0; i < lhs.values.size(); ++i) {
      max_err = std::max(max_err, std::abs(lhs.values[i] - rhs.values[i]));
    }
    CHECK(max_err <= 1e-6);
  }

  SECTION("semigroup: G(0.5) * G(0.5) = G(1), n = 2") {
    Grid g(2, 16.0, 128);
    const Field lhs =
        nldw::convolve(nldw::gaussian(g, 0.5), nldw::gaussian(g, 0.5));
    const Field rhs = nldw::gaussian(g, 1.0);
    double max_err = 0.0;
    for (std::size_t i = 0; i < lhs.values.size(); ++i) {
      max_err = std::max(max_err, std::abs(lhs.values[i] - rhs.values[i]));
    }
    CHECK(max_err <= 1e-6);
  }

  SECTION("discrete impulse is the identity") {
    Grid g(1, 8.0, 256);
    Field f = Field::sample_radial(
        g, [](double r2) { return std::exp(-r2) + 0.3 * std::cos(r2); });
    Field delta = Field::zeros(g);
    delta.values[128] = 1.0 / g.dx();  // unit-mass spike at x = 0
    const Field out = nldw::convolve(f, delta);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      CHECK(out.values[i] == Catch::Approx(f.values[i]).margin(1e-10));
    }
  }

  SECTION("commutativity is bitwise") {
    Grid g(1, 8.0, 128);
    const Field a = Field::sample_radial(g, [](double r2) { return std::exp(-r2); });
    const Field b = Field::sample_radial(
        g, [](double r2) { return 1.0 / (1.0 + r2); });
    const Field ab = nldw::convolve(a, b);
    const Field ba = nldw::convolve(b, a);
    for (std::size_t i = 0; i < ab.values.size(); ++i) {
      CHECK(ab.values[i] == ba.values[i]);
    }
  }

  SECTION("mass multiplicativity: ∫(a*b) = ∫a ∫b") {
    Grid g(1, 12.0, 512);
    const Field a = nldw::gaussian(g, 1.0);
    const Field b = Field::sample_radial(
        g, [](double r2) { return std::exp(-0.7 * r2); });
    CHECK(nldw::convolve(a, b).integral() ==
          Catch::Approx(a.integral() * b.integral()).epsilon(1e-12));
  }

  SECTION("grid mismatch is rejected") {
    Grid g1(1, 8.0, 128), g2(1, 8.0, 256), g3(1, 9.0, 128);
    const Field a = nldw::gaussian(g1, 0.5);
    CHECK_THROWS_AS(nldw::convolve(a, nldw::gaussian(g2, 0.5)),
                    nldw::GridMismatch);
    CHECK_THROWS_AS(nldw::convolve(a, nldw::gaussian(g3, 0.5)),
                    nldw::GridMismatch);
  }
}

TEST_CASE("grid plumbing", "[heat_kernel]") {
  SECTION("validation") {
    CHECK_THROWS_AS(Grid(3, 1.0, 64), nldw::OutOfRange);
    CHECK_THROWS_AS(Grid(1, -1.0, 64), nldw::OutOfRange);
    CHECK_THROWS_AS(Grid(1, 1.0, 48), nldw::OutOfRange);  // not a power of two
    CHECK_THROWS_AS(Grid(1, 1.0, 16), nldw::OutOfRange);  // too coarse
    CHECK_NOTHROW(Grid(1, 1.0, 1));                       // single-mode grid
    CHECK_NOTHROW(Grid(2, 5.0, 32));
  }

  SECTION("minimal image wrapping") {
    Grid g(1, 10.0, 64);
    CHECK(g.min_image(3.0) == Catch::Approx(3.0));
    CHECK(g.min_image(17.0) == Catch::Approx(-3.0));
    CHECK(g.min_image(-13.0) == Catch::Approx(7.0));
    CHECK(std::abs(g.min_image(20.0)) < 1e-12);
  }

  SECTION("integral of a sampled function") {
    Grid g(1, 10.0, 512);
    const Field f = Field::sample_radial(g, [](double r2) { return std::exp(-r2); });
    CHECK(f.integral() == Catch::Approx(std::sqrt(M_PI)).epsilon(1e-10));
  }
}
