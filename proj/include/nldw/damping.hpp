#pragma once

#include <cmath>

#include "nldw/errors.hpp"

namespace nldw {

// ============================================================================
// Time-dependent damping coefficient
// ============================================================================
//
// Power-law family b(t) = (t+1)^(-beta) on t >= 0 with beta in [-1, 1):
//   beta < 0   growing damping,
//   beta = 0   constant (classical) damping — admitted, but flagged, since
//              the variable-coefficient asymptotics below degenerate there,
//   beta > 0   decaying damping.
// The endpoint beta = 1 (scale-invariant damping) is excluded.

class DampingModel {
 public:
  enum class Form { PowerLaw };

  explicit DampingModel(double beta) : beta_(beta) {
    if (!(beta >= -1.0 && beta < 1.0)) {
      throw OutOfRange("DampingModel: beta must lie in [-1, 1)");
    }
  }

  Form form() const { return Form::PowerLaw; }
  double beta() const { return beta_; }

  /// Constant-damping cross-check case; callers surface this as a warning.
  bool classical() const { return beta_ == 0.0; }

  double b(double t) const {
    check_time(t);
    return std::pow(t + 1.0, -beta_);
  }

  double b_prime(double t) const {
    check_time(t);
    return -beta_ * std::pow(t + 1.0, -beta_ - 1.0);
  }

  double b_second(double t) const {
    check_time(t);
    return beta_ * (beta_ + 1.0) * std::pow(t + 1.0, -beta_ - 2.0);
  }

  /// B(t) = ∫_0^t b(s) ds = ((t+1)^(1-beta) - 1)/(1-beta).
  double B(double t) const {
    check_time(t);
    const double q = 1.0 - beta_;
    return std::expm1(q * std::log1p(t)) / q;
  }

  /// B(t+s) - B(t) for s >= 0, free of large-argument cancellation:
  /// with x = t+1, equals x^(1-beta) * expm1((1-beta) * log1p(s/x)) / (1-beta).
  double B_between(double t, double s) const {
    check_time(t);
    if (!(s >= 0.0)) throw OutOfRange("DampingModel: tail offset s < 0");
    const double x = t + 1.0;
    const double q = 1.0 - beta_;
    return std::pow(x, q) * std::expm1(q * std::log1p(s / x)) / q;
  }

 private:
  static void check_time(double t) {
    if (!(t >= 0.0)) throw OutOfRange("DampingModel: time must be >= 0");
  }

  double beta_;
};

}  // namespace nldw
