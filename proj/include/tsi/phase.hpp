#pragma once

#include <cmath>

namespace tsi {

/// Angle in [0, 2pi) kept as an unevaluated sum hi + lo.
///
/// Tracks (t / eps) mod 2pi over millions of steps with h / eps >> 2pi
/// without losing the digits that a plain running sum would drop.
class CompensatedPhase {
 public:
  CompensatedPhase() = default;

  double value() const { return hi_ + lo_; }
  double hi() const { return hi_; }
  double lo() const { return lo_; }

  /// Adds h / eps, where the quotient is carried to twice working precision.
  void advance(double h, double eps) {
    const double q = h / eps;
    const double q_lo = std::fma(-q, eps, h) / eps;
    double inc_hi = q, inc_lo = q_lo;
    reduce(inc_hi, inc_lo);
    double s, e;
    two_sum(hi_, inc_hi, s, e);
    hi_ = s;
    lo_ = lo_ + inc_lo + e;
    reduce(hi_, lo_);
  }

 private:
  static constexpr double kTwoPiHi = 6.283185307179586;
  static constexpr double kTwoPiLo = 2.4492935982947064e-16;

  static void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    const double bb = s - a;
    e = (a - (s - bb)) + (b - bb);
  }

  // (hi, lo) <- (hi + lo) mod 2pi, renormalised so |lo| <= ulp(hi)/2.
  static void reduce(double& hi, double& lo) {
    const double k = std::floor((hi + lo) / kTwoPiHi);
    if (k != 0.0) {
      const double p = k * kTwoPiHi;
      const double p_err = std::fma(k, kTwoPiHi, -p);
      double s, e;
      two_sum(hi, -p, s, e);
      hi = s;
      lo = lo + e - p_err - k * kTwoPiLo;
    }
    double s, e;
    two_sum(hi, lo, s, e);
    hi = s;
    lo = e;
    if (hi < 0.0) {
      two_sum(hi, kTwoPiHi, s, e);
      hi = s;
      lo += e + kTwoPiLo;
    } else if (hi >= kTwoPiHi) {
      two_sum(hi, -kTwoPiHi, s, e);
      hi = s;
      lo += e - kTwoPiLo;
    }
    two_sum(hi, lo, s, e);
    hi = s;
    lo = e;
  }

  double hi_ = 0.0;
  double lo_ = 0.0;
};

}  // namespace tsi
