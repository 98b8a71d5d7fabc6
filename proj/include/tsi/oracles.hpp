#pragma once

// Brute-force reference solutions: Dormand-Prince 5(4) on the original
// (non two-scale) system, and Strang splitting for the cubic NLS.

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

#include "tsi/errors.hpp"
#include "tsi/problem.hpp"
#include "tsi/problems.hpp"

namespace tsi {

struct OdeTolerance {
  double rtol = 1e-10;
  double atol = 1e-12;
  long max_steps = 50'000'000;
};

/// Adaptive Dormand-Prince 5(4) with PI step-size control for y' = rhs(t, y).
/// `observer(t, y)` sees the initial point and every accepted step.
template <class Rhs, class Observer>
StateVector dopri5(Rhs&& rhs, StateVector y, double t0, double t_end,
                   const OdeTolerance& tol, Observer&& observer) {
  if (!(tol.rtol > 0.0 && tol.atol > 0.0)) throw InvalidInput("rtol and atol must be > 0");
  if (!(t_end > t0)) throw InvalidInput("dopri5: need t_end > t0");

  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                   a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b_hat
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  auto error_norm = [&](const StateVector& err, const StateVector& y0,
                        const StateVector& y1) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
      const double sc = tol.atol + tol.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
      acc += std::norm(err(i)) / (sc * sc);
    }
    return std::sqrt(acc / static_cast<double>(err.size()));
  };

  double t = t0;
  StateVector k1 = rhs(t, y);
  observer(t, static_cast<const StateVector&>(y));

  // Initial step guess (Hairer, Norsett & Wanner II.4).
  double h;
  {
    const StateVector zero = StateVector::Zero(y.size());
    const double d0 = error_norm(y, y, zero), d1 = error_norm(k1, y, zero);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_end - t0);
    const StateVector k2 = rhs(t + h0, y + h0 * k1);
    const double d2 = error_norm(k2 - k1, y, zero) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min(100.0 * h0, h1);
  }

  constexpr double safety = 0.9, fac_min = 0.2, fac_max = 10.0;
  constexpr double beta = 0.04, alpha = 0.2 - 0.75 * beta;
  double err_old = 1e-4;
  bool rejected = false;
  long steps = 0;
  StateVector k2, k3, k4, k5, k6, k7, y_new;
  while (t < t_end) {
    if (++steps > tol.max_steps) {
      throw ResourceError("dopri5 exceeded max_steps = " + std::to_string(tol.max_steps) +
                          " at t = " + std::to_string(t));
    }
    bool last = false;
    if (t + 1.01 * h >= t_end) {
      h = t_end - t;
      last = true;
    }
    k2 = rhs(t + c2 * h, y + h * a21 * k1);
    k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    k6 = rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    k7 = rhs(t + h, y_new);
    const StateVector err =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, y, y_new);
    if (!std::isfinite(en)) throw DivergenceError("dopri5: non-finite error estimate", 0);

    if (en <= 1.0) {
      t = last ? t_end : t + h;
      y = y_new;
      k1 = k7;
      observer(t, static_cast<const StateVector&>(y));
      const double e = std::max(en, 1e-10);
      double fac = safety * std::pow(e, -alpha) * std::pow(err_old, beta);
      fac = std::clamp(fac, fac_min, fac_max);
      if (rejected) fac = std::min(fac, 1.0);
      h *= fac;
      err_old = e;
      rejected = false;
    } else {
      h *= std::max(fac_min, safety * std::pow(en, -alpha));
      rejected = true;
    }
  }
  return y;
}

template <class Rhs>
StateVector dopri5(Rhs&& rhs, StateVector y, double t0, double t_end,
                   const OdeTolerance& tol) {
  return dopri5(std::forward<Rhs>(rhs), std::move(y), t0, t_end, tol,
                [](double, const StateVector&) {});
}

/// u(t_end) for the original system u' = J[(1/eps) M u + grad H1(u)].
inline StateVector rk_adaptive(const ProblemSpec& problem, const StateVector& u0,
                               double eps, double t_end, const OdeTolerance& tol = {}) {
  if (!(t_end > 0.0)) throw InvalidInput("rk_adaptive: t_end must be > 0");
  return dopri5([&](double, const StateVector& u) { return vector_field(problem, eps, u); },
                u0, 0.0, t_end, tol);
}

template <class Observer>
StateVector rk_adaptive(const ProblemSpec& problem, const StateVector& u0, double eps,
                        double t_end, const OdeTolerance& tol, Observer&& observer) {
  if (!(t_end > 0.0)) throw InvalidInput("rk_adaptive: t_end must be > 0");
  return dopri5([&](double, const StateVector& u) { return vector_field(problem, eps, u); },
                u0, 0.0, t_end, tol, std::forward<Observer>(observer));
}

/// Strang splitting for i u_t = -(1/eps) u_xx + |u|^2 u on an n_x-point grid:
/// half linear flow, full cubic flow, half linear flow.
inline StateVector strang_splitting_nls(const StateVector& u0, double eps, double dt,
                                        double t_end, int n_x) {
  if (u0.size() != n_x) throw InvalidInput("strang_splitting_nls: u0 has wrong length");
  if (!(dt > 0.0)) throw InvalidInput("strang_splitting_nls: dt must be > 0");
  const double ratio = t_end / dt;
  const long steps = std::lround(ratio);
  if (steps < 0 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidInput("strang_splitting_nls: t_end / dt = " + std::to_string(ratio) +
                       " is not an integer");
  }
  const Eigen::VectorXd k = detail::nls_wavenumbers(n_x);
  Eigen::VectorXcd half_linear(n_x);
  for (int j = 0; j < n_x; ++j) {
    half_linear(j) = std::polar(1.0, -0.5 * dt * k(j) * k(j) / eps);
  }
  Eigen::FFT<double> fft;
  StateVector u = u0, hat(n_x);
  for (long s = 0; s < steps; ++s) {
    fft.fwd(hat, u);
    hat.array() *= half_linear.array();
    fft.inv(u, hat);
    for (int j = 0; j < n_x; ++j) u(j) *= std::polar(1.0, -dt * std::norm(u(j)));
    fft.fwd(hat, u);
    hat.array() *= half_linear.array();
    fft.inv(u, hat);
  }
  return u;
}

}  // namespace tsi
