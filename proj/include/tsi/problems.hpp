#pragma once

// Benchmark instances: Henon-Heiles, cubic NLS on the torus, and 2-D
// charged-particle dynamics in a strong uniform magnetic field.

#include <cmath>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/MatrixFunctions>

#include "tsi/problem.hpp"

namespace tsi {

namespace detail {

// J = [[0, I], [-I, 0]] on (q, p) with q, p of equal length.
inline StateVector canonical_J(const StateVector& u) {
  const Eigen::Index d = u.size() / 2;
  StateVector out(u.size());
  out.head(d) = u.tail(d);
  out.tail(d) = -u.head(d);
  return out;
}

inline Eigen::Matrix4d canonical_J_matrix() {
  Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
  J.topRightCorner<2, 2>() = Eigen::Matrix2d::Identity();
  J.bottomLeftCorner<2, 2>() = -Eigen::Matrix2d::Identity();
  return J;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Henon-Heiles, u = (q1, q2, p1, p2), M = diag(1, 0, 1, 0),
// H1 = q2^2/2 + p2^2/2 + q1^2 q2 - q2^3/3.

inline ProblemSpec make_henon_heiles() {
  ProblemSpec p;
  p.name = "henon_heiles";
  p.dim = 4;
  p.is_real = true;
  p.apply_J = detail::canonical_J;
  p.apply_M = [](const StateVector& u) {
    StateVector out = StateVector::Zero(4);
    out(0) = u(0);
    out(2) = u(2);
    return out;
  };
  p.grad_H1 = [](const StateVector& u) {
    const cplx q1 = u(0), q2 = u(1), p2 = u(3);
    StateVector g(4);
    g << 2.0 * q1 * q2, q2 + q1 * q1 - q2 * q2, 0.0, p2;
    return g;
  };
  p.H1_value = [](const StateVector& u) {
    const double q1 = u(0).real(), q2 = u(1).real(), p2 = u(3).real();
    return 0.5 * q2 * q2 + 0.5 * p2 * p2 + q1 * q1 * q2 - q2 * q2 * q2 / 3.0;
  };
  // Rotation of the (q1, p1) oscillator; (q2, p2) untouched.
  p.propagate = [](double tau, const StateVector& v) {
    const double c = std::cos(tau), s = std::sin(tau);
    StateVector out = v;
    out(0) = c * v(0) + s * v(2);
    out(2) = -s * v(0) + c * v(2);
    return out;
  };
  return p;
}

inline StateVector henon_heiles_u0() {
  return StateVector::Constant(4, cplx{0.12, 0.0});
}

// ---------------------------------------------------------------------------
// Cubic NLS  i u_t = -(1/eps) u_xx + |u|^2 u  on x in [0, 2pi), sampled on
// n_x points: J = -i, M = -d_xx, grad H1 = |u|^2 u, H1 = (1/4) int |u|^4.

namespace detail {

inline Eigen::VectorXd nls_wavenumbers(int n_x) {
  Eigen::VectorXd k(n_x);
  for (int j = 0; j < n_x; ++j) k(j) = j < n_x / 2 ? j : j - n_x;
  return k;
}

// Applies the x-Fourier multiplier m(k) to grid samples v.
template <class Symbol>
StateVector x_multiplier(const StateVector& v, const Eigen::VectorXd& k,
                         Symbol&& symbol) {
  thread_local Eigen::FFT<double> fft;
  StateVector hat(v.size()), out(v.size());
  fft.fwd(hat, v);
  for (Eigen::Index j = 0; j < hat.size(); ++j) hat(j) *= symbol(k(j));
  fft.inv(out, hat);
  return out;
}

}  // namespace detail

inline ProblemSpec make_nls(int n_x) {
  if (n_x < 4 || n_x % 2 != 0) {
    throw InvalidInput("make_nls: n_x must be even and >= 4, got " +
                       std::to_string(n_x));
  }
  const Eigen::VectorXd k = detail::nls_wavenumbers(n_x);
  const double dx = kTwoPi / n_x;
  ProblemSpec p;
  p.name = "nls";
  p.dim = n_x;
  p.is_real = false;
  p.inner_weight = dx;
  p.apply_J = [](const StateVector& u) -> StateVector { return cplx{0.0, -1.0} * u; };
  p.apply_M = [k](const StateVector& u) {
    return detail::x_multiplier(u, k, [](double kk) { return cplx{kk * kk, 0.0}; });
  };
  p.grad_H1 = [](const StateVector& u) -> StateVector {
    return (u.array().abs2() * u.array()).matrix();
  };
  p.H1_value = [dx](const StateVector& u) {
    return 0.25 * dx * u.array().abs2().square().sum();
  };
  // exp(tau J M) = exp(i tau d_xx): mode k picks up exp(-i tau k^2).
  p.propagate = [k](double tau, const StateVector& v) {
    const double t = std::remainder(tau, kTwoPi);
    return detail::x_multiplier(v, k, [t](double kk) {
      return std::polar(1.0, -t * kk * kk);
    });
  };
  return p;
}

inline Eigen::VectorXd nls_grid(int n_x) {
  Eigen::VectorXd x(n_x);
  for (int j = 0; j < n_x; ++j) x(j) = kTwoPi * j / n_x;
  return x;
}

/// u0(x) = (cos x + i sin x) / (1 + sin^2 x).
inline StateVector nls_u0(int n_x) {
  const Eigen::VectorXd x = nls_grid(n_x);
  StateVector u(n_x);
  for (int j = 0; j < n_x; ++j) {
    const double s = std::sin(x(j));
    u(j) = cplx{std::cos(x(j)), s} / (1.0 + s * s);
  }
  return u;
}

// ---------------------------------------------------------------------------
// Charged particle: x' = v, v' = (1/eps) B v - grad U(x), U = 1/|x|, recast
// with q = x, p = 2 eps v - B x into canonical form with
// M = (1/2)[[I, -B], [B, I]] and H1 = 2 eps U(q).

struct CpdState {
  Eigen::Vector2d x;
  Eigen::Vector2d v;
};

inline constexpr double kCpdMinRadius = 1e-8;

namespace detail {

inline Eigen::Matrix2d cpd_B() {
  Eigen::Matrix2d B;
  B << 0.0, 1.0, -1.0, 0.0;
  return B;
}

inline Eigen::Matrix4d cpd_M() {
  const Eigen::Matrix2d B = cpd_B();
  Eigen::Matrix4d M;
  M.topLeftCorner<2, 2>() = Eigen::Matrix2d::Identity();
  M.topRightCorner<2, 2>() = -B;
  M.bottomLeftCorner<2, 2>() = B;
  M.bottomRightCorner<2, 2>() = Eigen::Matrix2d::Identity();
  return 0.5 * M;
}

inline double cpd_radius(double x1, double x2) {
  const double r = std::hypot(x1, x2);
  if (!(r >= kCpdMinRadius)) {
    throw DomainError("charged particle at |x| = " + std::to_string(r) +
                      ", potential 1/|x| is singular");
  }
  return r;
}

}  // namespace detail

inline double cpd_potential(const Eigen::Vector2d& x) {
  return 1.0 / detail::cpd_radius(x(0), x(1));
}

/// E(x, v) = |v|^2 / 2 + U(x).
inline double cpd_energy(const CpdState& s) {
  return 0.5 * s.v.squaredNorm() + cpd_potential(s.x);
}

inline StateVector cpd_to_canonical(const CpdState& s, double eps) {
  const Eigen::Vector2d p = 2.0 * eps * s.v - detail::cpd_B() * s.x;
  StateVector u(4);
  u << s.x(0), s.x(1), p(0), p(1);
  return u;
}

inline CpdState cpd_from_canonical(const StateVector& u, double eps) {
  const Eigen::Vector2d q(u(0).real(), u(1).real());
  const Eigen::Vector2d p(u(2).real(), u(3).real());
  return {q, (p + detail::cpd_B() * q) / (2.0 * eps)};
}

inline CpdState cpd_initial_state() {
  return {Eigen::Vector2d(0.8, 0.9), Eigen::Vector2d(0.5, 0.6)};
}

/// Canonical system for a fixed eps; the nonlinearity carries the factor 2 eps.
inline ProblemSpec make_cpd(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw InvalidInput("make_cpd: eps must lie in (0, 1]");
  }
  const Eigen::Matrix4d M = detail::cpd_M();
  const Eigen::Matrix4d JM = detail::canonical_J_matrix() * M;
  ProblemSpec p;
  p.name = "cpd";
  p.dim = 4;
  p.is_real = true;
  p.apply_J = detail::canonical_J;
  p.apply_M = [M](const StateVector& u) -> StateVector {
    return M.cast<cplx>() * u;
  };
  p.grad_H1 = [eps](const StateVector& u) {
    const double r = detail::cpd_radius(u(0).real(), u(1).real());
    const double r3 = r * r * r;
    StateVector g = StateVector::Zero(4);
    // grad U(q) = -q / |q|^3
    g(0) = -2.0 * eps * u(0) / r3;
    g(1) = -2.0 * eps * u(1) / r3;
    return g;
  };
  p.H1_value = [eps](const StateVector& u) {
    return 2.0 * eps / detail::cpd_radius(u(0).real(), u(1).real());
  };
  p.propagate = [JM](double tau, const StateVector& v) -> StateVector {
    const double t = std::remainder(tau, kTwoPi);
    const Eigen::Matrix4d E = (t * JM).exp();
    return E.cast<cplx>() * v;
  };
  return p;
}

/// Same linear part, H1 identically zero.
inline ProblemSpec free_flow(ProblemSpec p) {
  const int dim = p.dim;
  p.name += "_free";
  p.grad_H1 = [dim](const StateVector&) -> StateVector {
    return StateVector::Zero(dim);
  };
  p.H1_value = [](const StateVector&) { return 0.0; };
  return p;
}

}  // namespace tsi
