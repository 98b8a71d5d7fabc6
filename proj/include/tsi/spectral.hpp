#pragma once

// Fourier algebra of the fast variable tau on the torus [0, 2pi).
//
// Grid values are stored as a dim x n_tau matrix, column j holding U(tau_j).
// Coefficients are stored as a dim x (n_tau + 1) matrix, column c holding the
// mode l = c - n_tau/2. The interpolant is
//
//   U(tau) = sum_{|l| <= n_tau/2} w_l U_l exp(i l tau),  w_{+-n_tau/2} = 1/2,
//
// and dft() stores the standard Nyquist amplitude at both l = +n_tau/2 and
// l = -n_tau/2, so that real grid data keeps a real interpolant under
// off-grid shifts and evaluation.

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "tsi/errors.hpp"

namespace tsi {

using cplx = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using GridValues = Eigen::MatrixXcd;
/// One complex factor per tau-mode, indexed like SpectralCoeffs columns.
using ModeMultiplier = Eigen::RowVectorXcd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

class TauGrid {
 public:
  explicit TauGrid(int n_tau) : n_(n_tau) {
    if (n_tau < 4 || n_tau % 2 != 0) {
      throw InvalidInput("n_tau must be even and >= 4, got " +
                         std::to_string(n_tau));
    }
  }

  int size() const { return n_; }
  int max_mode() const { return n_ / 2; }
  double spacing() const { return kTwoPi / n_; }
  double node(int j) const { return kTwoPi * j / n_; }

  friend bool operator==(const TauGrid&, const TauGrid&) = default;

 private:
  int n_;
};

class SpectralCoeffs {
 public:
  SpectralCoeffs(int dim, int n_tau)
      : n_tau_(TauGrid(n_tau).size()),
        data_(Eigen::MatrixXcd::Zero(dim, n_tau + 1)) {}

  int dim() const { return static_cast<int>(data_.rows()); }
  int n_tau() const { return n_tau_; }
  int max_mode() const { return n_tau_ / 2; }

  auto mode(int l) { return data_.col(l + n_tau_ / 2); }
  auto mode(int l) const { return data_.col(l + n_tau_ / 2); }

  Eigen::MatrixXcd& data() { return data_; }
  const Eigen::MatrixXcd& data() const { return data_; }

 private:
  int n_tau_;
  Eigen::MatrixXcd data_;
};

namespace detail {

inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

}  // namespace detail

inline SpectralCoeffs dft(const GridValues& values, const TauGrid& grid) {
  const int n = grid.size();
  if (values.cols() != n) {
    throw InvalidInput("dft: expected " + std::to_string(n) +
                       " grid values, got " + std::to_string(values.cols()));
  }
  const int dim = static_cast<int>(values.rows());
  const int half = n / 2;
  SpectralCoeffs out(dim, n);
  auto& fft = detail::fft_engine();
  Eigen::VectorXcd series(n), spectrum(n);
  for (int d = 0; d < dim; ++d) {
    series = values.row(d).transpose();
    fft.fwd(spectrum, series);
    spectrum /= static_cast<double>(n);
    for (int k = 0; k < half; ++k) out.mode(k)(d) = spectrum(k);
    for (int k = half + 1; k < n; ++k) out.mode(k - n)(d) = spectrum(k);
    out.mode(half)(d) = spectrum(half);
    out.mode(-half)(d) = spectrum(half);
  }
  return out;
}

inline GridValues idft(const SpectralCoeffs& coeffs) {
  const int n = coeffs.n_tau();
  const int half = n / 2;
  const int dim = coeffs.dim();
  GridValues out(dim, n);
  auto& fft = detail::fft_engine();
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  Eigen::VectorXcd series(n), spectrum(n);
  for (int d = 0; d < dim; ++d) {
    for (int k = 0; k < half; ++k) spectrum(k) = coeffs.mode(k)(d);
    for (int k = half + 1; k < n; ++k) spectrum(k) = coeffs.mode(k - n)(d);
    spectrum(half) = 0.5 * (coeffs.mode(half)(d) + coeffs.mode(-half)(d));
    fft.inv(series, spectrum);
    out.row(d) = series.transpose();
  }
  fft.ClearFlag(Eigen::FFT<double>::Unscaled);
  return out;
}

template <class Fn>
ModeMultiplier make_multiplier(int n_tau, Fn&& per_mode) {
  const int half = n_tau / 2;
  ModeMultiplier m(n_tau + 1);
  for (int l = -half; l <= half; ++l) m(l + half) = per_mode(l);
  return m;
}

inline SpectralCoeffs apply_multiplier(SpectralCoeffs coeffs,
                                       const ModeMultiplier& m) {
  coeffs.data() = coeffs.data().array().rowwise() * m.array();
  return coeffs;
}

/// phi_k evaluated on the imaginary axis, phi_k(i theta), k in {1, 2}.
inline cplx phi(int k, double theta) {
  constexpr cplx i{0.0, 1.0};
  if (k == 1) {
    const double half = 0.5 * theta;
    const double sinc = half == 0.0 ? 1.0 : std::sin(half) / half;
    return std::polar(sinc, half);
  }
  if (k == 2) {
    if (std::abs(theta) < 1.0) {
      // sum_j (i theta)^j / (j + 2)!, truncated well below rounding for |theta| < 1
      const cplx z = i * theta;
      cplx term = 1.0 / 2.0;
      cplx sum = term;
      for (int j = 1; j <= 16; ++j) {
        term *= z / static_cast<double>(j + 2);
        sum += term;
      }
      return sum;
    }
    const cplx z = i * theta;
    return (std::exp(z) - 1.0 - z) / (z * z);
  }
  throw InvalidInput("phi: k must be 1 or 2, got " + std::to_string(k));
}

/// exp(-s d_tau / eps): mode l picks up exp(-i l s/eps).
inline ModeMultiplier shift_multiplier(int n_tau, double s_over_eps) {
  return make_multiplier(n_tau, [&](int l) {
    return std::polar(1.0, -static_cast<double>(l) * s_over_eps);
  });
}

/// phi_k(-s d_tau / eps): mode l picks up phi_k(-i l s/eps).
inline ModeMultiplier phi_multiplier(int k, int n_tau, double s_over_eps) {
  return make_multiplier(n_tau, [&](int l) {
    return phi(k, -static_cast<double>(l) * s_over_eps);
  });
}

inline SpectralCoeffs apply_exp_shift(SpectralCoeffs coeffs, double s_over_eps) {
  const int n = coeffs.n_tau();
  return apply_multiplier(std::move(coeffs), shift_multiplier(n, s_over_eps));
}

inline SpectralCoeffs apply_phi(int k, SpectralCoeffs coeffs, double s_over_eps) {
  const int n = coeffs.n_tau();
  return apply_multiplier(std::move(coeffs), phi_multiplier(k, n, s_over_eps));
}

/// Pi: the tau-average, i.e. the zero mode.
inline StateVector average_pi(const SpectralCoeffs& coeffs) {
  return coeffs.mode(0);
}

/// L = d_tau.
inline SpectralCoeffs derivative(SpectralCoeffs coeffs) {
  const int n = coeffs.n_tau();
  return apply_multiplier(std::move(coeffs), make_multiplier(n, [](int l) {
                            return cplx{0.0, static_cast<double>(l)};
                          }));
}

/// A = L^{-1}(I - Pi): zero-mean antiderivative of the zero-mean part.
inline SpectralCoeffs antiderivative_A(SpectralCoeffs coeffs) {
  const int n = coeffs.n_tau();
  return apply_multiplier(std::move(coeffs), make_multiplier(n, [](int l) {
                            return l == 0 ? cplx{}
                                          : 1.0 / cplx{0.0, static_cast<double>(l)};
                          }));
}

inline StateVector eval_at_tau(const SpectralCoeffs& coeffs, double tau) {
  const double t = std::remainder(tau, kTwoPi);
  const int half = coeffs.max_mode();
  StateVector out = StateVector::Zero(coeffs.dim());
  for (int l = -half; l <= half; ++l) {
    const double w = (l == half || l == -half) ? 0.5 : 1.0;
    out += coeffs.mode(l) * std::polar(w, l * t);
  }
  return out;
}

}  // namespace tsi
