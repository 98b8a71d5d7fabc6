#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tsi/spectral.hpp"

namespace tsi {

/// An instance of  u' = J [ (1/eps) M u + grad H1(u) ].
///
/// All maps act on complex state vectors; real problems keep zero imaginary
/// parts. The inner product is  <a, b> = inner_weight * Re(a^H b).
struct ProblemSpec {
  std::string name;
  int dim = 0;
  bool is_real = true;
  double inner_weight = 1.0;

  std::function<StateVector(const StateVector&)> apply_J;
  std::function<StateVector(const StateVector&)> apply_M;
  std::function<StateVector(const StateVector&)> grad_H1;
  std::function<double(const StateVector&)> H1_value;
  /// x -> exp(tau J M) x.
  std::function<StateVector(double, const StateVector&)> propagate;
};

inline double inner(const ProblemSpec& p, const StateVector& a,
                    const StateVector& b) {
  return p.inner_weight * a.dot(b).real();
}

/// Full vector field J[(1/eps) M u + grad H1(u)].
inline StateVector vector_field(const ProblemSpec& p, double eps,
                                const StateVector& u) {
  return p.apply_J(p.apply_M(u) / eps + p.grad_H1(u));
}

/// f_tau(v) = exp(-tau J M) J grad H1(exp(tau J M) v).
inline StateVector f_tau(const ProblemSpec& p, double tau, const StateVector& v) {
  const double t = std::remainder(tau, kTwoPi);
  return p.propagate(-t, p.apply_J(p.grad_H1(p.propagate(t, v))));
}

/// Dense matrix of a linear map, probed column by column.
template <class LinearMap>
Eigen::MatrixXcd dense_matrix(int dim, LinearMap&& map) {
  Eigen::MatrixXcd m(dim, dim);
  for (int k = 0; k < dim; ++k) {
    m.col(k) = map(StateVector::Unit(dim, k));
  }
  return m;
}

inline Eigen::MatrixXcd propagator_matrix(const ProblemSpec& p, double tau) {
  return dense_matrix(p.dim, [&](const StateVector& e) { return p.propagate(tau, e); });
}

struct Invariants {
  double H = 0.0;  ///< total energy I + H1
  double I = 0.0;  ///< oscillatory energy (1/(2 eps)) <M u, u>
  double m = 0.0;  ///< mass <u, u>
};

inline Invariants invariants(const ProblemSpec& p, const StateVector& u,
                             double eps) {
  Invariants out;
  out.I = inner(p, p.apply_M(u), u) / (2.0 * eps);
  out.H = out.I + p.H1_value(u);
  out.m = inner(p, u, u);
  return out;
}

/// f_tau sampled at every collocation node, with exp(+-tau_j J M) cached.
class CollocatedField {
 public:
  CollocatedField(ProblemSpec problem, TauGrid grid)
      : problem_(std::move(problem)), grid_(grid) {
    const int n = grid_.size();
    const Eigen::MatrixXcd J = dense_matrix(problem_.dim, problem_.apply_J);
    forward_.reserve(n);
    backward_J_.reserve(n);
    for (int j = 0; j < n; ++j) {
      forward_.push_back(propagator_matrix(problem_, grid_.node(j)));
      backward_J_.push_back(propagator_matrix(problem_, -grid_.node(j)) * J);
    }
  }

  const ProblemSpec& problem() const { return problem_; }
  const TauGrid& grid() const { return grid_; }

  GridValues operator()(const GridValues& values) const {
    GridValues out(values.rows(), values.cols());
    StateVector lifted(values.rows());
    for (int j = 0; j < grid_.size(); ++j) {
      lifted.noalias() = forward_[j] * values.col(j);
      out.col(j).noalias() = backward_J_[j] * problem_.grad_H1(lifted);
    }
    return out;
  }

 private:
  ProblemSpec problem_;
  TauGrid grid_;
  std::vector<Eigen::MatrixXcd> forward_;
  std::vector<Eigen::MatrixXcd> backward_J_;
};

}  // namespace tsi
