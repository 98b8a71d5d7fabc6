#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "tsi/errors.hpp"
#include "tsi/problem.hpp"

namespace tsi {

/// |u_num - u_ref| / |u_ref| in the Euclidean norm. For grid functions this
/// equals the discrete L2 ratio, the quadrature weight cancels.
inline double relative_solution_error(const StateVector& u_num,
                                      const StateVector& u_ref) {
  if (u_num.size() != u_ref.size()) throw InvalidInput("relative_solution_error: size mismatch");
  const double ref = u_ref.norm();
  if (ref == 0.0) throw InvalidInput("relative_solution_error: zero reference");
  return (u_num - u_ref).norm() / ref;
}

struct ConservationRecord {
  double t = 0.0;
  double H = 0.0, I = 0.0, m = 0.0;
  double err_H = 0.0, err_I = 0.0, err_M = 0.0;
  /// Optional extra invariant (the CPD energy E(x, v)).
  std::optional<double> E, err_E;
  /// Set when the initial value vanished and the drift is absolute.
  bool abs_H = false, abs_I = false, abs_M = false, abs_E = false;
};

namespace detail {

inline double drift(double q, double q0, bool& absolute) {
  absolute = (q0 == 0.0);
  return absolute ? std::abs(q - q0) : std::abs(q - q0) / std::abs(q0);
}

}  // namespace detail

using Trajectory = std::vector<std::pair<double, StateVector>>;
using ExtraInvariant = std::function<double(const StateVector&)>;

/// Invariants along a trajectory with drifts relative to the first sample.
inline std::vector<ConservationRecord> conservation_series(
    const Trajectory& trajectory, const ProblemSpec& problem, double eps,
    const ExtraInvariant& extra = {}) {
  if (trajectory.empty()) throw InvalidInput("conservation_series: empty trajectory");
  std::vector<ConservationRecord> out;
  out.reserve(trajectory.size());
  const Invariants q0 = invariants(problem, trajectory.front().second, eps);
  const std::optional<double> e0 =
      extra ? std::optional<double>(extra(trajectory.front().second)) : std::nullopt;
  double last_t = trajectory.front().first;
  for (const auto& [t, u] : trajectory) {
    if (t < last_t) throw InvalidInput("conservation_series: time must be non-decreasing");
    last_t = t;
    const Invariants q = invariants(problem, u, eps);
    ConservationRecord r;
    r.t = t;
    r.H = q.H;
    r.I = q.I;
    r.m = q.m;
    r.err_H = detail::drift(q.H, q0.H, r.abs_H);
    r.err_I = detail::drift(q.I, q0.I, r.abs_I);
    r.err_M = detail::drift(q.m, q0.m, r.abs_M);
    if (e0) {
      r.E = extra(u);
      r.err_E = detail::drift(*r.E, *e0, r.abs_E);
    }
    out.push_back(r);
  }
  return out;
}

/// Least-squares slope of log(err) against log(h).
inline double slope_fit(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size()) throw InvalidInput("slope_fit: length mismatch");
  if (h.size() < 3) throw InvalidInput("slope_fit: need at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !(err[i] > 0.0)) {
      throw InvalidInput("slope_fit: inputs must be positive");
    }
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw InvalidInput("slope_fit: all h values equal");
  return (n * sxy - sx * sy) / denom;
}

/// Record every stride-th step of a long run (plus first and last).
inline long sampling_stride(long total_steps, long max_samples = 2000) {
  if (total_steps <= 0) return 1;
  return std::max<long>(1, (total_steps + max_samples - 1) / max_samples);
}

}  // namespace tsi
