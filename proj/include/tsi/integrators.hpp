#pragma once

// Time steppers on the two-scale equation
//
//   d_t U + (1/eps) d_tau U = f_tau(U),
//
// discretised by Fourier collocation in tau. SE1 and SE2 are the symmetric
// exponential schemes; FD (Crank-Nicolson type) and ME (two-step exponential)
// are the baselines they are compared against.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsi/errors.hpp"
#include "tsi/problem.hpp"
#include "tsi/quadrature.hpp"
#include "tsi/spectral.hpp"
#include "tsi/state.hpp"

namespace tsi {

enum class Scheme { SE1, SE2, FD, ME };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::SE1: return "SE1";
    case Scheme::SE2: return "SE2";
    case Scheme::FD: return "FD";
    case Scheme::ME: return "ME";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view name) {
  if (name == "SE1" || name == "se1") return Scheme::SE1;
  if (name == "SE2" || name == "se2") return Scheme::SE2;
  if (name == "FD" || name == "fd") return Scheme::FD;
  if (name == "ME" || name == "me") return Scheme::ME;
  throw InvalidInput("unknown scheme '" + std::string(name) +
                     "' (expected SE1, SE2, FD or ME)");
}

struct SchemeConfig {
  double h = 0.1;
  Scheme scheme = Scheme::SE2;
  double fp_tol = 1e-10;
  int fp_max_iter = 200;
  int avf_quad_nodes = 4;

  /// Negative h is accepted: it runs the scheme backwards in time.
  void validate() const {
    if (!(std::isfinite(h) && h != 0.0)) throw InvalidInput("h must be finite and nonzero");
    if (!(fp_tol > 0.0)) throw InvalidInput("fp_tol must be > 0");
    if (fp_max_iter < 1) throw InvalidInput("fp_max_iter must be >= 1");
    if (avf_quad_nodes < 2) throw InvalidInput("avf_quad_nodes must be >= 2");
  }
};

struct StepResult {
  TwoScaleState state;
  int fp_iterations = 0;
  double residual = 0.0;
  /// f_tau(U^n) at the incoming state; ME keeps it as next step's history.
  GridValues nonlinearity;
};

struct FixedPointResult {
  GridValues solution;
  int iterations = 0;
  double residual = 0.0;
};

/// Largest per-node Euclidean distance between two sets of grid values.
inline double grid_sup_distance(const GridValues& a, const GridValues& b) {
  return (a - b).colwise().norm().maxCoeff();
}

/// Plain Picard iteration x <- map(x), started from `guess`.
template <class Map>
FixedPointResult fixed_point_solve(Map&& map, GridValues guess, double tol,
                                   int max_iter, long step = -1) {
  std::vector<double> trace;
  GridValues x = std::move(guess);
  for (int it = 1; it <= max_iter; ++it) {
    GridValues next = map(x);
    if (!next.allFinite()) {
      throw DivergenceError("fixed-point iterate became non-finite after " +
                                std::to_string(it) + " iterations",
                            it, step);
    }
    const double residual = grid_sup_distance(next, x);
    trace.push_back(residual);
    x = std::move(next);
    if (residual <= tol) return {std::move(x), it, residual};
  }
  const double last = trace.back();
  throw ConvergenceError("fixed-point iteration did not reach tol " +
                             std::to_string(tol) + " in " +
                             std::to_string(max_iter) + " iterations (residual " +
                             std::to_string(last) + ")",
                         last, max_iter, std::move(trace), step);
}

// ---------------------------------------------------------------------------
// Initial data

/// U(0, tau) = u0 + r(tau) - r(0),  r = eps * A[f_tau(u0)].
inline TwoScaleState prepare_initial_data_2nd(const CollocatedField& field,
                                              const StateVector& u0, double eps) {
  const TauGrid& grid = field.grid();
  const GridValues u0_grid = u0.replicate(1, grid.size());
  SpectralCoeffs r_hat = antiderivative_A(dft(field(u0_grid), grid));
  r_hat.data() *= eps;
  const StateVector r0 = eval_at_tau(r_hat, 0.0);
  GridValues values = idft(r_hat);
  values.colwise() += u0 - r0;
  return TwoScaleState(grid, std::move(values), eps);
}

inline TwoScaleState prepare_initial_data_2nd(const ProblemSpec& problem,
                                              const StateVector& u0, double eps,
                                              const TauGrid& grid) {
  return prepare_initial_data_2nd(CollocatedField(problem, grid), u0, eps);
}

/// U(0, tau) = u0 for every tau (not well prepared; for comparison only).
inline TwoScaleState prepare_initial_data_naive(const TauGrid& grid,
                                                const StateVector& u0, double eps) {
  return TwoScaleState(grid, u0.replicate(1, grid.size()), eps);
}

// ---------------------------------------------------------------------------
// Steppers

namespace detail {

inline TwoScaleState advanced(const TwoScaleState& s, GridValues values, double h) {
  TwoScaleState out = s;
  out.values = std::move(values);
  out.t += h;
  out.step += 1;
  out.phase.advance(h, s.eps);
  return out;
}

inline void require_scheme(const SchemeConfig& cfg, Scheme expected) {
  cfg.validate();
  if (cfg.scheme != expected) {
    throw InvalidInput("stepper for " + std::string(to_string(expected)) +
                       " called with scheme " + std::string(to_string(cfg.scheme)));
  }
}

inline void require_finite(const TwoScaleState& s) {
  if (!s.finite()) {
    throw DivergenceError("non-finite two-scale state at step " +
                              std::to_string(s.step),
                          0, s.step);
  }
}

}  // namespace detail

/// SE1: implicit half stage, explicit exponential midpoint update.
inline StepResult step_se1(const TwoScaleState& state, const CollocatedField& field,
                           const SchemeConfig& cfg) {
  detail::require_scheme(cfg, Scheme::SE1);
  const int n = state.grid.size();
  const double h = cfg.h;
  const double theta = h / state.eps;

  const SpectralCoeffs u_hat = dft(state.values, state.grid);
  const ModeMultiplier half_shift = shift_multiplier(n, 0.5 * theta);
  const ModeMultiplier half_phi = phi_multiplier(1, n, 0.5 * theta);

  const SpectralCoeffs base = apply_multiplier(u_hat, half_shift);
  GridValues f_n = field(state.values);
  auto half_stage = [&](const GridValues& forcing) {
    SpectralCoeffs c = apply_multiplier(dft(forcing, state.grid), half_phi);
    c.data() = base.data() + (0.5 * h) * c.data();
    return idft(c);
  };

  FixedPointResult mid = fixed_point_solve(
      [&](const GridValues& x) { return half_stage(field(x)); }, half_stage(f_n),
      cfg.fp_tol, cfg.fp_max_iter, state.step);

  SpectralCoeffs next = apply_multiplier(dft(field(mid.solution), state.grid),
                                         phi_multiplier(1, n, theta));
  next.data() = apply_multiplier(u_hat, shift_multiplier(n, theta)).data() +
                h * next.data();
  StepResult out{detail::advanced(state, idft(next), h), mid.iterations,
                 mid.residual, std::move(f_n)};
  detail::require_finite(out.state);
  return out;
}

/// SE2: exponential average-vector-field scheme, chord integral by
/// Gauss-Legendre quadrature.
inline StepResult step_se2(const TwoScaleState& state, const CollocatedField& field,
                           const SchemeConfig& cfg) {
  detail::require_scheme(cfg, Scheme::SE2);
  const int n = state.grid.size();
  const double h = cfg.h;
  const double theta = h / state.eps;
  const QuadratureRule rule = gauss_legendre_unit(cfg.avf_quad_nodes);

  const SpectralCoeffs base =
      apply_multiplier(dft(state.values, state.grid), shift_multiplier(n, theta));
  const ModeMultiplier full_phi = phi_multiplier(1, n, theta);
  auto update = [&](const GridValues& forcing) {
    SpectralCoeffs c = apply_multiplier(dft(forcing, state.grid), full_phi);
    c.data() = base.data() + h * c.data();
    return idft(c);
  };
  auto chord_average = [&](const GridValues& x) {
    GridValues acc = GridValues::Zero(x.rows(), x.cols());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double rho = rule.nodes[i];
      acc += rule.weights[i] * field((1.0 - rho) * state.values + rho * x);
    }
    return acc;
  };

  GridValues f_n = field(state.values);
  FixedPointResult sol = fixed_point_solve(
      [&](const GridValues& x) { return update(chord_average(x)); }, update(f_n),
      cfg.fp_tol, cfg.fp_max_iter, state.step);

  StepResult out{detail::advanced(state, std::move(sol.solution), h),
                 sol.iterations, sol.residual, std::move(f_n)};
  detail::require_finite(out.state);
  return out;
}

/// FD: two-stage finite difference in t, the d_tau terms inverted exactly
/// mode by mode.
inline StepResult step_fd(const TwoScaleState& state, const CollocatedField& field,
                          const SchemeConfig& cfg) {
  detail::require_scheme(cfg, Scheme::FD);
  const int n = state.grid.size();
  const double h = cfg.h;
  const double a = 0.5 * h / state.eps;
  const ModeMultiplier inv_implicit =
      make_multiplier(n, [&](int l) { return 1.0 / cplx{1.0, l * a}; });
  const ModeMultiplier explicit_part =
      make_multiplier(n, [&](int l) { return cplx{1.0, -l * a}; });

  const SpectralCoeffs u_hat = dft(state.values, state.grid);
  GridValues f_n = field(state.values);

  SpectralCoeffs mid = dft(f_n, state.grid);
  mid.data() = u_hat.data() + (0.5 * h) * mid.data();
  const GridValues u_mid = idft(apply_multiplier(std::move(mid), inv_implicit));

  SpectralCoeffs next = dft(field(u_mid), state.grid);
  next.data() = apply_multiplier(u_hat, explicit_part).data() + h * next.data();
  StepResult out{detail::advanced(state, idft(apply_multiplier(std::move(next), inv_implicit)), h),
                 0, 0.0, std::move(f_n)};
  detail::require_finite(out.state);
  return out;
}

/// ME: two-step exponential integrator. `previous_f` is f_tau(U^{n-1}) and is
/// required for every step after the first.
inline StepResult step_me(const TwoScaleState& state, const GridValues* previous_f,
                          const CollocatedField& field, const SchemeConfig& cfg) {
  detail::require_scheme(cfg, Scheme::ME);
  if (state.step > 0 && previous_f == nullptr) {
    throw InvalidState("ME step " + std::to_string(state.step) +
                       " needs f_tau(U^{n-1}) from the previous step");
  }
  const int n = state.grid.size();
  const double h = cfg.h;
  const double theta = h / state.eps;
  const ModeMultiplier phi1 = phi_multiplier(1, n, theta);
  const ModeMultiplier phi2 = phi_multiplier(2, n, theta);

  GridValues f_n = field(state.values);
  const SpectralCoeffs f_n_hat = dft(f_n, state.grid);
  SpectralCoeffs euler =
      apply_multiplier(dft(state.values, state.grid), shift_multiplier(n, theta));
  euler.data() += h * apply_multiplier(f_n_hat, phi1).data();

  GridValues older;
  if (state.step == 0) {
    older = field(idft(euler));  // f_tau(U*) for the startup step
  }
  SpectralCoeffs diff = f_n_hat;
  if (state.step == 0) {
    diff.data() = dft(older, state.grid).data() - f_n_hat.data();
  } else {
    diff.data() = f_n_hat.data() - dft(*previous_f, state.grid).data();
  }
  euler.data() += h * apply_multiplier(std::move(diff), phi2).data();

  StepResult out{detail::advanced(state, idft(euler), h), 0, 0.0, std::move(f_n)};
  detail::require_finite(out.state);
  return out;
}

/// u(t_n) = exp(tau* J M) U^n(tau*),  tau* = t_n / eps mod 2pi.
inline StateVector extract_solution(const TwoScaleState& state,
                                    const ProblemSpec& problem) {
  const double tau_star = state.phase.value();
  return problem.propagate(tau_star, eval_at_tau(dft(state.values, state.grid), tau_star));
}

// ---------------------------------------------------------------------------
// Driver

/// Runs one scheme along a trajectory; owns the ME history.
class Integrator {
 public:
  Integrator(const CollocatedField& field, SchemeConfig cfg)
      : field_(&field), cfg_(cfg) {
    cfg_.validate();
  }

  const SchemeConfig& config() const { return cfg_; }

  StepResult step(const TwoScaleState& state) {
    StepResult r = [&] {
      switch (cfg_.scheme) {
        case Scheme::SE1: return step_se1(state, *field_, cfg_);
        case Scheme::SE2: return step_se2(state, *field_, cfg_);
        case Scheme::FD: return step_fd(state, *field_, cfg_);
        case Scheme::ME:
          return step_me(state, history_ ? &*history_ : nullptr, *field_, cfg_);
      }
      throw InvalidInput("unknown scheme");
    }();
    if (cfg_.scheme == Scheme::ME) history_ = r.nonlinearity;
    return r;
  }

  void reset() { history_.reset(); }

  /// Rebuilds the ME history from a stored U^{n-1} when resuming mid-run.
  void seed_history(const GridValues& previous_values) {
    history_ = (*field_)(previous_values);
  }

 private:
  const CollocatedField* field_;
  SchemeConfig cfg_;
  std::optional<GridValues> history_;
};

/// Number of steps of size h that reach t_end; rejects non-integer ratios.
inline long step_count(double t_end, double h) {
  if (!(t_end >= 0.0) || !(h > 0.0)) throw InvalidInput("need t_end >= 0 and h > 0");
  const double ratio = t_end / h;
  const long n = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidInput("t_end / h = " + std::to_string(ratio) + " is not an integer");
  }
  return n;
}

struct TrajectoryStats {
  long steps = 0;
  long fp_iterations = 0;
  double mean_fp_iterations() const {
    return steps == 0 ? 0.0 : static_cast<double>(fp_iterations) / steps;
  }
};

/// Integrates to t_end; `observer(state)` is called on the initial state and
/// after every step.
template <class Observer>
TwoScaleState integrate(const CollocatedField& field, const SchemeConfig& cfg,
                        TwoScaleState state, double t_end, Observer&& observer,
                        TrajectoryStats* stats = nullptr) {
  Integrator stepper(field, cfg);
  const long n = step_count(t_end, cfg.h);
  observer(static_cast<const TwoScaleState&>(state));
  for (long k = 0; k < n; ++k) {
    StepResult r = stepper.step(state);
    if (stats) {
      stats->steps += 1;
      stats->fp_iterations += r.fp_iterations;
    }
    state = std::move(r.state);
    observer(static_cast<const TwoScaleState&>(state));
  }
  return state;
}

inline TwoScaleState integrate(const CollocatedField& field, const SchemeConfig& cfg,
                               TwoScaleState state, double t_end,
                               TrajectoryStats* stats = nullptr) {
  return integrate(field, cfg, std::move(state), t_end, [](const TwoScaleState&) {},
                   stats);
}

}  // namespace tsi
