#include <gtest/gtest.h>

#include "tsi/diagnostics.hpp"
#include "tsi/integrators.hpp"
#include "tsi/oracles.hpp"
#include "tsi/problems.hpp"

using namespace tsi;
using std::numbers::pi;

namespace {

// x' = v, v' = -x as J M u with M = I, no nonlinearity.
ProblemSpec harmonic_oscillator() {
  ProblemSpec p;
  p.name = "harmonic";
  p.dim = 2;
  p.is_real = true;
  p.apply_J = [](const StateVector& u) {
    StateVector r(2);
    r << u(1), -u(0);
    return r;
  };
  p.apply_M = [](const StateVector& u) { return u; };
  p.grad_H1 = [](const StateVector&) { return StateVector::Zero(2).eval(); };
  p.H1_value = [](const StateVector&) { return 0.0; };
  p.propagate = [](double tau, const StateVector& v) {
    StateVector r(2);
    r << std::cos(tau) * v(0) + std::sin(tau) * v(1), -std::sin(tau) * v(0) + std::cos(tau) * v(1);
    return r;
  };
  return p;
}

}  // namespace

TEST(Dopri5, HarmonicOscillatorPeriod) {
  StateVector y(2);
  y << 1.0, 0.5;
  const StateVector out = rk_adaptive(harmonic_oscillator(), y, 1.0, 2 * pi);
  EXPECT_LT((out - y).norm(), 1e-9);
}

TEST(Dopri5, FreeHenonHeilesMatchesRotation) {
  const ProblemSpec p = free_flow(make_henon_heiles());
  const double eps = 0.1;
  const StateVector out = rk_adaptive(p, henon_heiles_u0(), eps, 1.0);
  EXPECT_LT((out - p.propagate(1.0 / eps, henon_heiles_u0())).norm(), 1e-9);
}

TEST(Dopri5, ConservesHenonHeilesEnergy) {
  const ProblemSpec p = make_henon_heiles();
  const double eps = 0.5;
  OdeTolerance tol;
  tol.rtol = 1e-10;
  double worst = 0.0;
  const double h0 = invariants(p, henon_heiles_u0(), eps).H;
  rk_adaptive(p, henon_heiles_u0(), eps, 1.0, tol, [&](double, const StateVector& u) {
    worst = std::max(worst, std::abs(invariants(p, u, eps).H - h0) / std::abs(h0));
  });
  EXPECT_LT(worst, 1e-8);
}

TEST(Dopri5, RejectsBadInputAndCapsSteps) {
  EXPECT_THROW(rk_adaptive(make_henon_heiles(), henon_heiles_u0(), 0.1, 0.0), InvalidInput);
  OdeTolerance tol;
  tol.max_steps = 10;
  EXPECT_THROW(rk_adaptive(make_henon_heiles(), henon_heiles_u0(), 1e-3, 1.0, tol),
               ResourceError);
}

TEST(Dopri5, TighterToleranceChangesLittle) {
  const ProblemSpec p = make_henon_heiles();
  OdeTolerance loose, tight;
  loose.rtol = 1e-10;
  loose.atol = 1e-12;
  tight.rtol = 1e-11;
  tight.atol = 1e-13;
  const StateVector a = rk_adaptive(p, henon_heiles_u0(), 0.1, 1.0, loose);
  const StateVector b = rk_adaptive(p, henon_heiles_u0(), 0.1, 1.0, tight);
  EXPECT_LT((a - b).norm() / b.norm(), 1e-8);
}

TEST(Strang, ZeroFieldStaysZero) {
  const StateVector z = StateVector::Zero(16);
  EXPECT_EQ(strang_splitting_nls(z, 0.1, 0.01, 1.0, 16).norm(), 0.0);
}

TEST(Strang, LinearFlowPhase) {
  // Tiny amplitude: the cubic flow is the identity to rounding.
  const int nx = 16;
  const Eigen::VectorXd x = nls_grid(nx);
  const int k = 3;
  const double eps = 0.2, dt = 0.01, amp = 1e-9;
  StateVector u(nx);
  for (int j = 0; j < nx; ++j) u(j) = amp * std::exp(cplx{0, k * x(j)});
  const StateVector out = strang_splitting_nls(u, eps, dt, dt, nx);
  const cplx factor = std::polar(1.0, -dt * k * k / eps);
  EXPECT_LT((out - factor * u).norm() / u.norm(), 1e-12);
}

TEST(Strang, MassConserved) {
  const int nx = 16;
  const ProblemSpec p = make_nls(nx);
  const StateVector u0 = nls_u0(nx);
  for (double dt : {0.1, 0.013, 1e-3}) {
    const double t_end = 100 * dt;
    const StateVector u = strang_splitting_nls(u0, 0.05, dt, t_end, nx);
    EXPECT_NEAR(invariants(p, u, 1.0).m / invariants(p, u0, 1.0).m, 1.0, 1e-13) << dt;
  }
}

TEST(Strang, RejectsNonIntegerStepCount) {
  EXPECT_THROW(strang_splitting_nls(nls_u0(16), 0.1, 0.3, 1.0, 16), InvalidInput);
  EXPECT_THROW(strang_splitting_nls(nls_u0(8), 0.1, 0.1, 1.0, 16), InvalidInput);
}

TEST(Strang, HalvingDtConverges) {
  const int nx = 16;
  const StateVector u0 = nls_u0(nx);
  const double eps = 0.1;
  const StateVector a = strang_splitting_nls(u0, eps, 1e-3, 1.0, nx);
  const StateVector b = strang_splitting_nls(u0, eps, 5e-4, 1.0, nx);
  const StateVector c = strang_splitting_nls(u0, eps, 2.5e-4, 1.0, nx);
  const double r = (a - b).norm() / (b - c).norm();
  EXPECT_GT(r, 3.5);
  EXPECT_LT(r, 4.5);
}

TEST(Strang, AgreesWithFineTwoScaleRun) {
  const int nx = 16;
  const double eps = 0.5;
  const ProblemSpec p = make_nls(nx);
  const StateVector strang = strang_splitting_nls(nls_u0(nx), eps, 1e-5, 1.0, nx);
  const CollocatedField f(p, TauGrid(256));
  SchemeConfig c;
  c.scheme = Scheme::SE2;
  c.h = 1e-3;
  const StateVector se2 =
      extract_solution(integrate(f, c, prepare_initial_data_2nd(f, nls_u0(nx), eps), 1.0), p);
  EXPECT_LT(relative_solution_error(se2, strang), 1e-7);
}
