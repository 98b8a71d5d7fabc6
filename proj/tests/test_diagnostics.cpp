#include <gtest/gtest.h>

#include <random>

#include "tsi/diagnostics.hpp"
#include "tsi/oracles.hpp"
#include "tsi/problems.hpp"

using namespace tsi;

TEST(RelativeError, Examples) {
  StateVector u(3);
  u << 1.0, 2.0, cplx{0, 2};
  EXPECT_EQ(relative_solution_error(u, u), 0.0);
  EXPECT_DOUBLE_EQ(relative_solution_error(2.0 * u, u), 1.0);
  const StateVector unit = u / u.norm();
  StateVector pert = unit;
  pert(0) += 1e-3;
  EXPECT_NEAR(relative_solution_error(pert, unit), 1e-3, 1e-15);
}

TEST(RelativeError, ScaleInvariant) {
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  StateVector a(5), b(5);
  for (int k = 0; k < 5; ++k) {
    a(k) = {g(rng), g(rng)};
    b(k) = {g(rng), g(rng)};
  }
  const double base = relative_solution_error(a, b);
  for (cplx alpha : {cplx{3.0}, cplx{-0.01}, cplx{0, 2}}) {
    EXPECT_NEAR(relative_solution_error(alpha * a, alpha * b), base, 1e-14 * base);
  }
}

TEST(RelativeError, Errors) {
  EXPECT_THROW(relative_solution_error(StateVector::Ones(2), StateVector::Zero(2)), InvalidInput);
  EXPECT_THROW(relative_solution_error(StateVector::Ones(2), StateVector::Ones(3)), InvalidInput);
}

TEST(ConservationSeries, SingleSampleHasZeroDrift) {
  const auto r = conservation_series({{0.0, henon_heiles_u0()}}, make_henon_heiles(), 0.1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].err_H, 0.0);
  EXPECT_EQ(r[0].err_I, 0.0);
  EXPECT_EQ(r[0].err_M, 0.0);
}

TEST(ConservationSeries, ErrorsAndFlags) {
  EXPECT_THROW(conservation_series({}, make_henon_heiles(), 0.1), InvalidInput);
  EXPECT_THROW(conservation_series({{1.0, henon_heiles_u0()}, {0.5, henon_heiles_u0()}},
                                   make_henon_heiles(), 0.1),
               InvalidInput);
  // I(u0) = 0 when q1 = p1 = 0: drift reported absolute and flagged.
  StateVector u(4);
  u << 0.0, 0.1, 0.0, 0.1;
  StateVector w = u;
  w(0) = 0.01;
  const auto r = conservation_series({{0.0, u}, {1.0, w}}, make_henon_heiles(), 1.0);
  EXPECT_TRUE(r[1].abs_I);
  EXPECT_FALSE(r[1].abs_H);
  EXPECT_NEAR(r[1].err_I, 0.5 * 0.01 * 0.01, 1e-17);
}

TEST(ConservationSeries, OracleTrajectoryConservesEnergy) {
  const ProblemSpec p = make_henon_heiles();
  const double eps = 0.1;
  Trajectory traj;
  OdeTolerance tol;
  rk_adaptive(p, henon_heiles_u0(), eps, 1.0, tol,
              [&](double t, const StateVector& u) { traj.emplace_back(t, u); });
  const auto r = conservation_series(traj, p, eps);
  ASSERT_EQ(r.size(), traj.size());
  for (const auto& rec : r) {
    EXPECT_LT(rec.err_H, 1e-8);
    EXPECT_GE(rec.err_I, 0.0);
  }
}

TEST(ConservationSeries, StrangTrajectoryConservesMass) {
  const int nx = 16;
  const ProblemSpec p = make_nls(nx);
  Trajectory traj{{0.0, nls_u0(nx)}};
  for (int k = 1; k <= 20; ++k) {
    traj.emplace_back(0.05 * k, strang_splitting_nls(traj.back().second, 0.1, 0.001, 0.05, nx));
  }
  for (const auto& rec : conservation_series(traj, p, 0.1)) EXPECT_LE(rec.err_M, 1e-13);
}

TEST(ConservationSeries, CarriesExtraInvariant) {
  const double eps = 0.5;
  const ProblemSpec p = make_cpd(eps);
  const StateVector u0 = cpd_to_canonical(cpd_initial_state(), eps);
  auto energy = [eps](const StateVector& u) { return cpd_energy(cpd_from_canonical(u, eps)); };
  const StateVector u1 = rk_adaptive(p, u0, eps, 1.0);
  const auto r = conservation_series({{0.0, u0}, {1.0, u1}}, p, eps, energy);
  ASSERT_TRUE(r[1].E && r[1].err_E);
  EXPECT_LT(*r[1].err_E, 1e-7);
}

TEST(ConservationSeries, RebasingIsConsistent) {
  const ProblemSpec p = make_henon_heiles();
  const double eps = 0.1;
  Trajectory traj;
  rk_adaptive(p, henon_heiles_u0(), eps, 0.5, OdeTolerance{},
              [&](double t, const StateVector& u) { traj.emplace_back(t, u); });
  const std::size_t k = traj.size() / 2;
  const auto full = conservation_series(traj, p, eps);
  const Trajectory tail(traj.begin() + k, traj.end());
  const auto rebased = conservation_series(tail, p, eps);
  for (std::size_t i = 0; i < rebased.size(); ++i) {
    EXPECT_NEAR(rebased[i].H, full[k + i].H, 1e-16);
    EXPECT_NEAR(rebased[i].err_I, std::abs(full[k + i].I - full[k].I) / std::abs(full[k].I), 1e-14);
  }
}

TEST(SlopeFit, ExactPowers) {
  const std::vector<double> h{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> e2, e1;
  for (double v : h) {
    e2.push_back(v * v);
    e1.push_back(3.7 * v);
  }
  EXPECT_NEAR(slope_fit(h, e2), 2.0, 1e-12);
  EXPECT_NEAR(slope_fit(h, e1), 1.0, 1e-12);
}

TEST(SlopeFit, NoisySquare) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  std::vector<double> h, e;
  for (double v = 0.1; v > 1e-3; v /= 2) {
    h.push_back(v);
    e.push_back(v * v * (1 + noise(rng)));
  }
  const double s = slope_fit(h, e);
  EXPECT_GE(s, 1.95);
  EXPECT_LE(s, 2.05);
}

TEST(SlopeFit, Errors) {
  EXPECT_THROW(slope_fit({0.1, 0.05}, {1.0, 0.5}), InvalidInput);
  EXPECT_THROW(slope_fit({0.1, 0.05, 0.0}, {1.0, 0.5, 0.1}), InvalidInput);
  EXPECT_THROW(slope_fit({0.1, 0.05, 0.02}, {1.0, -0.5, 0.1}), InvalidInput);
}

TEST(Sampling, Stride) {
  EXPECT_EQ(sampling_stride(5000), 3);
  EXPECT_EQ(sampling_stride(2000), 1);
  EXPECT_EQ(sampling_stride(10), 1);
  EXPECT_EQ(sampling_stride(1'000'000), 500);
}
