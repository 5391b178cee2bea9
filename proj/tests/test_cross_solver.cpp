#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dichotomy/cross_solver.hpp"
#include "dichotomy/noise.hpp"
#include "dichotomy/steady.hpp"

using namespace dichotomy;

namespace {

std::size_t argmax(const Field& f) {
  return static_cast<std::size_t>(std::max_element(f.values.begin(), f.values.end()) - f.values.begin());
}

CrossState perturbed_constant(const Grid& g, double M, double amp) {
  CrossState s{0.0, Field(g, M), Field(g, M)};
  const Field c = cosine_mode(g, 1);
  for (std::size_t i = 0; i < g.cells(); ++i) s.v[i] += amp * c[i];
  return s;
}

}  // namespace

TEST(Mobility, PlateauIsNearSlowDiffusivity) {
  // q(1.125) = 1 - tanh(2.5) at the default steepness, so c - d = D (1 - tanh 2.5) ~ 2.0e-3.
  ModelParams m;
  Grid g(1, 8, 1.0);
  const Field c = mobility(Field(g, 1.125), m);
  EXPECT_NEAR(c[0], m.d + m.D * (1.0 - std::tanh(2.5)), 1e-14);
  EXPECT_LT(c[0] - m.d, 2.1e-3);
  EXPECT_GT(c[0], m.d);
}

TEST(Mobility, SaturatesAtZeroPheromone) {
  ModelParams m;
  Grid g(1, 8, 1.0);
  EXPECT_NEAR(mobility(Field(g, 0.0), m)[0], m.d + m.D, 1e-8);
}

TEST(Mobility, AtLowerThreshold) {
  ModelParams m;
  Grid g(1, 8, 1.0);
  const double q = 0.5 + 0.5 * (1.0 + std::tanh(m.gamma2 * (m.v_star - m.v_sharp)));
  EXPECT_NEAR(q, 0.50005, 1e-5);
  EXPECT_NEAR(mobility(Field(g, m.v_star), m)[0], m.d + m.D * q, 1e-14);
}

TEST(Mobility, BoundedBySlowAndFastRates) {
  ModelParams m;
  Grid g(1, 1000, 1.0);
  const Field v = sample(g, [](double x, double) { return 10.0 * x; });
  const Field c = mobility(v, m);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_GE(c[i], m.d);
    EXPECT_LE(c[i], m.d + m.D);
  }
}

TEST(CrossStep, ConstantGrowthStateIsFixed) {
  ModelParams m;
  m.a1 = m.a2 = 1.0;
  for (int dim : {1, 2}) {
    Grid g(dim, 32, 1.0);
    CrossState s{0.0, Field(g, 1.0), Field(g, m.alpha / m.beta)};
    const CrossState o = step_cross(s, StepControl{1e-3}, m);
    for (std::size_t i = 0; i < g.cells(); ++i) {
      EXPECT_NEAR(o.u[i], 1.0, 1e-12);
      EXPECT_NEAR(o.v[i], 1.0, 1e-12);
    }
  }
}

TEST(CrossStep, MassDriftOverTenThousandSteps) {
  ModelParams m;
  Grid g(1, 128, 1.0);
  CrossState s{0.0, Field(g, 1.0), Field(g, 1.0)};
  add_noise(s.u, 0.3, 11, 0);
  add_noise(s.v, 0.3, 11, 1);
  const double m0 = integrate(s.u);
  CrossStepper st(g, m, StepControl{1e-3});
  for (int k = 0; k < 10000; ++k) s = st.step(s);
  EXPECT_LE(std::abs(integrate(s.u) - m0) / m0, 1e-10);
}

TEST(CrossStep, MassConservedIn2D) {
  ModelParams m;
  Grid g(2, 24, 1.0);
  CrossState s{0.0, Field(g, 1.0), Field(g, 1.0)};
  add_noise(s.u, 0.3, 5, 0);
  add_noise(s.v, 0.3, 5, 1);
  const double m0 = integrate(s.u);
  CrossStepper st(g, m, StepControl{1e-3});
  for (int k = 0; k < 100; ++k) s = st.step(s);
  EXPECT_LE(std::abs(integrate(s.u) - m0) / m0, 1e-12);
}

TEST(CrossStep, ConstantMobilityIsHeatEquation) {
  // With q(v) ~ 0 (v far above the lower threshold, no crowding term) the
  // mobility is d everywhere and u solves the heat equation.
  ModelParams m;
  m.switching = SwitchingKind::DecreasingOnly;
  Grid g(1, 256, 1.0);
  const double amp1 = 0.1, amp3 = 0.05, T = 0.1;
  const Field u0 = sample(g, [&](double x, double) {
    return 1.0 + amp1 * std::cos(std::numbers::pi * x) + amp3 * std::cos(3 * std::numbers::pi * x);
  });
  RunSettings rs;
  rs.t_end = T;
  rs.ctrl.dt = 1e-5;
  rs.series_every = 1000000;
  const auto traj = run_cross(rs, m, CrossState{0.0, u0, Field(g, 3.0)});
  EXPECT_GT(traj.final_state.v.min(), 2.0);
  // Sampled cosines are exact eigenvectors of the discrete Laplacian, so the
  // kernel uses its symbol and the remaining error is the time stepping.
  const Field exact = sample(g, [&](double x, double) {
    const double l1 = laplacian_eigenvalue(g, 1), l3 = laplacian_eigenvalue(g, 3);
    return 1.0 + amp1 * std::exp(m.d * l1 * T) * std::cos(std::numbers::pi * x) +
           amp3 * std::exp(m.d * l3 * T) * std::cos(3 * std::numbers::pi * x);
  });
  double err = 0;
  for (std::size_t i = 0; i < g.cells(); ++i) err = std::max(err, std::abs(traj.final_state.u[i] - exact[i]));
  EXPECT_LE(err, 1e-6);
}

TEST(CrossRun, StableRegimeDecaysToConstant) {
  ModelParams m;
  Grid g(1, 128, 1.0);
  RunSettings rs;
  rs.t_end = 50.0;
  rs.series_every = 1000;
  for (double M : {0.5, 2.0}) {
    const auto traj = run_cross(rs, m, perturbed_constant(g, M, 1e-2));
    EXPECT_LT(traj.final_state.u.spread(), 1e-8) << M;
    EXPECT_LT(traj.final_state.v.spread(), 1e-8) << M;
  }
}

TEST(CrossRun, UnstableRegimeSeparatesPeaks) {
  ModelParams m;
  Grid g(1, 128, 1.0);
  RunSettings rs;
  rs.t_end = 50.0;
  rs.series_every = 1000;
  const CrossState s0 = perturbed_constant(g, 1.0, 1e-2);
  const double v0 = s0.v.min();
  const auto traj = run_cross(rs, m, s0);
  const auto& f = traj.final_state;
  EXPECT_GT(f.u.spread(), 0.5);
  EXPECT_NE(argmax(f.u), argmax(f.v));
  for (const auto& row : traj.series) EXPECT_GE(row.min_v, std::exp(-m.beta * row.t) * v0 - 1e-8);

  // The late-time profile is a discrete steady state of the continuation residual.
  SteadyProblem pb(SteadySystem::LimitConserved, m, g);
  Vec x(pb.size());
  const auto n = static_cast<Eigen::Index>(g.n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = f.u[static_cast<std::size_t>(i)];
    x[n + i] = f.v[static_cast<std::size_t>(i)];
  }
  x[2 * n] = 0.0;
  EXPECT_LE(pb.residual(x, 1.0).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(CrossRun, RejectsStepAboveLogisticGuard) {
  ModelParams m;
  m.a2 = 4.0;
  Grid g(1, 8, 1.0);
  EXPECT_THROW(CrossStepper(g, m, StepControl{0.2}), ValidationError);
}

TEST(CrossRun, FirstOrderInTime) {
  ModelParams m;
  m.a1 = m.a2 = 1.0;
  Grid g(1, 64, 1.0);
  const CrossState s0 = perturbed_constant(g, 0.6, 0.2);
  std::vector<CrossState> fin;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    RunSettings rs;
    rs.ctrl.dt = dt;
    fin.push_back(run_cross(rs, m, s0).final_state);
  }
  const double ratio = (l2_distance(fin[0].u, fin[1].u) + l2_distance(fin[0].v, fin[1].v)) /
                       (l2_distance(fin[1].u, fin[2].u) + l2_distance(fin[1].v, fin[2].v));
  EXPECT_NEAR(ratio, 2.0, 0.2);
}
