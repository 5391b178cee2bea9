#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dichotomy/linstab.hpp"
#include "oracles.hpp"

using namespace dichotomy;

namespace {

double k2(int n, const ModelParams& m) { return std::pow(n * std::numbers::pi / m.L, 2); }

}  // namespace

TEST(ModeMatrix, ConservedMatchesKineticJacobianPlusDiffusion) {
  ModelParams m;
  for (double M : {0.5, 0.94, 1.0, 1.3, 2.0})
    for (int n : {0, 1, 2, 5}) {
      const auto st = constant_steady_conserved(M, m);
      Eigen::Matrix3d expect = reaction_jacobian(st.u1, st.u2, st.v, m);
      expect(0, 0) -= m.d * k2(n, m);
      expect(1, 1) -= (m.d + m.D) * k2(n, m);
      expect(2, 2) -= m.Dv * k2(n, m);
      const auto A = assemble_An(n, M, m);
      EXPECT_LE((A.entries - expect).cwiseAbs().maxCoeff(), 1e-10) << M << " " << n;
      // and against a finite-difference Jacobian
      Eigen::Matrix3d fd = oracle::fd_jacobian(st.u1, st.u2, st.v, m);
      fd(0, 0) -= m.d * k2(n, m);
      fd(1, 1) -= (m.d + m.D) * k2(n, m);
      fd(2, 2) -= m.Dv * k2(n, m);
      EXPECT_LE((A.entries - fd).cwiseAbs().maxCoeff(), 1e-5 * A.entries.cwiseAbs().maxCoeff());
    }
}

TEST(ModeMatrix, GrowthMatchesKineticJacobianPlusDiffusion) {
  ModelParams m = with_growth(ModelParams{}, 0.8, 1.5);
  const auto st = constant_steady_growth(m);
  for (int n : {0, 1, 3}) {
    Eigen::Matrix3d expect = reaction_jacobian(st.u1, st.u2, st.v, m);
    expect(0, 0) -= m.d * k2(n, m);
    expect(1, 1) -= (m.d + m.D) * k2(n, m);
    expect(2, 2) -= m.Dv * k2(n, m);
    EXPECT_LE((assemble_Bn(n, m).entries - expect).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ModeMatrix, CouplingColumn) {
  ModelParams m;
  const double M = 1.1;
  const auto st = constant_steady_conserved(M, m);
  const double c = (eval_dq(st.v, m) * st.u1 - eval_dp(st.v, m) * st.u2) / m.eps;
  const auto A = assemble_An(3, M, m).entries;
  EXPECT_DOUBLE_EQ(A(0, 2), -c);
  EXPECT_DOUBLE_EQ(A(1, 2), c);
}

TEST(ModeMatrix, ZeroModeExchangeBlock) {
  ModelParams m;
  for (double M : {0.3, 0.9, 1.2, 3.0}) {
    const auto A = assemble_An(0, M, m).entries;
    const auto st = constant_steady_conserved(M, m);
    const double p = eval_p(st.v, m), q = eval_q(st.v, m);
    Eigen::EigenSolver<Eigen::Matrix2d> es(A.topLeftCorner<2, 2>());
    std::vector<double> ev{es.eigenvalues()[0].real(), es.eigenvalues()[1].real()};
    std::sort(ev.begin(), ev.end());
    EXPECT_NEAR(ev[1], 0.0, 1e-9);
    EXPECT_NEAR(ev[0], -(p + q) / m.eps, 1e-9);
    // columns of the exchange block sum to zero
    EXPECT_NEAR(A(0, 0) + A(1, 0), 0.0, 1e-12);
    EXPECT_NEAR(A(0, 1) + A(1, 1), 0.0, 1e-12);
  }
}

TEST(ModeMatrix, ZeroModeCarriesConservedDirection) {
  ModelParams m;
  for (double M = 0.2; M < 3.0; M += 0.1) {
    const auto mm = assemble_An(0, M, m);
    double smallest = INFINITY;
    for (auto z : eigenvalues(mm)) smallest = std::min(smallest, std::abs(z));
    EXPECT_LE(smallest, 1e-8 * mm.entries.norm()) << M;
  }
}

TEST(ModeMatrix, NoGrowthReducesToConservedAtUnitMass) {
  ModelParams m;
  for (int n : {0, 1, 4, 10})
    EXPECT_LE((assemble_Bn(n, m).entries - assemble_An(n, 1.0, m).entries).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ModeMatrix, LeadingGrowthEntry) {
  ModelParams m = with_growth(ModelParams{}, 0.7, 2.0);
  const auto st = constant_steady_growth(m);
  for (int n : {0, 1, 2}) {
    const double b11 = -m.d * k2(n, m) - m.a1 * st.u1 - eval_q(st.v, m) / m.eps;
    EXPECT_NEAR(assemble_Bn(n, m).entries(0, 0), b11, 1e-12 * std::abs(b11));
  }
}

TEST(ModeMatrix, RejectsNegativeMode) {
  ModelParams m;
  EXPECT_THROW(assemble_An(-1, 1.0, m), ValidationError);
  EXPECT_THROW(assemble_Bn(-1, m), ValidationError);
  EXPECT_THROW(assemble_An(1, 0.0, m), ValidationError);
}

TEST(ModeMatrix, EigenvaluesMatchCharacteristicPolynomial) {
  ModelParams m;
  for (double M : {0.5, 0.94, 1.0, 1.1, 2.0})
    for (int n = 0; n <= 8; ++n) {
      const auto mm = assemble_An(n, M, m);
      auto ev = eigenvalues(mm);
      auto roots = oracle::charpoly_roots(mm.entries);
      for (auto z : ev) {
        double best = INFINITY;
        for (auto r : roots) best = std::min(best, std::abs(z - r));
        EXPECT_LE(best, 1e-9) << M << " " << n;
      }
    }
}

TEST(GrowthRate, TuringWindowAtDefaults) {
  ModelParams m;
  EXPECT_GT(max_growth_rate(ModeSystem::A, 1.0, m).lambda_max, 0.0);
  EXPECT_LT(max_growth_rate(ModeSystem::A, 2.0, m).lambda_max, 0.0);
  EXPECT_LT(max_growth_rate(ModeSystem::A, 0.5, m).lambda_max, 0.0);
}

TEST(GrowthRate, EqualDiffusionIsMoreStable) {
  ModelParams m;
  ModelParams same = m;
  same.D = 1e-6;
  EXPECT_LT(max_growth_rate(ModeSystem::A, 1.0, same).lambda_max, max_growth_rate(ModeSystem::A, 1.0, m).lambda_max);
}

TEST(GrowthRate, HighModesAreDampedAtCutoff) {
  ModelParams m;
  const auto disp = dispersion(ModeSystem::A, 1.0, m, 64);
  EXPECT_LT(disp[64].real(), 0.0);
  EXPECT_LT(disp[64].real(), disp[63].real());
  EXPECT_LT(max_growth_rate(ModeSystem::A, 1.0, m).mode, 64);
  EXPECT_THROW(max_growth_rate(ModeSystem::A, 1.0, m, 0), ValidationError);
}

TEST(NeutralCurve, FirstModeRootsInMass) {
  ModelParams m;
  const auto roots = neutral_parameters(ModeSystem::A, 1, ScanRange{0.5, 2.0, 301}, m);
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_NEAR(roots[0], 0.936341, 0.005);
  EXPECT_NEAR(roots[1], 1.09886, 0.005);
}

TEST(NeutralCurve, PointsAreRootsBothWays) {
  ModelParams m;
  for (int n : {1, 2, 3}) {
    const auto curve = neutral_curve(ModeSystem::A, n, ScanRange{0.5, 2.0, 150}, ScanRange{0.01, 0.5, 200}, m);
    ASSERT_FALSE(curve.points.empty()) << n;
    for (auto [M, D] : curve.points) {
      ModelParams mm = m;
      mm.D = D;
      const auto a = assemble_An(n, M, mm).entries;
      const double scale = det_scale(a);
      EXPECT_LE(std::abs(det_expansion(a)), 1e-8 * scale);
      EXPECT_LE(std::abs(det_expansion(a) - det_lu(a)), 1e-12 * scale);
    }
  }
}

TEST(NeutralCurve, GrowthSystemUnstableForSmallRate) {
  ModelParams m;
  const auto curve = neutral_curve(ModeSystem::B, 1, ScanRange{0.05, 3.0, 100}, ScanRange{0.005, 0.5, 100}, m);
  ASSERT_GE(curve.points.size(), 50u);
  // critical D grows with r, so small r and large D are on the unstable side
  for (std::size_t i = 1; i < curve.points.size(); ++i)
    EXPECT_GT(curve.points[i].second, curve.points[i - 1].second);
  EXPECT_LT(curve.points.front().second, m.D);
  EXPECT_GT(max_growth_rate(ModeSystem::B, 0.3, m).lambda_max, 0.0);
}

TEST(NeutralCurve, CoarseScanRejected) {
  ModelParams m;
  EXPECT_THROW(neutral_curve(ModeSystem::A, 1, ScanRange{0.5, 2.0, 50}, ScanRange{0.01, 0.5, 200}, m),
               ValidationError);
}

TEST(NeutralCurve, NoSignChangeGivesEmptySlice) {
  ModelParams m;
  EXPECT_TRUE(neutral_parameters(ModeSystem::A, 1, ScanRange{1.5, 3.0, 100}, m).empty());
}
