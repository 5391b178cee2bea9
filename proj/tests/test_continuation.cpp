#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dichotomy/continuation.hpp"
#include "dichotomy/linstab.hpp"
#include "dichotomy/rd_solver.hpp"

using namespace dichotomy;

namespace {

constexpr std::size_t kCells = 128;

Vec mode_one_guess(const SteadyProblem& pb, double par, double amp) {
  Vec x = pb.constant_state(par);
  const auto n = pb.cells();
  for (int c : {0, pb.components() - 1})
    for (Eigen::Index i = 0; i < n; ++i)
      x[c * n + i] += amp * std::cos(std::numbers::pi * pb.grid().center(static_cast<std::size_t>(i)));
  return x;
}

BranchPoint mode_one_solution(const SteadyProblem& pb) {
  NewtonOptions no;
  no.damping = false;
  return newton_steady(pb, mode_one_guess(pb, 1.0, 0.1), 1.0, no);
}

RDState as_rd_state(const SteadyProblem& pb, const Vec& x) {
  return RDState{0.0, pb.component(x, 0), pb.component(x, 1), pb.component(x, 2)};
}

// The 1-mode branch of the conserved system, traced once for the tests below.
struct ConservedBranch {
  SteadyProblem pb{SteadySystem::Conserved, ModelParams{}, Grid(1, kCells, 1.0)};
  BranchPoint start = mode_one_solution(pb);
  Branch branch = trace(0.05);

  Branch trace(double ds_max) const {
    ContinuationControl c;
    c.max_steps = 400;
    c.parameter_min = 0.3;
    c.parameter_max = 2.0;
    c.ds_max = ds_max;
    return continue_branch(pb, start, 1, c);
  }

  static const ConservedBranch& get() {
    static const ConservedBranch b;
    return b;
  }
};

std::vector<double> event_parameters(const Branch& br, EventKind kind) {
  std::vector<double> out;
  for (const auto& e : br.events)
    if (e.kind == kind) out.push_back(e.parameter);
  std::sort(out.begin(), out.end());
  return out;
}

bool near_any(const std::vector<double>& xs, double target, double tol) {
  return std::any_of(xs.begin(), xs.end(), [&](double x) { return std::abs(x - target) <= tol; });
}

}  // namespace

TEST(Newton, ConstantGuessIsExact) {
  SteadyProblem pb(SteadySystem::Conserved, ModelParams{}, Grid(1, kCells, 1.0));
  const auto pt = newton_steady(pb, pb.constant_state(1.3), 1.3);
  EXPECT_LE(pt.iterations, 2);
  EXPECT_LE(pt.residual, 1e-10);
  EXPECT_LT(pb.total_density(pt.state).spread(), 1e-12);
  EXPECT_NEAR(pb.mean_mass(pt.state), 1.3, 1e-12);
}

TEST(Newton, NonconstantProfileAtUnitMass) {
  const auto& cb = ConservedBranch::get();
  EXPECT_LE(cb.start.residual, 1e-10);
  EXPECT_GT(cb.pb.total_density(cb.start.state).spread(), 0.1);
  EXPECT_NEAR(cb.start.state[cb.pb.state_size()], 0.0, 1e-10);  // multiplier vanishes at a solution
}

TEST(Newton, SolutionIsFixedPointOfTimeStepper) {
  // Splitting leaves a per-step change of O(dt^2) (Lie) or O(dt^3) (Strang) at a true steady state.
  const auto& cb = ConservedBranch::get();
  const RDState s = as_rd_state(cb.pb, cb.start.state);
  auto change = [&](double dt, Scheme sc) {
    const RDState o = step(s, StepControl{dt, sc, ExchangeTreatment::Exact}, cb.pb.params());
    double diff = 0;
    for (std::size_t i = 0; i < kCells; ++i)
      diff = std::max({diff, std::abs(o.u1[i] - s.u1[i]), std::abs(o.u2[i] - s.u2[i]), std::abs(o.v[i] - s.v[i])});
    return diff;
  };
  EXPECT_LE(change(1e-5, Scheme::ImexCN), 1e-8);
  EXPECT_NEAR(change(1e-6, Scheme::ImexBE) / change(1e-7, Scheme::ImexBE), 100.0, 10.0);
}

TEST(Newton, ReflectedSolutionConvergesImmediately) {
  const auto& cb = ConservedBranch::get();
  const auto pt = newton_steady(cb.pb, cb.pb.reflect(cb.start.state), 1.0);
  EXPECT_LE(pt.iterations, 2);
  EXPECT_GT((pt.state - cb.start.state).cwiseAbs().maxCoeff(), 0.1);
}

TEST(Newton, StateSizedGuessAccepted) {
  SteadyProblem pb(SteadySystem::Conserved, ModelParams{}, Grid(1, 32, 1.0));
  const Vec g = pb.constant_state(0.7).head(pb.state_size());
  EXPECT_LE(newton_steady(pb, g, 0.7).residual, 1e-10);
  EXPECT_THROW(newton_steady(pb, Vec::Zero(5), 0.7), ValidationError);
}

TEST(Newton, ReportsFailure) {
  SteadyProblem pb(SteadySystem::Conserved, ModelParams{}, Grid(1, 64, 1.0));
  NewtonOptions no;
  no.max_iterations = 1;
  try {
    newton_steady(pb, mode_one_guess(pb, 1.0, 0.3), 1.0, no);
    FAIL();
  } catch (const NoConvergenceError& e) {
    EXPECT_GT(e.best_residual(), 0.0);
  }
}

TEST(Steady, ResidualIsReflectionEquivariant) {
  for (auto sys : {SteadySystem::Conserved, SteadySystem::Growth, SteadySystem::LimitConserved,
                   SteadySystem::LimitGrowth}) {
    SteadyProblem pb(sys, ModelParams{}, Grid(1, 50, 1.0));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.1, 2.0);
    Vec x(pb.size());
    for (auto& xi : x) xi = U(rng);
    const Vec a = pb.residual(pb.reflect(x), 0.9);
    const Vec b = pb.reflect(pb.residual(x, 0.9));
    EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0) << to_string(sys);
  }
}

TEST(Steady, JacobianMatchesFiniteDifferences) {
  for (auto sys : {SteadySystem::Conserved, SteadySystem::Growth, SteadySystem::LimitConserved,
                   SteadySystem::LimitGrowth}) {
    SteadyProblem pb(sys, ModelParams{}, Grid(1, 12, 1.0));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.2, 1.8);
    Vec x(pb.size());
    for (auto& xi : x) xi = U(rng);
    const Eigen::MatrixXd J(pb.jacobian(x, 1.1));
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const Vec col = (pb.residual(xp, 1.1) - pb.residual(xm, 1.1)) / (2 * h);
      EXPECT_LE((col - J.col(j)).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, J.col(j).cwiseAbs().maxCoeff()))
          << to_string(sys) << " column " << j;
    }
  }
}

TEST(LeadingEigs, ConstantStateMatchesModeMatrices) {
  ModelParams m;
  const double M = 1.0;
  std::vector<double> gaps;
  for (std::size_t n : {64u, 128u, 256u}) {
    Grid g(1, n, 1.0);
    SteadyProblem pb(SteadySystem::Conserved, m, g);
    const auto eigs = leading_eigs(pb, pb.constant_state(M), M, 6);
    int flagged = 0;
    double worst_discrete = 0, worst_continuous = 0;
    for (const auto& e : eigs) {
      if (e.mass_neutral) {
        ++flagged;
        continue;
      }
      double bd = INFINITY, bc = INFINITY;
      for (int k = 0; k <= 8; ++k) {
        for (auto z : eigenvalues(assemble_An(k, M, m, &g))) bd = std::min(bd, std::abs(z - e.value));
        for (auto z : eigenvalues(assemble_An(k, M, m))) bc = std::min(bc, std::abs(z - e.value));
      }
      worst_discrete = std::max(worst_discrete, bd);
      worst_continuous = std::max(worst_continuous, bc);
      EXPECT_LE(e.residual, 1e-8);
    }
    EXPECT_EQ(flagged, 1);
    EXPECT_LE(worst_discrete, 1e-8) << n;
    gaps.push_back(worst_continuous);
    if (n == 256) {
      // the two unstable modes (n = 1, 2) are within 1e-4 of the continuous wavenumber
      for (std::size_t i = 0; i < 2; ++i) {
        double bc = INFINITY;
        for (int k = 0; k <= 8; ++k)
          for (auto z : eigenvalues(assemble_An(k, M, m))) bc = std::min(bc, std::abs(z - eigs[i].value));
        EXPECT_LE(bc, 1e-4) << eigs[i].value;
      }
    }
  }
  // the gap grows like k^4 h^2; mode 4 at n = 256 sits near 2e-3
  EXPECT_LE(gaps[2], 2.5e-3);
  const double order = std::log2(gaps[1] / gaps[2]);
  EXPECT_NEAR(order, 2.0, 0.1);
  EXPECT_NEAR(std::log2(gaps[0] / gaps[1]), 2.0, 0.1);
}

TEST(Continuation, ConservedBranchFoldsAndPitchforks) {
  const auto& cb = ConservedBranch::get();
  const auto folds = event_parameters(cb.branch, EventKind::Fold);
  const auto pitch = event_parameters(cb.branch, EventKind::Pitchfork);
  EXPECT_TRUE(near_any(folds, 0.78621, 0.02));
  EXPECT_TRUE(near_any(folds, 1.13259, 0.02));
  EXPECT_TRUE(near_any(pitch, 0.936341, 0.01));
  EXPECT_TRUE(near_any(pitch, 1.09886, 0.01));
  for (const auto& e : cb.branch.events)
    if (e.kind == EventKind::Pitchfork) EXPECT_TRUE(e.antisymmetric_null_vector) << e.parameter;
}

TEST(Continuation, AcceptedPointsAreConvergedAndReproducible) {
  const auto& cb = ConservedBranch::get();
  ASSERT_GT(cb.branch.points.size(), 20u);
  NewtonOptions no;
  no.with_stability = false;
  for (std::size_t i = 0; i < cb.branch.points.size(); i += 7) {
    const auto& p = cb.branch.points[i];
    EXPECT_LE(p.residual, 1e-10);
    const auto again = newton_steady(cb.pb, p.state, p.parameter, no);
    EXPECT_LE((again.state - p.state).cwiseAbs().maxCoeff(), 1e-9) << p.parameter;
  }
  for (std::size_t i = 1; i < cb.branch.points.size(); ++i)
    EXPECT_GT(cb.branch.points[i].arclength, cb.branch.points[i - 1].arclength);
}

TEST(Continuation, EventsStableUnderStepHalving) {
  const auto& cb = ConservedBranch::get();
  const Branch fine = cb.trace(0.025);
  for (auto kind : {EventKind::Fold, EventKind::Pitchfork}) {
    const auto a = event_parameters(cb.branch, kind);
    const auto b = event_parameters(fine, kind);
    for (double x : a) EXPECT_TRUE(near_any(b, x, 1e-3)) << to_string(kind) << " " << x;
  }
}

TEST(Continuation, GrowthConstantBranchMatchesModeDeterminant) {
  ModelParams m;
  Grid g(1, kCells, 1.0);
  SteadyProblem pb(SteadySystem::Growth, m, g);
  const auto start = newton_steady(pb, pb.constant_state(8.0), 8.0);
  EXPECT_TRUE(start.stable);
  ContinuationControl c;
  c.ds = c.ds_max = 0.1;
  c.parameter_min = 5.5;
  c.max_steps = 100;
  const Branch br = continue_branch(pb, start, -1, c);
  const auto pitch = event_parameters(br, EventKind::Pitchfork);
  for (int n : {1, 2}) {
    auto det = [&](double r) { return det_expansion(assemble_Bn(n, with_growth(m, r), &g).entries); };
    const auto roots = bracketed_roots(det, ScanRange{5.5, 8.0, 200}, 1e-13);
    ASSERT_EQ(roots.size(), 1u);
    EXPECT_TRUE(near_any(pitch, roots[0], 1e-3)) << "mode " << n << " root " << roots[0];
  }
}

TEST(Continuation, StepUnderflowKeepsPartialBranch) {
  SteadyProblem pb(SteadySystem::Conserved, ModelParams{}, Grid(1, 64, 1.0));
  const auto start = mode_one_solution(pb);
  ContinuationControl c;
  c.ds = c.ds_max = 0.5;
  c.ds_min = 0.2;
  c.max_corrector_iterations = 1;
  try {
    continue_branch(pb, start, 1, c);
    FAIL();
  } catch (const StuckBranchError& e) {
    ASSERT_FALSE(e.partial().points.empty());
    EXPECT_EQ(e.partial().points.front().parameter, start.parameter);
  }
}

TEST(Continuation, SwitchingNeedsPitchfork) {
  const auto& cb = ConservedBranch::get();
  BifurcationEvent ev;
  ev.kind = EventKind::Fold;
  EXPECT_THROW(switch_branch(cb.pb, ev, 1), ValidationError);
}
