#pragma once

// Builds initial states and solver inputs from a RunConfig and runs each
// pipeline in memory; writing results is left to the caller.

#include <cmath>
#include <numbers>
#include <vector>

#include "dichotomy/config.hpp"
#include "dichotomy/continuation.hpp"
#include "dichotomy/cross_solver.hpp"
#include "dichotomy/limit_harness.hpp"
#include "dichotomy/linstab.hpp"
#include "dichotomy/noise.hpp"
#include "dichotomy/rd_solver.hpp"

namespace dichotomy {

/// Total density and pheromone from the [ic] section: level plus cosine mode in
/// x plus seeded noise (stream 0 for u, 1 for v).
inline std::pair<Field, Field> initial_fields(const RunConfig& c) {
  const double L = c.grid.length;
  const double amp = c.ic.cos_amplitude;
  const int mode = c.ic.cos_mode;
  Field u = sample(c.grid, [&](double x, double) {
    return c.ic.u + amp * std::cos(mode * std::numbers::pi * x / L);
  });
  const double v_level = c.ic.v ? *c.ic.v : c.params.alpha * c.ic.u / c.params.beta;
  Field v(c.grid, std::vector<double>(c.grid.cells(), v_level));
  if (c.ic.noise > 0.0) {
    const auto seed = *c.ic.seed;
    if (c.ic.noise_target != NoiseTarget::V) add_noise(u, c.ic.noise, seed, 0);
    if (c.ic.noise_target != NoiseTarget::U) add_noise(v, c.ic.noise, seed, 1);
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] < 0.0) throw ValidationError("initial total density is negative; reduce ic.cos_amplitude or ic.noise");
    if (v[i] < 0.0) throw ValidationError("initial pheromone is negative; reduce ic.noise");
  }
  return {u, v};
}

inline RDState initial_rd_state(const RunConfig& c) {
  auto [u, v] = initial_fields(c);
  auto [u1, u2] = split_total(u, v, c.params, c.ic.split);
  return RDState{0.0, u1, u2, v};
}

inline CrossState initial_cross_state(const RunConfig& c) {
  auto [u, v] = initial_fields(c);
  return CrossState{0.0, u, v};
}

inline RunSettings run_settings(const RunConfig& c) {
  RunSettings rs;
  rs.t_end = c.time.t_end;
  rs.snapshot_times = c.time.snapshots;
  rs.series_every = c.time.series_every;
  rs.ctrl = StepControl{c.time.dt, c.time.scheme, c.time.exchange};
  return rs;
}

inline ModeSystem mode_system(const RunConfig& c) {
  if (c.model == ModelKind::CrossLimit) throw ValidationError("linear stability needs an rd3 model");
  return c.model == ModelKind::Rd3Conserved ? ModeSystem::A : ModeSystem::B;
}

struct DispersionRow {
  int n;
  double k2;
  std::complex<double> lambda;  ///< eigenvalue with the largest real part
};

struct LinstabResult {
  std::vector<DispersionRow> dispersion;
  std::vector<std::pair<double, GrowthRate>> growth;  ///< over the scan range
};

inline LinstabResult run_linstab(const RunConfig& c) {
  const ModeSystem w = mode_system(c);
  LinstabResult r;
  for (int n = 0; n <= c.scan.dispersion_modes; ++n) {
    const auto ev = eigenvalues(assemble(w, n, c.scan.parameter, c.params, c.scan.growth_ratio));
    r.dispersion.push_back({n, wavenumber_sq(n, c.params), ev.front()});
  }
  const ScanRange range{c.scan.param_min, c.scan.param_max, c.scan.param_count};
  for (std::size_t i = 0; i < range.count; ++i) {
    const double par = range.at(i);
    r.growth.emplace_back(par, max_growth_rate(w, par, c.params, c.scan.dispersion_modes, c.scan.growth_ratio));
  }
  return r;
}

inline std::vector<NeutralCurve> run_neutral_curves(const RunConfig& c) {
  const ModeSystem w = mode_system(c);
  std::vector<NeutralCurve> out;
  for (int n = 1; n <= c.scan.n_max; ++n)
    out.push_back(neutral_curve(w, n, {c.scan.param_min, c.scan.param_max, c.scan.param_count},
                                {c.scan.d_min, c.scan.d_max, c.scan.d_count}, c.params, c.scan.growth_ratio));
  return out;
}

inline SteadySystem steady_system(const RunConfig& c) {
  switch (c.model) {
    case ModelKind::Rd3Conserved: return SteadySystem::Conserved;
    case ModelKind::Rd3Growth: return SteadySystem::Growth;
    case ModelKind::CrossLimit:
      return c.cont.conserved_limit ? SteadySystem::LimitConserved : SteadySystem::LimitGrowth;
  }
  return SteadySystem::Conserved;
}

/// Constant state at the start parameter plus a cosine mode in the density of
/// the slow group (or the total) and in the pheromone.
inline Vec continuation_guess(const SteadyProblem& pb, const RunConfig& c) {
  Vec x = pb.constant_state(c.cont.start);
  const Eigen::Index n = pb.cells();
  const int v_block = pb.components() - 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double phi = c.cont.guess_amplitude *
                       std::cos(c.cont.guess_mode * std::numbers::pi * pb.grid().center(i) / pb.grid().length);
    x[i] += phi;
    x[v_block * n + i] += phi;
  }
  return x;
}

struct ContinuationResult {
  BranchPoint start;
  std::vector<Branch> branches;  ///< one per direction
};

inline ContinuationResult run_continuation(const RunConfig& c) {
  if (c.grid.dim != 1) throw ValidationError("continuation runs on one-dimensional grids; set grid.dim = 1");
  const SteadyProblem pb(steady_system(c), c.params, c.grid, c.cont.growth_ratio);
  ContinuationResult res;
  res.start = newton_steady(pb, continuation_guess(pb, c), c.cont.start);
  ContinuationControl ctrl;
  ctrl.ds = c.cont.ds;
  ctrl.ds_max = c.cont.ds_max;
  ctrl.max_steps = c.cont.max_steps;
  ctrl.parameter_min = c.cont.param_min;
  ctrl.parameter_max = c.cont.param_max;
  std::vector<int> dirs;
  if (c.cont.direction >= 0) dirs.push_back(1);
  if (c.cont.direction <= 0) dirs.push_back(-1);
  for (int d : dirs) {
    try {
      res.branches.push_back(continue_branch(pb, res.start, d, ctrl));
    } catch (const StuckBranchError& e) {
      res.branches.push_back(e.partial());
    }
  }
  return res;
}

inline SweepSetup sweep_setup(const RunConfig& c) {
  SweepSetup s;
  s.params = c.params;
  s.t_end = c.time.t_end;
  s.ctrl = StepControl{c.time.dt, c.time.scheme, c.time.exchange};
  auto [u, v] = initial_fields(c);
  s.u0 = u;
  s.v0 = v;
  s.split = c.ic.split;
  s.parallel = c.sweep.parallel;
  return s;
}

}  // namespace dichotomy
