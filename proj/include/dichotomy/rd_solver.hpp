#pragma once

// Time stepping for the three-component system (u1, u2, v). The 1/eps exchange
// is integrated per cell in closed form with v frozen over the step, diffusion is
// implicit, logistic growth and pheromone production are explicit.

#include <algorithm>
#include <cmath>
#include <array>
#include <limits>
#include <string>
#include <vector>

#include "dichotomy/errors.hpp"
#include "dichotomy/grid.hpp"
#include "dichotomy/model.hpp"

namespace dichotomy {

enum class Scheme { ImexBE, ImexCN };

/// Exact: closed-form solution of the frozen-v 2x2 exchange ODE.
/// BackwardEuler: one implicit Euler step of the same linear system.
enum class ExchangeTreatment { Exact, BackwardEuler };

inline const char* to_string(Scheme s) { return s == Scheme::ImexBE ? "imex-be" : "imex-cn"; }
inline Scheme scheme_from_string(const std::string& s) {
  if (s == "imex-be") return Scheme::ImexBE;
  if (s == "imex-cn") return Scheme::ImexCN;
  throw ValidationError("unknown scheme '" + s + "'");
}

struct StepControl {
  double dt = 1e-3;
  Scheme scheme = Scheme::ImexBE;
  ExchangeTreatment exchange = ExchangeTreatment::Exact;

  bool operator==(const StepControl&) const = default;
};

struct RDState {
  double t = 0.0;
  Field u1, u2, v;
};

inline constexpr double kPositivityTolerance = 1e-10;

/// Largest dt for which the explicit logistic update keeps densities nonnegative.
inline double logistic_dt_guard(const ModelParams& m) {
  const double a = std::max(m.a1, m.a2);
  return a > 0.0 ? 0.5 / a : std::numeric_limits<double>::infinity();
}

/// L2 norm of q(v) u1 - p(v) u2, the distance from the slow manifold.
inline double defect_norm(const RDState& s, const ModelParams& m) {
  Field w(s.u1.grid);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto sw = switching_at(s.v[i], m);
    w[i] = sw.q * s.u1[i] - sw.p * s.u2[i];
  }
  return l2_norm(w);
}

inline void check_state(const RDState& s, double last_good_t) {
  for (const Field* f : {&s.u1, &s.u2, &s.v}) {
    if (!f->all_finite())
      throw BlowUpError("non-finite value produced after t = " + std::to_string(last_good_t), last_good_t);
  }
  for (const Field* f : {&s.u1, &s.u2, &s.v}) {
    if (f->min() < -kPositivityTolerance)
      throw PositivityError("negative density " + std::to_string(f->min()) + " at t = " + std::to_string(s.t),
                            s.t);
  }
}

class RDStepper {
 public:
  RDStepper(const Grid& grid, const ModelParams& params, const StepControl& ctrl)
      : params_(params), ctrl_(ctrl), helmholtz_(grid) {
    params_.validate();
    grid.validate();
    if (!(ctrl.dt > 0.0)) throw ValidationError("time step must be positive");
    if (ctrl.dt > logistic_dt_guard(params))
      throw ValidationError("time step exceeds the logistic stability guard 0.5/max(a1,a2)");
  }

  const StepControl& control() const { return ctrl_; }
  const ModelParams& params() const { return params_; }

  RDState step(const RDState& in) const { return step(in, ctrl_.dt); }

  RDState step(const RDState& in, double dt) const {
    RDState s = in;
    if (ctrl_.scheme == Scheme::ImexBE) {
      const Field total = sum(in.u1, in.u2);
      growth(s, dt, /*with_pheromone=*/false);
      exchange(s, dt);
      diffuse_implicit(s, dt, &total);
    } else {
      exchange(s, 0.5 * dt);
      growth_heun(s, 0.5 * dt);
      diffuse_cn(s, dt);
      growth_heun(s, 0.5 * dt);
      exchange(s, 0.5 * dt);
    }
    s.t = in.t + dt;
    check_state(s, in.t);
    return s;
  }

 private:
  static Field sum(const Field& a, const Field& b) {
    Field out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
  }

  // Explicit Euler on the logistic terms (and optionally the pheromone kinetics).
  void growth(RDState& s, double dt, bool with_pheromone) const {
    const auto& m = params_;
    for (std::size_t i = 0; i < s.u1.size(); ++i) {
      const double u1 = s.u1[i], u2 = s.u2[i];
      const double crowd = 1.0 - u1 - u2;
      s.u1[i] = u1 + dt * m.a1 * crowd * u1;
      s.u2[i] = u2 + dt * m.a2 * crowd * u2;
      if (with_pheromone) s.v[i] += dt * (m.alpha * (u1 + u2) - m.beta * s.v[i]);
    }
  }

  // Heun's method on the non-exchange kinetics; second order for the Strang split.
  void growth_heun(RDState& s, double dt) const {
    const auto& m = params_;
    auto rhs = [&m](double u1, double u2, double v) {
      const double crowd = 1.0 - u1 - u2;
      return std::array<double, 3>{m.a1 * crowd * u1, m.a2 * crowd * u2, m.alpha * (u1 + u2) - m.beta * v};
    };
    for (std::size_t i = 0; i < s.u1.size(); ++i) {
      const double u1 = s.u1[i], u2 = s.u2[i], v = s.v[i];
      const auto k1 = rhs(u1, u2, v);
      const auto k2 = rhs(u1 + dt * k1[0], u2 + dt * k1[1], v + dt * k1[2]);
      s.u1[i] = u1 + 0.5 * dt * (k1[0] + k2[0]);
      s.u2[i] = u2 + 0.5 * dt * (k1[1] + k2[1]);
      s.v[i] = v + 0.5 * dt * (k1[2] + k2[2]);
    }
  }

  // u1 + u2 is invariant; w = q u1 - p u2 decays at rate (p + q)/eps.
  void exchange(RDState& s, double dt) const {
    const auto& m = params_;
    for (std::size_t i = 0; i < s.u1.size(); ++i) {
      const double v = std::max(s.v[i], 0.0);
      const auto sw = switching_at(v, m);
      const double rate_sum = checked_sum(sw.p, sw.q);
      const double total = s.u1[i] + s.u2[i];
      const double eq1 = sw.p / rate_sum * total;
      const double eq2 = sw.q / rate_sum * total;
      const double z = rate_sum * dt / m.eps;
      const double decay = ctrl_.exchange == ExchangeTreatment::Exact ? std::exp(-z) : 1.0 / (1.0 + z);
      s.u1[i] = eq1 + (s.u1[i] - eq1) * decay;
      s.u2[i] = eq2 + (s.u2[i] - eq2) * decay;
    }
  }

  void diffuse_implicit(RDState& s, double dt, const Field* production_total) const {
    const auto& m = params_;
    s.u1 = helmholtz_.solve(s.u1, m.d * dt);
    s.u2 = helmholtz_.solve(s.u2, (m.d + m.D) * dt);
    // ((1 + beta dt) - dt Dv Lap) v_new = v + dt alpha (u1 + u2)
    const double shift = 1.0 + m.beta * dt;
    Field rhs = s.v;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = (rhs[i] + dt * m.alpha * (*production_total)[i]) / shift;
    s.v = helmholtz_.solve(rhs, m.Dv * dt / shift);
  }

  void diffuse_cn(RDState& s, double dt) const {
    const auto& m = params_;
    auto cn = [&](const Field& f, double coeff) {
      Field rhs = laplacian_apply(f);
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = f[i] + 0.5 * dt * coeff * rhs[i];
      return helmholtz_.solve(rhs, 0.5 * dt * coeff);
    };
    s.u1 = cn(s.u1, m.d);
    s.u2 = cn(s.u2, m.d + m.D);
    s.v = cn(s.v, m.Dv);
  }

  ModelParams params_;
  StepControl ctrl_;
  HelmholtzSolver helmholtz_;
};

inline RDState step(const RDState& state, const StepControl& ctrl, const ModelParams& params) {
  return RDStepper(state.u1.grid, params, ctrl).step(state);
}

/// Scalar diagnostics recorded along a run.
struct SeriesRow {
  double t;
  double mass;   ///< integral of the total density
  double min_v;
  double defect; ///< slow-manifold defect (0 for the limit system)
};

struct RunSettings {
  double t_end = 1.0;
  std::vector<double> snapshot_times;
  std::size_t series_every = 1;  ///< record a series row every k steps (and at the end)
  StepControl ctrl;
};

template <class State>
struct Trajectory {
  std::vector<State> snapshots;
  std::vector<SeriesRow> series;
  State final_state;
};

namespace detail {

inline void validate_run(const RunSettings& rs) {
  if (!(rs.t_end > 0.0)) throw ValidationError("t_end must be positive");
  if (!std::is_sorted(rs.snapshot_times.begin(), rs.snapshot_times.end()))
    throw ValidationError("snapshot times must be sorted");
  if (rs.series_every == 0) throw ValidationError("series_every must be at least 1");
}

/// Generic driver: shortens steps to land exactly on snapshot times and t_end.
template <class State, class StepFn, class RowFn>
Trajectory<State> drive(const RunSettings& rs, const State& initial, StepFn&& step_fn, RowFn&& row_fn) {
  validate_run(rs);
  Trajectory<State> traj;
  State s = initial;
  const double t0 = initial.t;
  const double t_end = t0 + rs.t_end;
  auto next_snap = rs.snapshot_times.begin();
  auto emit_snapshots = [&](const State& st) {
    while (next_snap != rs.snapshot_times.end() && t0 + *next_snap <= st.t + 1e-12 * std::max(1.0, st.t)) {
      traj.snapshots.push_back(st);
      ++next_snap;
    }
  };
  emit_snapshots(s);
  traj.series.push_back(row_fn(s));
  std::size_t k = 0;
  const double tol = 1e-12 * std::max(1.0, t_end);
  while (s.t < t_end - tol) {
    double dt = rs.ctrl.dt;
    double target = t_end;
    if (next_snap != rs.snapshot_times.end()) target = std::min(target, t0 + *next_snap);
    if (s.t + dt > target - tol) dt = target - s.t;
    s = step_fn(s, dt);
    if (std::abs(s.t - target) <= tol) s.t = target;
    ++k;
    emit_snapshots(s);
    if (k % rs.series_every == 0 || s.t >= t_end - tol) traj.series.push_back(row_fn(s));
  }
  traj.final_state = s;
  return traj;
}

}  // namespace detail

inline Trajectory<RDState> run(const RunSettings& settings, const ModelParams& params, const RDState& initial) {
  RDStepper stepper(initial.u1.grid, params, settings.ctrl);
  return detail::drive<RDState>(
      settings, initial, [&](const RDState& s, double dt) { return stepper.step(s, dt); },
      [&](const RDState& s) {
        double mass = 0.0;
        for (std::size_t i = 0; i < s.u1.size(); ++i) mass += s.u1[i] + s.u2[i];
        return SeriesRow{s.t, mass * s.u1.grid.cell_volume(), s.v.min(), defect_norm(s, params)};
      });
}

}  // namespace dichotomy
