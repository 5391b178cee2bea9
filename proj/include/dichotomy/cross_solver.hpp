#pragma once

// Semi-implicit stepping for the two-component limit system
//   u_t = Lap(c(v) u) + g(v) (1 - u) u,   v_t = Dv Lap v + alpha u - beta v,
// with c = d + D q/(p+q) and g = (a1 p + a2 q)/(p+q) lagged at the old time level.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <vector>

#include "dichotomy/grid.hpp"
#include "dichotomy/model.hpp"
#include "dichotomy/rd_solver.hpp"

namespace dichotomy {

struct CrossState {
  double t = 0.0;
  Field u, v;
};

/// Pointwise c(v) = d + D q(v)/(p(v)+q(v)).
inline Field mobility(const Field& v, const ModelParams& m) {
  Field c(v.grid);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto s = switching_at(v[i], m);
    c[i] = m.d + m.D * s.q / checked_sum(s.p, s.q);
  }
  return c;
}

/// Effective growth rate (a1 p + a2 q)/(p + q) of the total density.
inline double effective_growth(double v, const ModelParams& m) {
  const auto s = switching_at(v, m);
  return (m.a1 * s.p + m.a2 * s.q) / checked_sum(s.p, s.q);
}

inline void check_state(const CrossState& s, double last_good_t) {
  for (const Field* f : {&s.u, &s.v}) {
    if (!f->all_finite())
      throw BlowUpError("non-finite value produced after t = " + std::to_string(last_good_t), last_good_t);
  }
  for (const Field* f : {&s.u, &s.v}) {
    if (f->min() < -kPositivityTolerance)
      throw PositivityError("negative density " + std::to_string(f->min()) + " at t = " + std::to_string(s.t),
                            s.t);
  }
}

class CrossStepper {
 public:
  CrossStepper(const Grid& grid, const ModelParams& params, const StepControl& ctrl)
      : grid_(grid), params_(params), ctrl_(ctrl), helmholtz_(grid) {
    params_.validate();
    if (!(ctrl.dt > 0.0)) throw ValidationError("time step must be positive");
    if (ctrl.dt > logistic_dt_guard(params))
      throw ValidationError("time step exceeds the logistic stability guard 0.5/max(a1,a2)");
  }

  CrossState step(const CrossState& in) const { return step(in, ctrl_.dt); }

  CrossState step(const CrossState& in, double dt) const {
    const auto& m = params_;
    const Field c = mobility(in.v, m);
    Field rhs = in.u;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      const double u = in.u[i];
      rhs[i] += dt * effective_growth(in.v[i], m) * (1.0 - u) * u;
    }
    CrossState out;
    out.u = grid_.dim == 1 ? solve_1d(c, rhs, dt) : solve_2d(c, rhs, dt);
    const double shift = 1.0 + m.beta * dt;
    Field vr = in.v;
    for (std::size_t i = 0; i < vr.size(); ++i) vr[i] = (vr[i] + dt * m.alpha * in.u[i]) / shift;
    out.v = helmholtz_.solve(vr, m.Dv * dt / shift);
    out.t = in.t + dt;
    check_state(out, in.t);
    return out;
  }

 private:
  // (I - dt Lap_h diag(c)) u = rhs; column sums of the matrix are exactly one.
  Field solve_1d(const Field& c, const Field& rhs, double dt) const {
    const std::size_t n = grid_.n;
    const double k = dt / (grid_.h() * grid_.h());
    std::vector<double> sub(n), diag(n), sup(n);
    for (std::size_t i = 0; i < n; ++i) {
      const bool first = i == 0, last = i + 1 == n;
      sub[i] = first ? 0.0 : -k * c[i - 1];
      sup[i] = last ? 0.0 : -k * c[i + 1];
      diag[i] = 1.0 + k * c[i] * ((first ? 0.0 : 1.0) + (last ? 0.0 : 1.0));
    }
    Field u = rhs;
    solve_tridiagonal(sub, diag, sup, u.values);
    return u;
  }

  Field solve_2d(const Field& c, const Field& rhs, double dt) const {
    const std::size_t n = grid_.n;
    const double k = dt / (grid_.h() * grid_.h());
    using Sp = Eigen::SparseMatrix<double>;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(5 * n * n);
    auto idx = [n](std::size_t i, std::size_t j) { return static_cast<int>(i + n * j); };
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const int row = idx(i, j);
        double diag = 1.0;
        auto couple = [&](std::size_t ii, std::size_t jj) {
          trips.emplace_back(row, idx(ii, jj), -k * c[ii + n * jj]);
          diag += k * c[i + n * j];
        };
        if (i > 0) couple(i - 1, j);
        if (i + 1 < n) couple(i + 1, j);
        if (j > 0) couple(i, j - 1);
        if (j + 1 < n) couple(i, j + 1);
        trips.emplace_back(row, row, diag);
      }
    }
    Sp A(static_cast<int>(n * n), static_cast<int>(n * n));
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Sp> lu(A);
    if (lu.info() != Eigen::Success) throw NumericalError("sparse factorisation failed in cross step");
    Eigen::Map<const Eigen::VectorXd> b(rhs.values.data(), static_cast<Eigen::Index>(rhs.size()));
    Eigen::VectorXd x = lu.solve(b);
    return Field(grid_, std::vector<double>(x.data(), x.data() + x.size()));
  }

  Grid grid_;
  ModelParams params_;
  StepControl ctrl_;
  HelmholtzSolver helmholtz_;
};

inline CrossState step_cross(const CrossState& state, const StepControl& ctrl, const ModelParams& params) {
  return CrossStepper(state.u.grid, params, ctrl).step(state);
}

inline Trajectory<CrossState> run_cross(const RunSettings& settings, const ModelParams& params,
                                        const CrossState& initial) {
  CrossStepper stepper(initial.u.grid, params, settings.ctrl);
  return detail::drive<CrossState>(
      settings, initial, [&](const CrossState& s, double dt) { return stepper.step(s, dt); },
      [](const CrossState& s) { return SeriesRow{s.t, integrate(s.u), s.v.min(), 0.0}; });
}

}  // namespace dichotomy
