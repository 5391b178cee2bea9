#pragma once

// Discretised stationary problems on a 1D Neumann grid: residuals, sparse
// Jacobians and parameter derivatives for the conserved and growth versions of
// the three-component system and of the two-component limit system.

#include <Eigen/Sparse>

#include <cmath>
#include <string>
#include <vector>

#include "dichotomy/grid.hpp"
#include "dichotomy/model.hpp"

namespace dichotomy {

enum class SteadySystem {
  Conserved,       ///< three components, a1 = a2 = 0, parameter M
  Growth,          ///< three components, a1 = r, a2 = ratio * r, parameter r
  LimitConserved,  ///< two-component limit, no growth, parameter M
  LimitGrowth,     ///< two-component limit with growth, parameter r
};

inline const char* to_string(SteadySystem s) {
  switch (s) {
    case SteadySystem::Conserved: return "rd3-conserved";
    case SteadySystem::Growth: return "rd3-growth";
    case SteadySystem::LimitConserved: return "cross-limit-conserved";
    case SteadySystem::LimitGrowth: return "cross-limit";
  }
  return "?";
}

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Stationary problem. Unknowns are stored block-wise: [u1 | u2 | v] or [u | v],
/// followed by a scalar multiplier for the conserved systems. The multiplier is
/// added to the density equations and the mean-mass equation closes the system;
/// at a solution the multiplier is zero.
class SteadyProblem {
 public:
  SteadyProblem(SteadySystem system, const ModelParams& params, const Grid& grid, double growth_ratio = 1.0)
      : system_(system), params_(params), grid_(grid), ratio_(growth_ratio) {
    params_.validate();
    grid_.validate();
    if (grid_.dim != 1) throw ValidationError("stationary problems are one-dimensional");
    if (std::abs(grid_.length - params_.L) > 1e-14 * params_.L)
      throw ValidationError("grid length must equal the model length L");
    if (conserved()) params_.a1 = params_.a2 = 0.0;
  }

  SteadySystem system() const { return system_; }
  const ModelParams& params() const { return params_; }
  const Grid& grid() const { return grid_; }
  double growth_ratio() const { return ratio_; }

  bool conserved() const { return system_ == SteadySystem::Conserved || system_ == SteadySystem::LimitConserved; }
  bool limit() const { return system_ == SteadySystem::LimitConserved || system_ == SteadySystem::LimitGrowth; }
  const char* parameter_name() const { return conserved() ? "M" : "r"; }

  int components() const { return limit() ? 2 : 3; }
  Eigen::Index cells() const { return static_cast<Eigen::Index>(grid_.n); }
  /// Number of state values (without the multiplier).
  Eigen::Index state_size() const { return components() * cells(); }
  /// Number of unknowns, including the multiplier when present.
  Eigen::Index size() const { return state_size() + (conserved() ? 1 : 0); }

  /// Parameters with growth rates set from the continuation parameter.
  ModelParams params_at(double parameter) const {
    ModelParams m = params_;
    if (!conserved()) {
      m.a1 = parameter;
      m.a2 = ratio_ * parameter;
    }
    return m;
  }

  /// Spatially constant steady state at the given parameter.
  Vec constant_state(double parameter) const {
    const Eigen::Index n = cells();
    Vec x = Vec::Zero(size());
    const auto st = conserved() ? constant_steady_conserved(parameter, params_) : constant_steady_growth(params_);
    if (limit()) {
      x.segment(0, n).setConstant(st.u1 + st.u2);
      x.segment(n, n).setConstant(st.v);
    } else {
      x.segment(0, n).setConstant(st.u1);
      x.segment(n, n).setConstant(st.u2);
      x.segment(2 * n, n).setConstant(st.v);
    }
    return x;
  }

  /// Total density u1 + u2 (or u) as a field.
  Field total_density(const Vec& x) const {
    Field f(grid_);
    const Eigen::Index n = cells();
    for (Eigen::Index i = 0; i < n; ++i)
      f[static_cast<std::size_t>(i)] = limit() ? x[i] : x[i] + x[n + i];
    return f;
  }

  Field pheromone(const Vec& x) const {
    Field f(grid_);
    const Eigen::Index n = cells(), off = (components() - 1) * n;
    for (Eigen::Index i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = x[off + i];
    return f;
  }

  Field component(const Vec& x, int c) const {
    Field f(grid_);
    const Eigen::Index n = cells();
    for (Eigen::Index i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = x[c * n + i];
    return f;
  }

  /// u1 + u2 (or u) in the cell adjacent to x = 0.
  double total_at_origin(const Vec& x) const { return limit() ? x[0] : x[0] + x[cells()]; }

  /// Mirror image x -> L - x of every component; the multiplier is unchanged.
  Vec reflect(const Vec& x) const {
    Vec y = x;
    const Eigen::Index n = cells();
    for (int c = 0; c < components(); ++c)
      for (Eigen::Index i = 0; i < n; ++i) y[c * n + i] = x[c * n + (n - 1 - i)];
    return y;
  }

  /// Weights of the arclength inner product: cell width on state values, one elsewhere.
  Vec weights(bool with_parameter) const {
    Vec w = Vec::Ones(size() + (with_parameter ? 1 : 0));
    w.head(state_size()).setConstant(grid_.h());
    return w;
  }

  Vec residual(const Vec& x, double parameter) const {
    Vec r = dynamics(x, parameter);
    if (!conserved()) return r;
    Vec out(size());
    out.head(state_size()) = r;
    const Eigen::Index n = cells();
    const double mu = x[state_size()];
    const int density_blocks = limit() ? 1 : 2;
    out.head(density_blocks * n).array() += mu;
    out[state_size()] = mean_mass(x) - parameter;
    return out;
  }

  /// Right-hand side of the time-dependent system (state part only).
  Vec dynamics(const Vec& x, double parameter) const {
    const ModelParams m = params_at(parameter);
    const Eigen::Index n = cells();
    const double ih2 = 1.0 / (grid_.h() * grid_.h());
    Vec r(state_size());
    if (!limit()) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double u1 = x[i], u2 = x[n + i], v = x[2 * n + i];
        const auto s = switching_at(std::max(v, 0.0), m);
        const double exch = (s.q * u1 - s.p * u2) / m.eps;
        const double crowd = 1.0 - u1 - u2;
        r[i] = m.d * lap(x, 0, i) * ih2 + m.a1 * crowd * u1 - exch;
        r[n + i] = (m.d + m.D) * lap(x, n, i) * ih2 + m.a2 * crowd * u2 + exch;
        r[2 * n + i] = m.Dv * lap(x, 2 * n, i) * ih2 + m.alpha * (u1 + u2) - m.beta * v;
      }
    } else {
      Vec w(n);
      for (Eigen::Index i = 0; i < n; ++i) w[i] = mobility_at(x[n + i], m).c * x[i];
      for (Eigen::Index i = 0; i < n; ++i) {
        const double u = x[i], v = x[n + i];
        const auto mo = mobility_at(v, m);
        r[i] = lap(w, 0, i) * ih2 + mo.g * (1.0 - u) * u;
        r[n + i] = m.Dv * lap(x, n, i) * ih2 + m.alpha * u - m.beta * v;
      }
    }
    return r;
  }

  /// Jacobian of `dynamics` (state x state).
  SpMat dynamics_jacobian(const Vec& x, double parameter) const {
    std::vector<Eigen::Triplet<double>> t;
    dynamics_triplets(x, parameter, t);
    SpMat J(state_size(), state_size());
    J.setFromTriplets(t.begin(), t.end());
    return J;
  }

  /// Jacobian of `residual` (size x size), including the multiplier border.
  SpMat jacobian(const Vec& x, double parameter) const {
    std::vector<Eigen::Triplet<double>> t;
    dynamics_triplets(x, parameter, t);
    if (conserved()) append_border(t);
    SpMat J(size(), size());
    J.setFromTriplets(t.begin(), t.end());
    return J;
  }

  /// Appends the multiplier column and mass row to a triplet list.
  void append_border(std::vector<Eigen::Triplet<double>>& t) const {
    const Eigen::Index n = cells(), ns = state_size();
    const int density_blocks = limit() ? 1 : 2;
    const double w = grid_.h() / grid_.length;
    for (Eigen::Index i = 0; i < density_blocks * n; ++i) {
      t.emplace_back(i, ns, 1.0);
      t.emplace_back(ns, i, w);
    }
  }

  void dynamics_triplets(const Vec& x, double parameter, std::vector<Eigen::Triplet<double>>& t) const {
    const ModelParams m = params_at(parameter);
    const Eigen::Index n = cells();
    const double ih2 = 1.0 / (grid_.h() * grid_.h());
    t.reserve(t.size() + static_cast<std::size_t>(15 * n));
    auto stencil = [&](Eigen::Index row_block, Eigen::Index col_block, Eigen::Index i, double coeff,
                       const Vec* weight) {
      // coeff * Lap_h applied to (weight .* x_col_block), row i
      auto wt = [&](Eigen::Index j) { return weight ? (*weight)[j] : 1.0; };
      double diag = 0.0;
      if (i > 0) {
        t.emplace_back(row_block + i, col_block + i - 1, coeff * ih2 * wt(i - 1));
        diag -= coeff * ih2;
      }
      if (i + 1 < n) {
        t.emplace_back(row_block + i, col_block + i + 1, coeff * ih2 * wt(i + 1));
        diag -= coeff * ih2;
      }
      t.emplace_back(row_block + i, col_block + i, diag * wt(i));
    };
    if (!limit()) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double u1 = x[i], u2 = x[n + i], v = std::max(x[2 * n + i], 0.0);
        // Same entries as reaction_jacobian, evaluated without its sign checks so
        // that Newton iterates may pass through slightly negative densities.
        const auto s = switching_at(v, m);
        const double ie = 1.0 / m.eps;
        const double crowd = 1.0 - u1 - u2;
        const double dexch = (s.dq * u1 - s.dp * u2) * ie;
        Eigen::Matrix3d Rx;
        Rx << m.a1 * (crowd - u1) - s.q * ie, -m.a1 * u1 + s.p * ie, -dexch,
            -m.a2 * u2 + s.q * ie, m.a2 * (crowd - u2) - s.p * ie, dexch,
            m.alpha, m.alpha, -m.beta;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            if (Rx(a, b) != 0.0) t.emplace_back(a * n + i, b * n + i, Rx(a, b));
        stencil(0, 0, i, m.d, nullptr);
        stencil(n, n, i, m.d + m.D, nullptr);
        stencil(2 * n, 2 * n, i, m.Dv, nullptr);
      }
    } else {
      Vec c(n), cu_v(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto mo = mobility_at(x[n + i], m);
        c[i] = mo.c;
        cu_v[i] = mo.dc * x[i];
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        const double u = x[i];
        const auto mo = mobility_at(x[n + i], m);
        stencil(0, 0, i, 1.0, &c);
        stencil(0, n, i, 1.0, &cu_v);
        t.emplace_back(i, i, mo.g * (1.0 - 2.0 * u));
        t.emplace_back(i, n + i, mo.dg * (1.0 - u) * u);
        t.emplace_back(n + i, i, m.alpha);
        t.emplace_back(n + i, n + i, -m.beta);
        stencil(n, n, i, m.Dv, nullptr);
      }
    }
  }

  /// d residual / d parameter.
  Vec parameter_derivative(const Vec& x, double parameter) const {
    Vec r = Vec::Zero(size());
    if (conserved()) {
      r[state_size()] = -1.0;
      return r;
    }
    const ModelParams m = params_at(parameter);
    const Eigen::Index n = cells();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!limit()) {
        const double u1 = x[i], u2 = x[n + i], crowd = 1.0 - u1 - u2;
        r[i] = crowd * u1;
        r[n + i] = ratio_ * crowd * u2;
      } else {
        const double u = x[i];
        const auto s = switching_at(std::max(x[n + i], 0.0), m);
        r[i] = (s.p + ratio_ * s.q) / checked_sum(s.p, s.q) * (1.0 - u) * u;
      }
    }
    return r;
  }

  /// Mean total density over the domain.
  double mean_mass(const Vec& x) const {
    const Eigen::Index n = cells();
    const int density_blocks = limit() ? 1 : 2;
    double total = 0.0;
    for (int b = 0; b < density_blocks; ++b) total += mirrored_sum(x.segment(b * n, n));
    return total * grid_.h() / grid_.length;
  }

  /// Mean-mass weights of an eigenvector (zero-mass modes are the non-neutral ones).
  template <class V>
  auto mass_of(const V& y) const {
    const Eigen::Index n = cells();
    const int density_blocks = limit() ? 1 : 2;
    return y.head(density_blocks * n).sum() * (grid_.h() / grid_.length);
  }

 private:
  // Pairs x[i] with x[n-1-i] so the sum is bitwise invariant under reflection.
  template <class V>
  static double mirrored_sum(const V& x) {
    const Eigen::Index n = x.size();
    double s = 0.0;
    for (Eigen::Index i = 0; i < n / 2; ++i) s += x[i] + x[n - 1 - i];
    if (n % 2) s += x[n / 2];
    return s;
  }

  struct Mobility {
    double c, dc, g, dg;
  };

  Mobility mobility_at(double v, const ModelParams& m) const {
    const auto s = switching_at(std::max(v, 0.0), m);
    const double sum = checked_sum(s.p, s.q);
    const double dsum = s.dp + s.dq;
    const double frac = s.q / sum;
    const double dfrac = (s.dq * sum - s.q * dsum) / (sum * sum);
    const double num = m.a1 * s.p + m.a2 * s.q;
    const double dnum = m.a1 * s.dp + m.a2 * s.dq;
    return {m.d + m.D * frac, m.D * dfrac, num / sum, (dnum * sum - num * dsum) / (sum * sum)};
  }

  // Neumann second difference (unscaled) of block starting at `off`, cell i.
  double lap(const Vec& x, Eigen::Index off, Eigen::Index i) const {
    const Eigen::Index n = cells();
    const double c = x[off + i];
    const double l = i > 0 ? x[off + i - 1] : c;
    const double r = i + 1 < n ? x[off + i + 1] : c;
    return (l - c) + (r - c);
  }

  SteadySystem system_;
  ModelParams params_;
  Grid grid_;
  double ratio_;
};

}  // namespace dichotomy
