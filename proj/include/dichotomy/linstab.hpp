#pragma once

// Linearisation of the three-component system about its constant steady states,
// one 3x3 matrix per Neumann cosine mode, and the neutral curves det = 0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dichotomy/grid.hpp"
#include "dichotomy/model.hpp"

namespace dichotomy {

/// A: mass-conserving system (parameter M). B: system with growth (parameter r).
enum class ModeSystem { A, B };

inline const char* parameter_name(ModeSystem w) { return w == ModeSystem::A ? "M" : "r"; }

struct ModeMatrix {
  int n = 0;
  Eigen::Matrix3d entries = Eigen::Matrix3d::Zero();
  ModeSystem which = ModeSystem::A;
};

/// (n pi / L)^2, or the squared wavenumber the discrete Laplacian on `grid` assigns to mode n.
inline double wavenumber_sq(int n, const ModelParams& m, const Grid* grid = nullptr) {
  if (grid) return discrete_wavenumber_sq(*grid, n);
  const double k = n * std::numbers::pi / m.L;
  return k * k;
}

namespace detail {

inline Eigen::Matrix3d mode_matrix(const ConstantState& st, double k2, double a1, double a2,
                                   const ModelParams& m) {
  const auto s = switching_at(st.v, m);
  const double ie = 1.0 / m.eps;
  const double coupling = (s.dq * st.u1 - s.dp * st.u2) * ie;
  Eigen::Matrix3d A;
  A << -m.d * k2 - a1 * st.u1 - ie * s.q, -a1 * st.u1 + ie * s.p, -coupling,
      -a2 * st.u2 + ie * s.q, -(m.d + m.D) * k2 - a2 * st.u2 - ie * s.p, coupling,
      m.alpha, m.alpha, -m.Dv * k2 - m.beta;
  return A;
}

}  // namespace detail

/// Linearisation of the conserved system (a1 = a2 = 0) at the constant state of mass M.
inline ModeMatrix assemble_An(int n, double M, const ModelParams& m, const Grid* grid = nullptr) {
  if (n < 0) throw ValidationError("mode index must be nonnegative");
  const auto st = constant_steady_conserved(M, m);
  return {n, detail::mode_matrix(st, wavenumber_sq(n, m, grid), 0.0, 0.0, m), ModeSystem::A};
}

/// Linearisation of the growth system at its constant state, growth rates from `m`.
inline ModeMatrix assemble_Bn(int n, const ModelParams& m, const Grid* grid = nullptr) {
  if (n < 0) throw ValidationError("mode index must be nonnegative");
  const auto st = constant_steady_growth(m);
  return {n, detail::mode_matrix(st, wavenumber_sq(n, m, grid), m.a1, m.a2, m), ModeSystem::B};
}

/// a1 = r, a2 = ratio * r.
inline ModelParams with_growth(ModelParams m, double r, double ratio = 1.0) {
  m.a1 = r;
  m.a2 = ratio * r;
  return m;
}

inline ModeMatrix assemble(ModeSystem which, int n, double parameter, const ModelParams& m,
                           double growth_ratio = 1.0, const Grid* grid = nullptr) {
  return which == ModeSystem::A ? assemble_An(n, parameter, m, grid)
                                : assemble_Bn(n, with_growth(m, parameter, growth_ratio), grid);
}

/// Cofactor expansion along the first row.
inline double det_expansion(const Eigen::Matrix3d& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

inline double det_lu(const Eigen::Matrix3d& a) { return Eigen::PartialPivLU<Eigen::Matrix3d>(a).determinant(); }

/// Product of row max-norms; bounds |det| and sets the scale for root tolerances.
inline double det_scale(const Eigen::Matrix3d& a) {
  return a.row(0).cwiseAbs().sum() * a.row(1).cwiseAbs().sum() * a.row(2).cwiseAbs().sum();
}

inline std::vector<std::complex<double>> eigenvalues(const ModeMatrix& mm) {
  Eigen::EigenSolver<Eigen::Matrix3d> es(mm.entries, /*computeEigenvectors=*/false);
  std::vector<std::complex<double>> ev(es.eigenvalues().data(), es.eigenvalues().data() + 3);
  std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return a.real() > b.real(); });
  return ev;
}

struct GrowthRate {
  double lambda_max = -std::numeric_limits<double>::infinity();
  int mode = -1;
  std::complex<double> eigenvalue{};
};

/// Largest real part over modes 0..n_max. For the conserved system the zero
/// eigenvalue of mode 0 reflects mass conservation and is left out.
inline GrowthRate max_growth_rate(ModeSystem which, double parameter, const ModelParams& m, int n_max = 64,
                                  double growth_ratio = 1.0, const Grid* grid = nullptr) {
  if (n_max < 1) throw ValidationError("n_max must be at least 1");
  GrowthRate best;
  for (int n = 0; n <= n_max; ++n) {
    auto ev = eigenvalues(assemble(which, n, parameter, m, growth_ratio, grid));
    if (which == ModeSystem::A && n == 0) {
      auto neutral = std::min_element(ev.begin(), ev.end(), [](auto a, auto b) { return std::abs(a) < std::abs(b); });
      ev.erase(neutral);
    }
    for (auto z : ev) {
      if (z.real() > best.lambda_max) best = {z.real(), n, z};
    }
  }
  return best;
}

/// Per-mode leading eigenvalue, the discrete dispersion relation.
inline std::vector<std::complex<double>> dispersion(ModeSystem which, double parameter, const ModelParams& m,
                                                    int n_max, double growth_ratio = 1.0) {
  std::vector<std::complex<double>> out;
  for (int n = 0; n <= n_max; ++n) {
    auto ev = eigenvalues(assemble(which, n, parameter, m, growth_ratio));
    if (which == ModeSystem::A && n == 0) {
      auto neutral = std::min_element(ev.begin(), ev.end(), [](auto a, auto b) { return std::abs(a) < std::abs(b); });
      ev.erase(neutral);
    }
    out.push_back(ev.front());
  }
  return out;
}

struct NeutralCurve {
  ModeSystem which = ModeSystem::A;
  int n = 1;
  std::vector<std::pair<double, double>> points;  ///< (parameter, D)
  double tolerance = 1e-8;                        ///< relative bisection tolerance
};

struct ScanRange {
  double min = 0.0, max = 1.0;
  std::size_t count = 100;

  double at(std::size_t i) const {
    return count == 1 ? min : min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
};

/// Roots of a continuous scalar function on a sampled interval: sign changes refined by bisection.
template <class F>
std::vector<double> bracketed_roots(F&& f, const ScanRange& range, double rel_tol) {
  std::vector<double> roots;
  double x0 = range.at(0), f0 = f(x0);
  for (std::size_t i = 1; i < range.count; ++i) {
    const double x1 = range.at(i), f1 = f(x1);
    if (f0 == 0.0) {
      roots.push_back(x0);
    } else if (f0 * f1 < 0.0) {
      double lo = x0, hi = x1, flo = f0;
      while (hi - lo > rel_tol * std::max(std::abs(lo), std::abs(hi))) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

inline double mode_det(ModeSystem which, int n, double parameter, double D, const ModelParams& m,
                       double growth_ratio = 1.0) {
  ModelParams mm = m;
  mm.D = D;
  return det_expansion(assemble(which, n, parameter, mm, growth_ratio).entries);
}

/// Gamma_n in the (parameter, D) plane: for each parameter sample, every D in
/// `d_range` where det of the mode-n matrix changes sign.
inline NeutralCurve neutral_curve(ModeSystem which, int n, const ScanRange& parameter_range,
                                  const ScanRange& d_range, const ModelParams& m, double growth_ratio = 1.0) {
  if (parameter_range.count < 100 || d_range.count < 100)
    throw ValidationError("neutral curve scans need at least 100 samples per axis");
  NeutralCurve curve{which, n, {}, 1e-8};
  for (std::size_t i = 0; i < parameter_range.count; ++i) {
    const double par = parameter_range.at(i);
    auto roots = bracketed_roots([&](double D) { return mode_det(which, n, par, D, m, growth_ratio); }, d_range,
                                 curve.tolerance);
    for (double D : roots) curve.points.emplace_back(par, D);
  }
  return curve;
}

/// Parameter values at fixed D where det of the mode-n matrix vanishes.
inline std::vector<double> neutral_parameters(ModeSystem which, int n, const ScanRange& parameter_range,
                                              const ModelParams& m, double growth_ratio = 1.0,
                                              double rel_tol = 1e-12) {
  return bracketed_roots([&](double par) { return mode_det(which, n, par, m.D, m, growth_ratio); },
                         parameter_range, rel_tol);
}

}  // namespace dichotomy
