#pragma once

// Cell-centered Neumann grids in one and two dimensions, the matching
// five-point Laplacian, implicit (I - a*Lap) solves and midpoint quadrature.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "dichotomy/errors.hpp"

namespace dichotomy {

struct Grid {
  int dim = 1;
  std::size_t n = 256;  ///< cells per axis
  double length = 1.0;  ///< side length per axis

  Grid() = default;
  Grid(int dim_, std::size_t n_, double length_) : dim(dim_), n(n_), length(length_) {
    validate();
  }

  void validate() const {
    if (dim != 1 && dim != 2) throw ValidationError("grid dimension must be 1 or 2");
    if (n < 8) throw ValidationError("grid needs at least 8 cells per axis");
    if (!(length > 0.0) || !std::isfinite(length)) throw ValidationError("grid length must be positive");
  }

  double h() const { return length / static_cast<double>(n); }
  std::size_t cells() const { return dim == 1 ? n : n * n; }
  double cell_volume() const { return dim == 1 ? h() : h() * h(); }
  double measure() const { return dim == 1 ? length : length * length; }
  double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * h(); }

  bool operator==(const Grid&) const = default;
};

/// Values on the cells of a grid; 2D storage is x-fastest (index i + n*j).
struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0) : grid(g), values(g.cells(), fill) {}
  Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.cells()) throw ValidationError("field length does not match grid");
  }

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
  }
  double min() const { return *std::min_element(values.begin(), values.end()); }
  double max() const { return *std::max_element(values.begin(), values.end()); }
  double spread() const { return max() - min(); }

  bool operator==(const Field&) const = default;
};

/// Samples f(x) (1D) or f(x, y) (2D) at cell centers.
template <class F>
Field sample(const Grid& g, F&& f) {
  Field out(g);
  if (g.dim == 1) {
    for (std::size_t i = 0; i < g.n; ++i) out[i] = f(g.center(i), 0.0);
  } else {
    for (std::size_t j = 0; j < g.n; ++j)
      for (std::size_t i = 0; i < g.n; ++i) out[i + g.n * j] = f(g.center(i), g.center(j));
  }
  return out;
}

/// cos(n*pi*x/L) at cell centers; the discrete Neumann eigenvectors.
inline Field cosine_mode(const Grid& g, int mode) {
  const double k = mode * std::numbers::pi / g.length;
  return sample(g, [k](double x, double) { return std::cos(k * x); });
}

/// Eigenvalue of the discrete 1D Laplacian for cosine mode n: -(2/h sin(n pi h / 2L))^2.
inline double laplacian_eigenvalue(const Grid& g, int mode) {
  const double s = 2.0 / g.h() * std::sin(mode * std::numbers::pi * g.h() / (2.0 * g.length));
  return -s * s;
}

/// Squared discrete wavenumber of mode n, the grid counterpart of (n pi / L)^2.
inline double discrete_wavenumber_sq(const Grid& g, int mode) { return -laplacian_eigenvalue(g, mode); }

namespace detail {

/// 1D Neumann second difference along a strided line; ghost cells mirror the boundary cell.
inline void second_difference(const double* in, double* out, std::size_t n, std::size_t stride,
                              double inv_h2, bool accumulate) {
  for (std::size_t i = 0; i < n; ++i) {
    const double c = in[i * stride];
    const double l = i == 0 ? c : in[(i - 1) * stride];
    const double r = i + 1 == n ? c : in[(i + 1) * stride];
    const double val = ((l - c) + (r - c)) * inv_h2;
    if (accumulate)
      out[i * stride] += val;
    else
      out[i * stride] = val;
  }
}

}  // namespace detail

inline Field laplacian_apply(const Field& f) {
  const Grid& g = f.grid;
  Field out(g);
  const double inv_h2 = 1.0 / (g.h() * g.h());
  if (g.dim == 1) {
    detail::second_difference(f.values.data(), out.values.data(), g.n, 1, inv_h2, false);
  } else {
    for (std::size_t j = 0; j < g.n; ++j)
      detail::second_difference(f.values.data() + g.n * j, out.values.data() + g.n * j, g.n, 1, inv_h2,
                                false);
    for (std::size_t i = 0; i < g.n; ++i)
      detail::second_difference(f.values.data() + i, out.values.data() + i, g.n, g.n, inv_h2, true);
  }
  return out;
}

/// Midpoint quadrature: sum of values times cell volume.
inline double integrate(const Field& f) {
  double s = 0.0;
  for (double x : f.values) s += x;
  return s * f.grid.cell_volume();
}

inline double inner(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.grid.cell_volume();
}

inline double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

inline double l2_distance(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s * a.grid.cell_volume());
}

/// Mirror image x -> L - x (along every axis in 2D).
inline Field reflect(const Field& f) {
  Field out(f.grid);
  const std::size_t n = f.grid.n;
  if (f.grid.dim == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f[n - 1 - i];
  } else {
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) out[i + n * j] = f[(n - 1 - i) + n * (n - 1 - j)];
  }
  return out;
}

/// Thomas algorithm for a general tridiagonal system; sub[0] and sup[n-1] are ignored.
/// Requires a nonsingular system that needs no pivoting (diagonally dominant in our uses).
inline void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                              std::span<const double> sup, std::span<double> x) {
  const std::size_t n = diag.size();
  std::vector<double> c(n);
  double denom = diag[0];
  c[0] = sup[0] / denom;
  x[0] = x[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - sub[i] * c[i - 1];
    c[i] = i + 1 < n ? sup[i] / denom : 0.0;
    x[i] = (x[i] - sub[i] * x[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
}

/// Direct solver for (I - a*Lap_h) u = rhs. In 2D the x direction is diagonalised by
/// the orthonormal cosine transform, leaving one tridiagonal solve in y per x-mode.
class HelmholtzSolver {
 public:
  explicit HelmholtzSolver(const Grid& g) : grid_(g) {
    if (g.dim == 2) {
      const std::size_t n = g.n;
      basis_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t k = 0; k < n; ++k) {
        const double s = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        for (std::size_t i = 0; i < n; ++i)
          basis_(k, i) = s * std::cos(std::numbers::pi * k * (i + 0.5) / n);
      }
      eig_.resize(n);
      for (std::size_t k = 0; k < n; ++k) eig_[k] = -laplacian_eigenvalue(g, static_cast<int>(k));
    }
  }

  const Grid& grid() const { return grid_; }

  Field solve(const Field& rhs, double a) const {
    if (!(a > 0.0)) throw ValidationError("helmholtz coefficient must be positive");
    if (!rhs.all_finite()) throw ValidationError("helmholtz right-hand side is not finite");
    Field u = rhs;
    const std::size_t n = grid_.n;
    const double off = -a / (grid_.h() * grid_.h());
    if (grid_.dim == 1) {
      line_solve(u.values, 0.0, off);
      return u;
    }
    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::Map<const Mat> r(rhs.values.data(), N, N);
    Mat hat = basis_ * r;  // rows: x-modes, cols: y cells
    std::vector<double> line(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) line[j] = hat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
      line_solve(line, a * eig_[k], off);
      for (std::size_t j = 0; j < n; ++j) hat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = line[j];
    }
    Eigen::Map<Mat> out(u.values.data(), N, N);
    out.noalias() = basis_.transpose() * hat;
    return u;
  }

 private:
  // (1 + shift) u - a*Lap_1d u = line, in place.
  void line_solve(std::vector<double>& line, double shift, double off) const {
    const std::size_t n = line.size();
    std::vector<double> sub(n, off), sup(n, off), diag(n, 1.0 + shift - 2.0 * off);
    diag.front() = 1.0 + shift - off;
    diag.back() = 1.0 + shift - off;
    solve_tridiagonal(sub, diag, sup, line);
  }

  Grid grid_;
  Eigen::MatrixXd basis_;
  std::vector<double> eig_;
};

inline Field helmholtz_solve(const Field& rhs, double a) { return HelmholtzSolver(rhs.grid).solve(rhs, a); }

}  // namespace dichotomy
