#pragma once

// Rightmost eigenvalues of a sparse real matrix by shift-and-invert Arnoldi.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <complex>
#include <random>
#include <vector>

#include "dichotomy/errors.hpp"

namespace dichotomy {

struct EigenPair {
  std::complex<double> value;
  Eigen::VectorXcd vector;  ///< unit 2-norm
  double residual = 0.0;    ///< ||J x - lambda x|| for the unit vector
};

struct ArnoldiOptions {
  double shift = 0.5;      ///< real shift; Ritz values nearest to it converge first
  int count = 6;
  int krylov_dim = 60;
  int max_krylov_dim = 480;
  double tolerance = 1e-8;
  unsigned seed = 12345;
};

/// The `count` eigenpairs with largest real part among those closest to the
/// shift. The Krylov space is enlarged until every returned pair satisfies
/// ||J x - lambda x|| <= tolerance * ||x||.
inline std::vector<EigenPair> rightmost_eigenpairs(const Eigen::SparseMatrix<double>& J,
                                                   const ArnoldiOptions& opt = {}) {
  using Eigen::Index;
  const Index n = J.rows();
  if (n == 0 || J.cols() != n) throw EigenSolverError("eigen solve needs a nonempty square matrix");

  Eigen::SparseMatrix<double> shifted = J;
  for (Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= opt.shift;
  shifted.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) throw EigenSolverError("shift coincides with an eigenvalue; factorisation failed");

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXd start(n);
  for (Index i = 0; i < n; ++i) start[i] = 1.0 + 0.5 * uni(rng);
  start.normalize();

  const int count = std::min<int>(opt.count, static_cast<int>(n));
  double worst = 0.0;
  for (Index m = std::min<Index>(opt.krylov_dim, n);; m = std::min<Index>(2 * m, n)) {
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    V.col(0) = start;
    Index dim = m;
    for (Index j = 0; j < m; ++j) {
      Eigen::VectorXd w = lu.solve(V.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd h = V.leftCols(j + 1).transpose() * w;
        w.noalias() -= V.leftCols(j + 1) * h;
        H.col(j).head(j + 1) += h;
      }
      const double beta = w.norm();
      H(j + 1, j) = beta;
      if (beta < 1e-13 * H.col(j).head(j + 1).norm()) {
        dim = j + 1;  // invariant subspace found
        break;
      }
      V.col(j + 1) = w / beta;
    }

    Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(dim, dim));
    if (es.info() != Eigen::Success) throw EigenSolverError("Hessenberg eigenproblem failed");
    std::vector<EigenPair> pairs;
    for (Index k = 0; k < dim; ++k) {
      const std::complex<double> theta = es.eigenvalues()[k];
      if (std::abs(theta) == 0.0) continue;
      EigenPair p;
      p.value = opt.shift + 1.0 / theta;
      p.vector = V.leftCols(dim).cast<std::complex<double>>() * es.eigenvectors().col(k);
      p.vector.normalize();
      pairs.push_back(std::move(p));
    }
    std::sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) {
      if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
      return a.value.imag() > b.value.imag();
    });
    if (static_cast<int>(pairs.size()) > count) pairs.resize(static_cast<std::size_t>(count));

    worst = 0.0;
    const Eigen::SparseMatrix<std::complex<double>> Jc = J.cast<std::complex<double>>();
    for (auto& p : pairs) {
      p.residual = (Jc * p.vector - p.value * p.vector).norm();
      worst = std::max(worst, p.residual);
    }
    if (worst <= opt.tolerance && static_cast<int>(pairs.size()) == count) return pairs;
    if (m >= n || m >= opt.max_krylov_dim) break;
  }
  throw EigenSolverError("Arnoldi iteration stagnated; worst residual " + std::to_string(worst));
}

}  // namespace dichotomy
