#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dichotomy/grid.hpp"

using namespace dichotomy;

namespace {

Field random_field(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Field f(g);
  for (auto& x : f.values) x = U(rng);
  return f;
}

double max_abs(const Field& f) {
  double m = 0;
  for (double x : f.values) m = std::max(m, std::abs(x));
  return m;
}

Field residual(const Field& u, const Field& rhs, double a) {
  Field lap = laplacian_apply(u);
  Field r(u.grid);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = u[i] - a * lap[i] - rhs[i];
  return r;
}

}  // namespace

TEST(GridBasics, GeometryAndValidation) {
  Grid g(1, 64, 2.0);
  EXPECT_DOUBLE_EQ(g.h(), 2.0 / 64);
  EXPECT_DOUBLE_EQ(g.center(0), 0.5 * g.h());
  EXPECT_DOUBLE_EQ(g.measure(), 2.0);
  Grid g2(2, 16, 1.0);
  EXPECT_EQ(g2.cells(), 256u);
  EXPECT_DOUBLE_EQ(g2.measure(), 1.0);
  EXPECT_THROW(Grid(1, 4, 1.0), ValidationError);
  EXPECT_THROW(Grid(3, 16, 1.0), ValidationError);
  EXPECT_THROW(Grid(1, 16, 0.0), ValidationError);
  EXPECT_THROW(Field(g, std::vector<double>(3)), ValidationError);
}

TEST(Laplacian, ConstantMapsToZero) {
  for (int dim : {1, 2}) {
    Grid g(dim, 32, 1.0);
    Field c(g, 3.7);
    EXPECT_EQ(max_abs(laplacian_apply(c)), 0.0);
  }
}

TEST(Laplacian, CosineModesAreExactEigenvectors) {
  Grid g(1, 128, 1.0);
  for (int n = 1; n <= 3; ++n) {
    const Field f = cosine_mode(g, n);
    const Field lf = laplacian_apply(f);
    const double lam = laplacian_eigenvalue(g, n);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(lf[i], lam * f[i], 1e-9 * std::abs(lam));
  }
}

TEST(Laplacian, EigenvalueConvergesAtSecondOrder) {
  for (int mode = 1; mode <= 3; ++mode) {
    const double exact = -std::pow(mode * std::numbers::pi, 2);
    std::vector<double> err;
    for (std::size_t n : {64u, 128u, 256u}) {
      Grid g(1, n, 1.0);
      // measured from the operator itself, not from the closed form
      const Field f = cosine_mode(g, mode);
      const double lam = inner(laplacian_apply(f), f) / inner(f, f);
      err.push_back(std::abs(lam - exact));
    }
    EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.1) << "mode " << mode;
    EXPECT_NEAR(std::log2(err[1] / err[2]), 2.0, 0.1) << "mode " << mode;
  }
}

TEST(Laplacian, OutputSumsToZero) {
  for (int dim : {1, 2}) {
    Grid g(dim, 64, 1.0);
    const Field f = random_field(g, 5);
    const Field lf = laplacian_apply(f);
    double s = 0;
    for (double x : lf.values) s += x;
    // relative to the output scale ||f|| / h^2
    EXPECT_LE(std::abs(s), 1e-13 * max_abs(f) * g.cells() / (g.h() * g.h()));
  }
}

TEST(Laplacian, TelescopingSumIsTight) {
  Grid g(1, 256, 1.0);
  const Field f = random_field(g, 9);
  const Field lf = laplacian_apply(f);
  double s = 0;
  for (double x : lf.values) s += x * g.h() * g.h();  // undo the 1/h^2 scaling
  EXPECT_LE(std::abs(s), 1e-13 * max_abs(f) * g.n);
}

TEST(Laplacian, SelfAdjoint) {
  for (int dim : {1, 2}) {
    Grid g(dim, 48, 1.3);
    const Field f = random_field(g, 1), h = random_field(g, 2);
    const double a = inner(laplacian_apply(f), h), b = inner(f, laplacian_apply(h));
    const double scale = l2_norm(f) * l2_norm(h) / (g.h() * g.h());
    EXPECT_LE(std::abs(a - b), 1e-12 * scale);
  }
}

TEST(Laplacian, TwoDimensionalIsSumOfAxes) {
  Grid g2(2, 32, 1.0), g1(1, 32, 1.0);
  const Field fx = sample(g1, [](double x, double) { return std::exp(x) * std::sin(3 * x); });
  const Field fy = sample(g1, [](double y, double) { return 1.0 + y * y; });
  Field f(g2);
  for (std::size_t j = 0; j < 32; ++j)
    for (std::size_t i = 0; i < 32; ++i) f[i + 32 * j] = fx[i] * fy[j];
  const Field lx = laplacian_apply(fx), ly = laplacian_apply(fy), l2 = laplacian_apply(f);
  for (std::size_t j = 0; j < 32; ++j)
    for (std::size_t i = 0; i < 32; ++i)
      EXPECT_NEAR(l2[i + 32 * j], lx[i] * fy[j] + fx[i] * ly[j], 1e-9 * 1024);
}

TEST(Helmholtz, ConstantRightHandSide) {
  for (int dim : {1, 2}) {
    Grid g(dim, 32, 1.0);
    const Field u = helmholtz_solve(Field(g, 2.5), 0.3);
    for (double x : u.values) EXPECT_NEAR(x, 2.5, 1e-13);
  }
}

TEST(Helmholtz, InvertsCosineMode) {
  Grid g(1, 128, 1.0);
  const double a = 0.01;
  for (int n = 1; n <= 3; ++n) {
    const Field phi = cosine_mode(g, n);
    const Field lphi = laplacian_apply(phi);
    Field rhs(g);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = phi[i] - a * lphi[i];
    const Field u = helmholtz_solve(rhs, a);
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(u[i], phi[i], 1e-12);
    // same thing from the discrete eigenvalue
    const double factor = 1.0 + a * discrete_wavenumber_sq(g, n);
    for (std::size_t i = 0; i < rhs.size(); ++i) EXPECT_NEAR(rhs[i], factor * phi[i], 1e-10);
  }
}

TEST(Helmholtz, ResidualAndMass) {
  for (int dim : {1, 2}) {
    Grid g(dim, dim == 1 ? 256 : 64, 1.0);
    for (double a : {1e-4, 1e-2, 1.0}) {
      const Field rhs = random_field(g, 17);
      const Field u = helmholtz_solve(rhs, a);
      EXPECT_LE(max_abs(residual(u, rhs, a)), 1e-12 * max_abs(rhs)) << "dim " << dim << " a " << a;
      EXPECT_NEAR(integrate(u), integrate(rhs), 1e-13);
    }
  }
}

TEST(Helmholtz, IdentityAfterOperator) {
  for (int dim : {1, 2}) {
    Grid g(dim, 64, 2.0);
    const double a = 0.05;
    const Field u0 = random_field(g, 23);
    const Field lu = laplacian_apply(u0);
    Field rhs(g);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = u0[i] - a * lu[i];
    const Field u = helmholtz_solve(rhs, a);
    double err = 0;
    for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(u[i] - u0[i]));
    EXPECT_LE(err, 1e-12);
  }
}

TEST(Helmholtz, RejectsBadInput) {
  Grid g(1, 16, 1.0);
  Field f(g, 1.0);
  EXPECT_THROW(helmholtz_solve(f, 0.0), ValidationError);
  f[3] = std::nan("");
  EXPECT_THROW(helmholtz_solve(f, 0.1), ValidationError);
  f[3] = INFINITY;
  EXPECT_THROW(helmholtz_solve(f, 0.1), ValidationError);
}

TEST(Quadrature, Integrals) {
  Grid g(1, 100, 1.0);
  EXPECT_NEAR(integrate(Field(g, 1.0)), 1.0, 1e-15);
  EXPECT_NEAR(integrate(cosine_mode(g, 1)), 0.0, 1e-13);
  const Field f = random_field(g, 3), h = random_field(g, 4);
  Field c(g);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 2.0 * f[i] - 0.5 * h[i];
  EXPECT_NEAR(integrate(c), 2.0 * integrate(f) - 0.5 * integrate(h), 1e-14);
  Grid g2(2, 20, 2.0);
  EXPECT_NEAR(integrate(Field(g2, 1.0)), 4.0, 1e-13);
}

TEST(Reflection, MirrorsCells) {
  Grid g(1, 16, 1.0);
  const Field f = sample(g, [](double x, double) { return x; });
  const Field r = reflect(f);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(r[i], 1.0 - f[i], 1e-15);
  EXPECT_EQ(reflect(r), f);
}

TEST(Tridiagonal, SolvesKnownSystem) {
  std::vector<double> sub{0, -1, -1, -1}, diag{2, 2, 2, 2}, sup{-1, -1, -1, 0};
  std::vector<double> x{1, 0, 0, 1};  // solution is all ones
  solve_tridiagonal(sub, diag, sup, x);
  for (double v : x) EXPECT_NEAR(v, 1.0, 1e-15);
}
