#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "sftr/fem1d.hpp"

using namespace sftr;

namespace {

constexpr double kPi = std::numbers::pi;

oracle::Dense to_dense(const TriDiag& t) {
  const std::size_t m = t.size();
  oracle::Dense d(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    d[i][i] = t.main[i];
    if (i + 1 < m) {
      d[i][i + 1] = t.super[i];
      d[i + 1][i] = t.sub[i];
    }
  }
  return d;
}

std::vector<double> mul(const TriDiag& t, const std::vector<double>& x) {
  std::vector<double> y(x.size());
  t.apply(x, y);
  return y;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Integral of the hat centred at c with half width h over (lo, hi).
double hat_overlap(double c, double h, double lo, double hi) {
  const auto antiderivative = [&](double x) {
    const double s = std::clamp((x - c) / h, -1.0, 1.0);
    return s <= 0.0 ? h * 0.5 * (1.0 + s) * (1.0 + s) : h * (1.0 - 0.5 * (1.0 - s) * (1.0 - s));
  };
  return antiderivative(hi) - antiderivative(lo);
}

}  // namespace

TEST(Mesh1D, NodesAndCounts) {
  const Mesh1D mesh(1.0, 3.0, 8);
  EXPECT_DOUBLE_EQ(mesh.h(), 0.25);
  EXPECT_EQ(mesh.interior_count(), 7u);
  EXPECT_DOUBLE_EQ(mesh.node(0), 1.0);
  EXPECT_DOUBLE_EQ(mesh.node(8), 3.0);
  EXPECT_DOUBLE_EQ(mesh.interior_node(0), 1.25);
  EXPECT_THROW(Mesh1D(1.0, 1.0, 4), std::invalid_argument);
  EXPECT_THROW(Mesh1D(0.0, 1.0, 1), std::invalid_argument);
}

TEST(Assembly, SingleInteriorNode) {
  const Mesh1D mesh(0.0, 1.0, 2);
  const auto m = assemble_mass(mesh);
  const auto a = assemble_stiffness(mesh);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_DOUBLE_EQ(m.main[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(a.main[0], 4.0);
  EXPECT_TRUE(m.sub.empty());
}

TEST(Assembly, FourCellMass) {
  const auto m = assemble_mass(Mesh1D(0.0, 1.0, 4));
  ASSERT_EQ(m.main.size(), 3u);
  ASSERT_EQ(m.sub.size(), 2u);
  ASSERT_EQ(m.super.size(), 2u);
  for (double d : m.main) EXPECT_DOUBLE_EQ(d, 1.0 / 6.0);
  for (double o : m.sub) EXPECT_DOUBLE_EQ(o, 1.0 / 24.0);
  for (double o : m.super) EXPECT_DOUBLE_EQ(o, 1.0 / 24.0);
}

TEST(Assembly, RowSumsAndConstants) {
  const Mesh1D mesh(0.0, 2.0, 10);
  const auto m = assemble_mass(mesh);
  const auto a = assemble_stiffness(mesh);
  const std::vector<double> ones(mesh.interior_count(), 1.0);
  const auto mo = mul(m, ones);
  const auto ao = mul(a, ones);
  for (std::size_t i = 1; i + 1 < ones.size(); ++i) {
    EXPECT_NEAR(mo[i], mesh.h(), 1e-15);
    EXPECT_NEAR(ao[i], 0.0, 1e-12);
  }
}

TEST(Assembly, SymmetricAndGershgorinBounds) {
  const Mesh1D mesh(0.0, kPi, 37);
  const auto m = assemble_mass(mesh);
  const auto a = assemble_stiffness(mesh);
  EXPECT_EQ(m.sub, m.super);
  EXPECT_EQ(a.sub, a.super);
  const double h = mesh.h();
  for (std::size_t i = 0; i < m.size(); ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(m.sub[i - 1]);
    if (i + 1 < m.size()) radius += std::abs(m.super[i]);
    EXPECT_GE(m.main[i] - radius, h / 3.0 - 1e-15);
    EXPECT_LE(m.main[i] + radius, h + 1e-15);
  }
}

TEST(Assembly, LowModesApproximateLaplacianEigenvalues) {
  for (int n : {20, 40, 80}) {
    const Mesh1D mesh(0.0, kPi, n);
    const auto m = assemble_mass(mesh);
    const auto a = assemble_stiffness(mesh);
    for (int k = 1; k <= 3; ++k) {
      const auto s = interpolate(mesh, [k](double x) { return std::sin(k * x); });
      const auto as = mul(a, s);
      const auto ms = mul(m, s);
      const double lambda = dot(s, as) / dot(s, ms);
      // Sine vectors are exact discrete eigenvectors.
      for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(as[i], lambda * ms[i], 1e-9);
      const double h = mesh.h();
      EXPECT_NEAR(lambda, k * k, 0.1 * std::pow(k, 4) * h * h) << "k=" << k << " n=" << n;
      EXPECT_GT(lambda, k * k);
    }
  }
}

TEST(ThomasSolve, IdentityReturnsRhs) {
  const TriDiag id{{0.0, 0.0}, {1.0, 1.0, 1.0}, {0.0, 0.0}};
  const std::vector<double> rhs{3.0, -1.0, 2.5};
  EXPECT_EQ(thomas_solve(id, rhs), rhs);
}

TEST(ThomasSolve, RandomSpdAgainstDenseElimination) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 50;
    const auto off = oracle::random_vector(rng, m - 1);
    auto diag = oracle::random_vector(rng, m, 2.5, 4.0);
    const TriDiag t{off, diag, off};
    const auto rhs = oracle::random_vector(rng, m);
    const auto x = thomas_solve(t, rhs);
    const auto ref = oracle::dense_solve(to_dense(t), rhs);
    EXPECT_LT(oracle::max_abs_diff(x, ref), 1e-13);
    const auto back = mul(t, x);
    EXPECT_LE(oracle::max_abs_diff(back, rhs), 1e-12 * 1.0);
  }
}

TEST(ThomasSolve, StiffnessRoundTrip) {
  const Mesh1D mesh(0.0, 1.0, 200);
  const auto a = assemble_stiffness(mesh);
  std::mt19937_64 rng(7);
  const auto x0 = oracle::random_vector(rng, mesh.interior_count());
  const auto x = thomas_solve(a, mul(a, x0));
  EXPECT_LT(oracle::max_abs_diff(x, x0), 1e-10);
}

TEST(ThomasSolve, ErrorsOnZeroPivotAndSize) {
  const TriDiag singular{{1.0}, {0.0, 1.0}, {1.0}};
  EXPECT_THROW(thomas_solve(singular, std::vector<double>{1.0, 1.0}), std::runtime_error);
  const TriDiag t{{0.0}, {1.0, 1.0}, {0.0}};
  EXPECT_THROW(thomas_solve(t, std::vector<double>{1.0}), std::invalid_argument);
  const TriDiag ragged{{0.0, 0.0}, {1.0, 1.0}, {0.0}};
  EXPECT_THROW(TriDiagFactor{ragged}, std::invalid_argument);
}

TEST(TriDiag, CombineAndApplyAdd) {
  const Mesh1D mesh(0.0, 1.0, 6);
  const auto m = assemble_mass(mesh);
  const auto a = assemble_stiffness(mesh);
  const auto c = combine(2.0, m, -0.5, a);
  std::mt19937_64 rng(3);
  const auto x = oracle::random_vector(rng, m.size());
  auto y = mul(m, x);
  for (double& v : y) v *= 2.0;
  a.apply_add(-0.5, x, y);
  EXPECT_LT(oracle::max_abs_diff(mul(c, x), y), 1e-13);
  EXPECT_THROW(combine(1.0, m, 1.0, assemble_mass(Mesh1D(0.0, 1.0, 5))), std::invalid_argument);
}

TEST(L2Project, ZeroDatum) {
  const Mesh1D mesh(0.0, 1.0, 10);
  for (double c : l2_project(mesh, SmoothFunction{[](double) { return 0.0; }}).coeffs) EXPECT_EQ(c, 0.0);
}

TEST(L2Project, SineNodalErrorIsSecondOrder) {
  std::vector<double> errs;
  for (int n : {16, 32, 64, 128}) {
    const Mesh1D mesh(0.0, kPi, n);
    const auto p = l2_project(mesh, SmoothFunction{[](double x) { return std::sin(x); }});
    errs.push_back(oracle::max_abs_diff(p.coeffs, interpolate(mesh, [](double x) { return std::sin(x); })));
  }
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) EXPECT_NEAR(std::log2(errs[i] / errs[i + 1]), 2.0, 0.1);
}

TEST(L2Project, IndicatorLoadMatchesOverlapIntegrals) {
  for (int n : {4, 7, 10, 33}) {
    const Mesh1D mesh(0.0, 1.0, n);
    const auto b = load_vector(mesh, IntervalIndicator{0.0, 0.5});
    for (std::size_t i = 0; i < b.size(); ++i)
      EXPECT_NEAR(b[i], hat_overlap(mesh.interior_node(i), mesh.h(), 0.0, 0.5), 1e-15) << n << ' ' << i;
    const auto c = load_vector(mesh, IntervalIndicator{0.21, 0.64, 2.0});
    for (std::size_t i = 0; i < c.size(); ++i)
      EXPECT_NEAR(c[i], 2.0 * hat_overlap(mesh.interior_node(i), mesh.h(), 0.21, 0.64), 1e-15);
  }
}

TEST(L2Project, IdempotentOnFiniteElementFunctions) {
  const Mesh1D mesh(0.0, 2.0, 25);
  std::mt19937_64 rng(11);
  const FemFunction f{mesh, oracle::random_vector(rng, mesh.interior_count())};
  const auto p = l2_project(mesh, SmoothFunction{[&f](double x) { return f(x); }});
  EXPECT_LT(oracle::max_abs_diff(p.coeffs, f.coeffs), 1e-12);
}

TEST(L2Project, NonFiniteDatumIsAnError) {
  const Mesh1D mesh(0.0, 1.0, 4);
  EXPECT_THROW(l2_project(mesh, SmoothFunction{[](double) { return std::nan(""); }}), std::domain_error);
  EXPECT_THROW(l2_project(mesh, SmoothFunction{}), std::invalid_argument);
}

TEST(RitzProject, SineNodalValues) {
  for (int n : {16, 64}) {
    const Mesh1D mesh(0.0, kPi, n);
    const auto r = ritz_project(mesh, RitzDatum{[](double x) { return -std::sin(x); }});
    const auto nodal = interpolate(mesh, [](double x) { return std::sin(x); });
    EXPECT_LT(oracle::max_abs_diff(r.coeffs, nodal), mesh.h() * mesh.h());
  }
}

TEST(RitzProject, GalerkinOrthogonality) {
  // (v', phi_i') = (2 v(x_i) - v(x_{i-1}) - v(x_{i+1})) / h exactly.
  const Mesh1D mesh(0.0, 1.0, 40);
  const auto v = [](double x) { return x * (1.0 - x) * std::exp(x); };
  const auto lap = [](double x) { return std::exp(x) * (-x * x - 3.0 * x); };
  const auto r = ritz_project(mesh, RitzDatum{lap});
  const auto ar = mul(assemble_stiffness(mesh), r.coeffs);
  const double h = mesh.h();
  for (std::size_t i = 0; i < ar.size(); ++i) {
    const double xi = mesh.interior_node(i);
    const double exact = (2.0 * v(xi) - v(xi - h) - v(xi + h)) / h;
    EXPECT_NEAR(ar[i], exact, 1e-9);
  }
}

TEST(RitzProject, ZeroDatumAndDefiningEquation) {
  const Mesh1D mesh(0.0, 1.0, 12);
  for (double c : ritz_project(mesh, RitzDatum{[](double) { return 0.0; }}).coeffs) EXPECT_EQ(c, 0.0);
  const auto lap = [](double x) { return std::cos(3.0 * x); };
  const auto r = ritz_project(mesh, RitzDatum{lap});
  auto load = load_vector(mesh, SmoothFunction{lap});
  for (double& b : load) b = -b;
  EXPECT_LT(oracle::max_abs_diff(mul(assemble_stiffness(mesh), r.coeffs), load), 1e-13);
  EXPECT_THROW(ritz_project(mesh, RitzDatum{}), std::invalid_argument);
}

TEST(DiscreteNorm, ZeroScalingAndSineLimit) {
  const Mesh1D mesh(0.0, kPi, 400);
  const std::vector<double> zero(mesh.interior_count(), 0.0);
  EXPECT_EQ(discrete_l2_norm(mesh, zero), 0.0);
  const auto s = interpolate(mesh, [](double x) { return std::sin(x); });
  auto s2 = s;
  for (double& x : s2) x *= 2.0;
  EXPECT_NEAR(discrete_l2_norm(mesh, s2), 2.0 * discrete_l2_norm(mesh, s), 1e-14);
  EXPECT_NEAR(discrete_l2_norm(mesh, s), std::sqrt(kPi / 2.0), 1e-4);
  EXPECT_THROW(discrete_l2_norm(mesh, std::vector<double>(3, 1.0)), std::invalid_argument);
}

TEST(FemFunction, EvaluatesPiecewiseLinear) {
  const Mesh1D mesh(0.0, 1.0, 4);
  const FemFunction f{mesh, {1.0, 3.0, -1.0}};
  EXPECT_DOUBLE_EQ(f(0.0), 0.0);
  EXPECT_DOUBLE_EQ(f(0.25), 1.0);
  EXPECT_DOUBLE_EQ(f(0.375), 2.0);
  EXPECT_DOUBLE_EQ(f(0.875), -0.5);
  EXPECT_DOUBLE_EQ(f(1.0), 0.0);
}
