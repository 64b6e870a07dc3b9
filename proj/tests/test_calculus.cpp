// SPDX-License-Identifier: Apache-2.0
/// @file test_calculus.cpp
/// @brief Test fields against finite differences and quadrature against closed-form moments.

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "galbrun/calculus.hpp"
#include "support/test_models.hpp"

namespace galbrun {
namespace {

using testing::fd4;

// Points strictly inside the support where the bump is not vanishingly small.
Vec3 point_in_support(std::mt19937_64& rng, const Support& s) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double lo = s.inner(), hi = s.outer();
  const double pad = 0.1 * (hi - lo);
  const double r = (s.is_ball() ? 0.0 : lo + pad) + u(rng) * (hi - pad - (s.is_ball() ? 0.0 : lo + pad));
  Vec3 d = testing::random_point(rng, 1.0);
  while (d.norm() < 1e-3) d = testing::random_point(rng, 1.0);
  return r * d.normalized();
}

// 4th-order FD error bound for derivatives of the bump fields at step h.
double fd_tol(double scale) { return std::max(1e-8, 1e-6 * scale); }

class FieldDerivatives : public ::testing::TestWithParam<Support> {};

TEST_P(FieldDerivatives, VectorFieldMatchesFiniteDifferences) {
  std::mt19937_64 rng(42);
  const Support s = GetParam();
  const VectorTestField u = random_vector_field(rng, s, 2);
  const double h = 1e-3 * (s.outer() - s.inner());
  for (int n = 0; n < 100; ++n) {
    const Vec3 x = point_in_support(rng, s);
    CMat3 jac;
    for (int j = 0; j < 3; ++j) jac.col(j) = fd4([&](const Vec3& y) { return u.value(y); }, x, j, h);
    const CMat3 J = u.jacobian(x);
    EXPECT_LT((jac - J).norm(), fd_tol(J.norm())) << "jacobian at " << x.transpose();
    EXPECT_LT(std::abs(u.div(x) - J.trace()), 1e-13 * (1.0 + J.norm()));
    const CVec3 curl(J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1));
    EXPECT_LT((u.curl(x) - curl).norm(), 1e-13 * (1.0 + J.norm()));
    for (int c = 0; c < 3; ++c) {
      CMat3 hc;
      for (int j = 0; j < 3; ++j) {
        hc.col(j) = fd4([&](const Vec3& y) { return CVec3(u.jacobian(y).row(c).transpose()); }, x, j, h);
      }
      const CMat3 H = u.hess(c, x);
      EXPECT_LT((hc - H).norm(), fd_tol(H.norm())) << "hess of component " << c << " at " << x.transpose();
    }
  }
}

TEST_P(FieldDerivatives, ScalarFieldMatchesFiniteDifferences) {
  std::mt19937_64 rng(43);
  const Support s = GetParam();
  const ScalarTestField f = random_scalar_field(rng, s, 3);
  const double h = 1e-3 * (s.outer() - s.inner());
  for (int n = 0; n < 100; ++n) {
    const Vec3 x = point_in_support(rng, s);
    CVec3 g;
    CMat3 H;
    for (int j = 0; j < 3; ++j) {
      g[j] = fd4([&](const Vec3& y) { return f.value(y); }, x, j, h);
      H.col(j) = fd4([&](const Vec3& y) { return f.grad(y); }, x, j, h);
    }
    const CVec3 ga = f.grad(x);
    const CMat3 Ha = f.hess(x);
    EXPECT_LT((g - ga).norm(), fd_tol(ga.norm()));
    EXPECT_LT((H - Ha).norm(), fd_tol(Ha.norm()));
    // The Laplacian is computed independently of the Hessian.
    EXPECT_LT(std::abs(Ha.trace() - f.laplacian(x)), 1e-12 * (1.0 + Ha.norm()));
  }
}

INSTANTIATE_TEST_SUITE_P(Supports, FieldDerivatives,
                         ::testing::Values(Support::ball(0.7), Support::annulus(0.4, 1.1),
                                           Support::annulus(1.0, 2.5)));

TEST(Fields, VanishOutsideSupport) {
  std::mt19937_64 rng(5);
  const Support s = Support::annulus(0.5, 1.0);
  const VectorTestField u = random_vector_field(rng, s, 2);
  const ScalarTestField f = random_scalar_field(rng, s, 2);
  for (double r : {0.0, 0.2, 0.5, 1.0, 1.3}) {
    const Vec3 x = r * Vec3(0.48, 0.6, 0.64);
    EXPECT_EQ(u.value(x).norm(), 0.0);
    EXPECT_EQ(u.jacobian(x).norm(), 0.0);
    EXPECT_EQ(u.hess(1, x).norm(), 0.0);
    EXPECT_EQ(std::abs(f.value(x)), 0.0);
    EXPECT_EQ(f.grad(x).norm(), 0.0);
    EXPECT_EQ(f.hess(x).norm(), 0.0);
  }
}

TEST(DirectionalDerivative, ConstantFlowProductRule) {
  // u = (x1 B, 0, 0) with B the ball bump, b = e1: d_b u_1 = B + x1 B'(r) x1 / r.
  const Support s = Support::ball(1.0);
  const VectorTestField u({Polynomial3({{1.0, 1, 0, 0}}), Polynomial3(), Polynomial3()}, s);
  const RadialBump bump(s);
  const auto db = directional_derivative(u, [](const Vec3&) { return Vec3::UnitX(); });
  std::mt19937_64 rng(9);
  for (int n = 0; n < 20; ++n) {
    const Vec3 x = testing::random_point(rng, 0.9);
    const double r = x.norm();
    const auto j = bump.jet(r);
    const Complex expected = j[0] + x[0] * j[1] * x[0] / r;
    EXPECT_LT(std::abs(db(x)[0] - expected), 1e-13);
    EXPECT_EQ(db(x)[1], Complex(0.0));
    const Complex fd = fd4([&](const Vec3& y) { return u.value(y)[0]; }, x, 0, 1e-3);
    EXPECT_LT(std::abs(db(x)[0] - fd), 1e-8);
  }
}

TEST(DirectionalDerivative, ZeroFlowAndFieldFreeRegion) {
  std::mt19937_64 rng(10);
  const VectorTestField u = random_vector_field(rng, Support::annulus(0.6, 1.0), 2);
  const auto zero = directional_derivative(u, [](const Vec3&) { return Vec3::Zero(); });
  EXPECT_EQ(zero(Vec3(0.5, 0.4, 0.3)).norm(), 0.0);
  // Flow confined to r < 0.5 where u vanishes identically.
  const auto inner = directional_derivative(
      u, [](const Vec3& x) { return x.norm() < 0.5 ? Vec3(x.y(), -x.x(), 0.0) : Vec3::Zero(); });
  for (double r : {0.1, 0.3, 0.45}) EXPECT_EQ(inner(r * Vec3(0.0, 0.6, 0.8)).norm(), 0.0);
}

TEST(Quadrature, GaussLegendreMatchesBoostTables) {
  std::vector<double> x, w;
  gauss_legendre(10, x, w);
  std::vector<double> xs = x;
  std::sort(xs.begin(), xs.end());
  const auto& ab = boost::math::quadrature::gauss<double, 10>::abscissa();
  const auto& wb = boost::math::quadrature::gauss<double, 10>::weights();
  for (std::size_t k = 0; k < ab.size(); ++k) {
    EXPECT_NEAR(xs[5 + k], ab[k], 1e-15);
    EXPECT_NEAR(xs[4 - k], -ab[k], 1e-15);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    sum += w[k];
    const auto it = std::find_if(ab.begin(), ab.end(),
                                 [&](double a) { return std::abs(a - std::abs(x[k])) < 1e-14; });
    ASSERT_NE(it, ab.end());
    EXPECT_NEAR(w[k], wb[static_cast<std::size_t>(it - ab.begin())], 1e-15);
  }
  EXPECT_NEAR(sum, 2.0, 1e-14);
}

TEST(Quadrature, BallAndAnnulusVolumes) {
  const QuadratureOrder o;
  auto one = [](const Vec3&) { return Complex(1.0); };
  EXPECT_NEAR(integrate(QuadratureRule::ball(1.0, o), one).real(), 4.0 * kPi / 3.0, 1e-12);
  EXPECT_NEAR(integrate(QuadratureRule::annulus(1.0, 2.0, o), one).real(), 28.0 * kPi / 3.0, 1e-12);
  EXPECT_NEAR(integrate(QuadratureRule::sphere(1.5, o), one).real(), 4.0 * kPi * 2.25, 1e-12);
}

TEST(Quadrature, SecondMoment) {
  const auto v = integrate(QuadratureRule::ball(1.0, {}), [](const Vec3& x) { return Complex(x[0] * x[0]); });
  EXPECT_NEAR(v.real(), 4.0 * kPi / 15.0, 1e-13);
}

// int_{B_R} x^{2a} y^{2b} z^{2c} = 2 G(a+1/2) G(b+1/2) G(c+1/2) / G(a+b+c+3/2) * R^{n+3} / (n+3).
double ball_moment(int a, int b, int c, double R) {
  using boost::math::tgamma;
  const int n = 2 * (a + b + c);
  return 2.0 * tgamma(a + 0.5) * tgamma(b + 0.5) * tgamma(c + 0.5) / tgamma(a + b + c + 1.5) *
         std::pow(R, n + 3) / (n + 3);
}

TEST(Quadrature, DegreeTwentyMonomialsExact) {
  const QuadratureRule rule = QuadratureRule::ball(1.3, {});
  for (auto [a, b, c] : {std::array{4, 3, 3}, std::array{10, 0, 0}, std::array{0, 2, 8},
                         std::array{1, 1, 1}}) {
    const auto v = integrate(rule, [&](const Vec3& x) {
      return Complex(std::pow(x[0], 2 * a) * std::pow(x[1], 2 * b) * std::pow(x[2], 2 * c));
    });
    const double exact = ball_moment(a, b, c, 1.3);
    EXPECT_NEAR(v.real(), exact, 1e-12 * exact) << a << " " << b << " " << c;
  }
  // Odd monomials integrate to zero.
  const auto odd = integrate(rule, [](const Vec3& x) { return Complex(x[0] * x[1] * x[1] * x[2] * x[2] * x[2]); });
  EXPECT_NEAR(std::abs(odd), 0.0, 1e-14);
}

TEST(Quadrature, StableUnderOrderDoubling) {
  std::mt19937_64 rng(77);
  const BackgroundModel m = testing::standard_model();
  for (const Support s : {Support::ball(0.5), Support::annulus(0.5, 1.0), Support::annulus(1.0, 2.0)}) {
    const VectorTestField u = random_vector_field(rng, s, 2);
    const VectorTestField v = random_vector_field(rng, s, 2);
    auto f = [&](const Vec3& x) { return m.rho()(x.norm()) * pair(u.value(x), v.value(x)) + u.div(x) * std::conj(v.div(x)); };
    const QuadratureOrder base;
    const QuadratureOrder twice{2 * base.radial, 2 * base.polar, 2 * base.azimuthal};
    const Complex a = integrate(QuadratureRule::shell(s.inner(), s.outer(), base), f);
    const Complex b = integrate(QuadratureRule::shell(s.inner(), s.outer(), twice), f);
    EXPECT_LE(std::abs(a - b), 1e-9 * std::abs(b));
  }
}

TEST(Quadrature, DeterministicSummation) {
  std::mt19937_64 rng(1);
  const ScalarTestField f = random_scalar_field(rng, Support::ball(1.0), 3);
  const QuadratureRule rule = QuadratureRule::ball(1.0, {});
  auto g = [&](const Vec3& x) { return f.value(x); };
  const Complex a = integrate(rule, g), b = integrate(rule, g);
  EXPECT_EQ(a.real(), b.real());
  EXPECT_EQ(a.imag(), b.imag());
}

TEST(Quadrature, RejectsBadShell) {
  EXPECT_THROW(QuadratureRule::shell(1.0, 0.5, {}), DomainError);
  EXPECT_THROW(QuadratureRule::sphere(0.0, {}), DomainError);
}

}  // namespace
}  // namespace galbrun
