// SPDX-License-Identifier: Apache-2.0
/// @file test_diagnostics.cpp
/// @brief Numerical-range angles, theta, beta, mu profiles and the sector check against closed forms.

#include <cmath>
#include <random>

#include <Eigen/QR>
#include <gtest/gtest.h>

#include "galbrun/diagnostics.hpp"
#include "support/test_models.hpp"

namespace galbrun {
namespace {

constexpr double kHalfPi = 0.5 * kPi;

/// rho = cs = p = 1 and phi = a r^2 / 2, so q = 0 and m1 = a I everywhere.
BackgroundModel scalar_m1_model(double a, double gamma, double omega) {
  BackgroundModel::Profiles p{RadialProfile::constant(1.0), RadialProfile::constant(1.0),
                              RadialProfile::constant(1.0), RadialProfile::polynomial({0.0, 0.0, 0.5 * a}),
                              RadialProfile::constant(gamma)};
  return BackgroundModel(p, FlowSpec{}, Radii{0.5, 1.0, 1.5}, omega, Vec3::Zero(), 1.0);
}

SamplingSpec coarse_sampling() {
  SamplingSpec s;
  s.n_radial = 200;
  s.n_directions = 4;
  return s;
}

CMat3 diag(Complex a, Complex b, Complex c) {
  CMat3 m = CMat3::Zero();
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return m;
}

// Numerical range ----------------------------------------------------------------

TEST(NumericalRange, ScalarImaginaryIdentity) {
  const NumericalRangeSampler s;
  const ArgExtrema e = s.args(kI * CMat3::Identity());
  EXPECT_TRUE(e.exact);
  EXPECT_NEAR(e.sup_arg, kHalfPi, 1e-15);
  EXPECT_NEAR(e.inf_arg, kHalfPi, 1e-15);
}

TEST(NumericalRange, DiagonalHullOfEigenvalues) {
  const NumericalRangeSampler s;
  const ArgExtrema e = s.args(diag(Complex(-1, 1), 1.0, Complex(0, 2)));
  EXPECT_NEAR(e.sup_arg, 0.75 * kPi, 1e-15);
  EXPECT_NEAR(e.inf_arg, 0.0, 1e-15);
  EXPECT_FALSE(e.meets_negative_axis);
}

TEST(NumericalRange, UnitarilyRotatedDiagonalMatchesDiagonal) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n01;
  CMat3 g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = Complex(n01(rng), n01(rng));
  const CMat3 Q = Eigen::HouseholderQR<CMat3>(g).householderQ();
  const CMat3 d = diag(Complex(-2, 0.5), Complex(0.3, 0.2), Complex(1, 1));
  const NumericalRangeSampler s;
  const ArgExtrema a = s.args(d);
  const ArgExtrema b = s.args(Q * d * Q.adjoint());
  EXPECT_TRUE(b.exact);
  EXPECT_NEAR(a.sup_arg, b.sup_arg, 1e-12);
  EXPECT_NEAR(a.inf_arg, b.inf_arg, 1e-12);
  EXPECT_NEAR(a.sup_arg, std::arg(Complex(-2, 0.5)), 1e-12);
  EXPECT_NEAR(a.inf_arg, std::arg(Complex(0.3, 0.2)), 1e-12);
}

TEST(NumericalRange, CrossingNegativeAxisGivesPi) {
  const NumericalRangeSampler s;
  const ArgExtrema e = s.args(diag(Complex(-1, 1), Complex(-1, -1), 1.0));
  EXPECT_TRUE(e.meets_negative_axis);
  EXPECT_EQ(e.sup_arg, kPi);
  EXPECT_EQ(e.inf_arg, -kPi);
}

// The range of [[l1, b], [0, l2]] is the ellipse with foci l1, l2 and minor axis |b|.
TEST(NumericalRange, NonNormalMatchesEllipse) {
  const Complex l1(1.0, 1.5), l2(-0.5, 2.0);
  const double b = 1.0;
  CMat3 m = CMat3::Zero();
  m(0, 0) = l1;
  m(0, 1) = b;
  m(1, 1) = l2;
  m(2, 2) = 0.5 * (l1 + l2);  // the centre, inside the ellipse
  ASSERT_FALSE(is_normal(m));
  const Complex c = 0.5 * (l1 + l2);
  const Complex e = (l2 - l1) / std::abs(l2 - l1);
  const double semi_major = 0.5 * std::sqrt(std::norm(l2 - l1) + b * b);
  const double semi_minor = 0.5 * b;
  double sup = -kPi, inf = kPi;
  for (int k = 0; k < 1000000; ++k) {
    const double t = 2.0 * kPi * k / 1000000;
    const Complex z = c + e * Complex(semi_major * std::cos(t), semi_minor * std::sin(t));
    sup = std::max(sup, std::arg(z));
    inf = std::min(inf, std::arg(z));
  }
  const NumericalRangeSampler s;
  const ArgExtrema got = s.args(m);
  EXPECT_FALSE(got.exact);
  // Sampled hull lies inside the range, so it can only under-estimate the extremes.
  EXPECT_LE(got.sup_arg, sup + 1e-9);
  EXPECT_GE(got.inf_arg, inf - 1e-9);
  EXPECT_NEAR(got.sup_arg, sup, 5e-3);
  EXPECT_NEAR(got.inf_arg, inf, 5e-3);
  // Every sample point lies in the closed ellipse.
  for (const Complex z : s.sample_points(m)) {
    const Complex w = (z - c) / e;
    const double rho = std::pow(w.real() / semi_major, 2) + std::pow(w.imag() / semi_minor, 2);
    EXPECT_LE(rho, 1.0 + 1e-9);
  }
}

TEST(NumericalRange, ConvexHullDropsInteriorAndCollinearPoints) {
  const std::vector<Complex> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.5, 0}, {0.2, 0.7}};
  EXPECT_EQ(convex_hull(pts).size(), 4u);
  EXPECT_THROW(numerical_range_arg_extrema([](const Vec3&) { return CMat3::Identity().eval(); }, {}),
               ConfigError);
}

// theta ----------------------------------------------------------------------------

TEST(Theta, ScalarCaseIsQuarterPi) {
  for (double w : {1.0, -0.7}) {
    const double gamma = 0.3;
    const ThetaReport t = compute_theta(scalar_m1_model(-w * gamma, gamma, w), coarse_sampling());
    if (w > 0.0) {
      EXPECT_NEAR(t.theta, 0.25 * kPi, 1e-10);
    } else {
      // i w gamma + m1 = |w| gamma (1 - i): arg -pi/4, so sup |arg| stays below pi/2.
      EXPECT_NEAR(t.theta, 0.0, 1e-15);
    }
    EXPECT_TRUE(t.notes.empty());
  }
}

TEST(Theta, ZeroForPositiveSemidefiniteM1) {
  for (double a : {0.0, 0.4, 2.0}) {
    const ThetaReport t = compute_theta(scalar_m1_model(a, 0.1, 1.0), coarse_sampling());
    EXPECT_EQ(t.theta, 0.0) << a;
  }
  // Pointwise PSD field with non-commuting eigenvectors.
  std::mt19937_64 rng(8);
  const auto field = [&](const Vec3& x) -> CMat3 {
    Mat3 b;
    b << x[0], x[1], 1.0, x[2], 0.2, x[0] * x[1], 1.0, 0.3, x[2];
    return (b * b.transpose()).cast<Complex>() + kI * 0.05 * CMat3::Identity();
  };
  std::vector<Vec3> pts;
  for (int k = 0; k < 200; ++k) pts.push_back(testing::random_point(rng, 1.0));
  EXPECT_EQ(numerical_range_arg_extrema(field, pts).theta, 0.0);
}

TEST(Theta, StandardModelClosedFormAndMonotoneInGamma) {
  // i w gamma + m1 has eigenvalues i gamma - 2.25 and i gamma: theta = atan(2.25 / gamma).
  double prev = kHalfPi;
  for (double gamma : {0.05, 0.1, 0.5, 2.0}) {
    const ThetaReport t = compute_theta(testing::standard_model(gamma), coarse_sampling());
    EXPECT_NEAR(t.theta, std::atan(2.25 / gamma), 1e-12) << gamma;
    EXPECT_LT(t.theta, prev);
    prev = t.theta;
    ASSERT_EQ(t.notes.size(), 1u);
    EXPECT_EQ(t.notes.front().rfind("origin skipped", 0), 0u);
  }
}

TEST(Theta, RequiresNonzeroOmega) {
  EXPECT_THROW(compute_theta(testing::standard_model(0.1, 0.0), coarse_sampling()), DomainError);
}

// Subsonic ------------------------------------------------------------------------

TEST(Subsonic, BoundAtQuarterPi) {
  EXPECT_FALSE(subsonic_from_mach(0.6, 0.25 * kPi).pass);
  EXPECT_NEAR(subsonic_from_mach(0.6, 0.25 * kPi).bound, 0.5, 1e-15);
  EXPECT_TRUE(subsonic_from_mach(0.4, 0.25 * kPi).pass);
  EXPECT_TRUE(subsonic_from_mach(0.99, 0.0).pass);
  EXPECT_THROW(subsonic_from_mach(0.1, kHalfPi), DomainError);
  EXPECT_THROW(subsonic_from_mach(0.1, -0.1), DomainError);
}

TEST(Subsonic, SampledMachNumberOfToroidalFlow) {
  const BackgroundModel still = testing::smooth_model();
  EXPECT_EQ(check_subsonic(still, 0.3, coarse_sampling()).sup_mach_sq, 0.0);
  const BackgroundModel m = still.with_flow(testing::toroidal_flow(0.2, 0.5));
  const SubsonicReport rep = check_subsonic(m, 0.3, coarse_sampling());
  // Brute-force lower bound: the report's sup dominates any sample we draw.
  std::mt19937_64 rng(4);
  double brute = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const Vec3 x = testing::random_point(rng, 0.5);
    const double cs = m.cs()(x.norm());
    brute = std::max(brute, m.flow(x).b.squaredNorm() / (cs * cs));
  }
  EXPECT_GT(rep.sup_mach_sq, 0.0);
  EXPECT_GE(rep.sup_mach_sq, 0.98 * brute);
  EXPECT_LE(rep.sup_mach_sq, 1.02 * brute);
  EXPECT_EQ(rep.pass, rep.sup_mach_sq < rep.bound);
}

// beta ------------------------------------------------------------------------------

TEST(Beta, ScalarSelectionIsSelfConsistent) {
  const BetaReport r = select_beta_scalar(0.1, 2.0);
  EXPECT_TRUE(r.admissible);
  EXPECT_GT(r.beta, 0.0);
  EXPECT_LT(r.beta, kHalfPi);
  EXPECT_DOUBLE_EQ(r.margin, cowling_beta_margin(r.beta, 0.1, 2.0));
  // The margin a cos b - n sin b is decreasing on (0, pi/2): the grid optimum is the first node.
  EXPECT_DOUBLE_EQ(r.beta, kHalfPi * 0.5 / r.n_angles);
}

TEST(Beta, ZeroDampingHasNoAdmissibleAngle) {
  const BetaReport r = select_beta(testing::standard_model(0.0), BetaVariant::kCowling, coarse_sampling());
  EXPECT_FALSE(r.admissible);
  EXPECT_LT(r.margin, 0.0);
  EXPECT_EQ(r.gamma_min, 0.0);
  EXPECT_EQ(r.to_json()["status"], "no admissible beta");
}

TEST(Beta, CoupledMarginMatchesClosedFormHull) {
  // Exterior of the standard model: m2 + i w gamma has eigenvalues -1.25 + 0.1 i and 1 + 0.1 i.
  const BetaReport r = select_beta(testing::standard_model(), BetaVariant::kCoupled, coarse_sampling());
  ASSERT_TRUE(r.admissible);
  EXPECT_GT(r.beta, -kHalfPi);
  EXPECT_LT(r.beta, 0.0);
  const std::vector<Complex> nu{1.0 / Complex(-1.25, 0.1), 1.0 / Complex(1.0, 0.1)};
  double best = -1.0;
  for (int k = 0; k < 1000000; ++k) {
    const double b = -kHalfPi * (k + 0.5) / 1000000;
    double m = 1e300;
    for (const Complex z : nu) m = std::min(m, (kI * std::polar(1.0, -b) * z).real());
    best = std::max(best, m);
  }
  EXPECT_GT(best, 0.0);
  EXPECT_NEAR(r.margin, best, 2e-4);
  EXPECT_LE(r.margin, best + 1e-12);
}

TEST(Beta, RequiresNonzeroOmega) {
  EXPECT_THROW(select_beta(testing::standard_model(0.1, 0.0), BetaVariant::kFull, coarse_sampling()),
               DomainError);
}

// mu profiles -----------------------------------------------------------------------

TEST(SmoothStep, EndpointsSymmetryAndMonotonicity) {
  EXPECT_EQ(smooth_step(-0.3), 0.0);
  EXPECT_EQ(smooth_step(0.0), 0.0);
  EXPECT_EQ(smooth_step(1.0), 1.0);
  EXPECT_EQ(smooth_step(1.7), 1.0);
  EXPECT_DOUBLE_EQ(smooth_step(0.5), 0.5);
  double prev = 0.0;
  for (int k = 0; k <= 10000; ++k) {
    const double t = k / 10000.0;
    const double s = smooth_step(t);
    EXPECT_GE(s, prev);
    EXPECT_NEAR(s + smooth_step(1.0 - t), 1.0, 1e-15);
    prev = s;
  }
}

TEST(MuProfile, PropertiesHoldOnDenseScans) {
  const MuProfile cow = MuProfile::build({0.5, 1.0, 0.0, 0.0, 0.8}, MuVariant::kCowling);
  const MuProfile cp = MuProfile::build({0.5, 1.0, 1.5, 1.2, 0.8}, MuVariant::kCoupled);
  for (const MuProfile* m : {&cow, &cp}) {
    const MuPropertyReport r = m->check_properties(10000);
    EXPECT_EQ(r.violations, 0);
    EXPECT_GE(r.n_samples, 10000);
  }
  EXPECT_EQ(cow(0.5), 0.0);
  EXPECT_EQ(cow(1.0), 0.8);
  EXPECT_EQ(cp(1.0), 1.2);
  EXPECT_EQ(cp(1.5), 0.8);
  EXPECT_EQ(cp(4.0), 0.8);
}

TEST(MuProfile, SigmaIsUnimodularAndFollowsSignOfOmega) {
  const MuProfile cp = MuProfile::build({0.5, 1.0, 1.5, 1.2, 0.8}, MuVariant::kCoupled);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const Vec3 x = testing::random_point(rng, 2.0);
    EXPECT_NEAR(std::abs(cp.sigma(x, 1.3)), 1.0, 1e-15);
    EXPECT_EQ(cp.sigma(x, -1.3), std::conj(cp.sigma(x, 1.3)));
  }
  EXPECT_EQ(cp.sigma_star(2.0), std::polar(1.0, 0.8));
}

TEST(MuProfile, RejectsInconsistentTargets) {
  EXPECT_THROW(MuProfile::build({0.5, 1.0, 1.5, 0.6, 0.8}, MuVariant::kCoupled), ConfigError);
  EXPECT_THROW(MuProfile::build({1.0, 0.5, 0.0, 0.0, 0.8}, MuVariant::kCowling), ConfigError);
  EXPECT_THROW(MuProfile::build({0.5, 1.0, 0.0, 0.0, kPi}, MuVariant::kCowling), ConfigError);
  EXPECT_THROW(MuProfile::build({0.5, 1.0, 1.0, 1.2, 0.8}, MuVariant::kCoupled), ConfigError);
}

// Sector check --------------------------------------------------------------------------

TEST(Sector, ScalarModelWorstMarginClosedForm) {
  // m2 + i w gamma = (1 - 0.3) + 0.3 i everywhere; the rotation is largest where mu = mu_star.
  const BackgroundModel m = scalar_m1_model(-0.3, 0.3, 1.0);
  const MuProfile mu = MuProfile::build({0.5, 1.0, 0.0, 0.0, 0.4}, MuVariant::kCowling);
  const double theta = 0.25 * kPi, tau = 0.1;
  const SectorReport r = pointwise_sector_check(m, mu, theta, tau, coarse_sampling());
  const double expected = kHalfPi - std::abs(std::atan2(0.3, 0.7) - (theta + tau + 0.4));
  EXPECT_NEAR(r.worst_margin, expected, 1e-12);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(mu(r.worst_at.norm()), 0.4);
}

TEST(Sector, PreconditionEnforced) {
  const BackgroundModel m = testing::standard_model();
  const MuProfile mu = MuProfile::build({0.5, 1.0, 0.0, 0.0, 0.4}, MuVariant::kCowling);
  EXPECT_THROW(pointwise_sector_check(m, mu, 1.5, 0.1, coarse_sampling()), DomainError);
  EXPECT_THROW(pointwise_sector_check(m, mu, 0.2, -0.1, coarse_sampling()), DomainError);
  EXPECT_THROW(pointwise_sector_check(testing::standard_model(0.1, 0.0), mu, 0.2, 0.1, coarse_sampling()),
               DomainError);
}

}  // namespace
}  // namespace galbrun
