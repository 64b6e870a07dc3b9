// SPDX-License-Identifier: Apache-2.0
/// @file test_profile.cpp
/// @brief Radial profiles and the JSON model loader.

#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "galbrun/background.hpp"
#include "galbrun/profile.hpp"
#include "support/test_models.hpp"

namespace galbrun {
namespace {

using nlohmann::json;

json standard_config() {
  return json::parse(R"({
    "profiles": {
      "rho":   {"kind": "exponential", "C": 1.0, "alpha": 3.0},
      "cs":    {"kind": "constant", "value": 1.0},
      "p":     {"kind": "exponential", "C": 0.5, "alpha": 3.0},
      "phi":   {"kind": "polynomial", "coefficients": [0.0, -1.5]},
      "gamma": {"kind": "constant", "value": 0.1}
    },
    "radii": {"r1": 0.5, "r2": 1.0, "r3": 1.5},
    "omega": 1.0,
    "G": 1.0
  })");
}

TEST(Profile, ExponentialMatchesClosedForm) {
  const RadialProfile rho = RadialProfile::exponential(1.0, 1.0);
  EXPECT_NEAR(rho(2.0), std::exp(-2.0), 1e-15);
  const auto j = RadialProfile::exponential(2.5, 0.7).jet(1.3);
  const double e = 2.5 * std::exp(-0.7 * 1.3);
  EXPECT_NEAR(j[0], e, 1e-15);
  EXPECT_NEAR(j[1], -0.7 * e, 1e-15);
  EXPECT_NEAR(j[2], 0.49 * e, 1e-15);
  EXPECT_NEAR(j[3], -0.343 * e, 1e-15);
}

TEST(Profile, PolynomialJetMatchesFiniteDifferences) {
  const RadialProfile f = RadialProfile::polynomial({0.3, -1.0, 2.0, 0.5, -0.25});
  for (double r : {0.1, 0.7, 1.9}) {
    for (int k = 1; k <= 3; ++k) {
      const double fd = testing::fd4_1d([&](double s) { return f.derivative(s, k - 1); }, r, 1e-3);
      EXPECT_NEAR(f.derivative(r, k), fd, 1e-9) << "order " << k << " at r = " << r;
    }
  }
}

TEST(Profile, DerivativeOrderOutOfRangeThrows) {
  EXPECT_THROW(RadialProfile::constant(1.0).derivative(0.5, 4), DomainError);
}

TEST(Profile, TabulatedLinearInterpolates) {
  const RadialProfile f = RadialProfile::tabulated({1.0, 2.0, 3.0}, {3.0, 2.0, 1.0},
                                                   RadialProfile::Interpolation::kLinear);
  EXPECT_DOUBLE_EQ(f(1.5), 2.5);
  EXPECT_DOUBLE_EQ(f.derivative(1.5, 1), -1.0);
  EXPECT_TRUE(f.second_derivative_low_trust());
}

TEST(Profile, TabulatedOutsideGridThrows) {
  const RadialProfile f = RadialProfile::tabulated({1.0, 2.0, 3.0}, {3.0, 2.0, 1.0},
                                                   RadialProfile::Interpolation::kLinear);
  EXPECT_THROW(f(0.5), DomainError);
  EXPECT_THROW(f(3.5), DomainError);
}

TEST(Profile, TabulatedRejectsUnsortedRadii) {
  EXPECT_THROW(RadialProfile::tabulated({1.0, 1.0, 2.0}, {1.0, 2.0, 3.0},
                                        RadialProfile::Interpolation::kLinear),
               ConfigError);
}

TEST(Profile, MonotoneCubicPreservesMonotonicityAndIsC1) {
  const std::vector<double> r{0.0, 0.5, 1.0, 1.5, 2.0, 3.0};
  const std::vector<double> v{1.0, 0.9, 0.3, 0.29, 0.05, 0.0};
  const RadialProfile f =
      RadialProfile::tabulated(r, v, RadialProfile::Interpolation::kMonotoneCubic);
  double prev = f(0.0);
  for (int k = 1; k <= 3000; ++k) {
    const double x = 3.0 * k / 3000.0;
    const double y = f(x);
    EXPECT_LE(y, prev + 1e-15) << "overshoot at r = " << x;
    prev = y;
  }
  for (std::size_t i = 1; i + 1 < r.size(); ++i) {
    EXPECT_DOUBLE_EQ(f(r[i]), v[i]);
    const double left = f.derivative(r[i] - 1e-9, 1);
    const double right = f.derivative(r[i] + 1e-9, 1);
    EXPECT_NEAR(left, right, 1e-6) << "slope jump at knot " << i;
  }
}

TEST(Loader, StandardConfigLoads) {
  const BackgroundModel m = load_model(standard_config());
  EXPECT_NEAR(m.rho()(1.0), std::exp(-3.0), 1e-15);
  EXPECT_DOUBLE_EQ(m.radii().r2, 1.0);
  EXPECT_DOUBLE_EQ(m.omega(), 1.0);
  EXPECT_TRUE(m.flow_is_zero());
}

TEST(Loader, ExponentialExampleFromJson) {
  json cfg = standard_config();
  cfg["profiles"]["rho"] = {{"kind", "exponential"}, {"C", 1.0}, {"alpha", 1.0}};
  EXPECT_NEAR(load_model(cfg).rho()(2.0), std::exp(-2.0), 1e-15);
}

TEST(Loader, TabulatedFromInlineArrays) {
  json cfg = standard_config();
  cfg["profiles"]["gamma"] = {{"kind", "tabulated"},
                              {"interpolation", "linear"},
                              {"r", {0.0, 1.0, 2.0, 3.0, 4.0}},
                              {"values", {0.1, 0.1, 0.2, 0.3, 0.3}}};
  const BackgroundModel m = load_model(cfg);
  EXPECT_DOUBLE_EQ(m.gamma()(1.5), 0.15);
  EXPECT_TRUE(m.has_tabulated_profile());
}

TEST(Loader, TabulatedFromCsvSkipsComments) {
  const auto dir = std::filesystem::temp_directory_path() / "galbrun_loader_csv";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "rho.csv");
    out << "# r, rho\n1.0, 3.0\n2.0, 2.0\n\n3.0, 1.0\n";
  }
  const json cfg = {{"kind", "tabulated"}, {"interpolation", "linear"}, {"csv", "rho.csv"}};
  const RadialProfile f = load_profile(cfg, dir, "rho");
  EXPECT_DOUBLE_EQ(f(1.5), 2.5);
  std::filesystem::remove_all(dir);
}

TEST(Loader, UnorderedRadiiRejected) {
  json cfg = standard_config();
  cfg["radii"] = {{"r1", 1.0}, {"r2", 0.5}, {"r3", 1.5}};
  try {
    load_model(cfg);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("radii unordered"), std::string::npos) << e.what();
  }
}

TEST(Loader, MissingFieldNamed) {
  json cfg = standard_config();
  cfg["profiles"].erase("cs");
  try {
    load_model(cfg);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'cs'"), std::string::npos) << e.what();
  }
}

TEST(Loader, NegativeDensityRejected) {
  json cfg = standard_config();
  cfg["profiles"]["rho"] = {{"kind", "polynomial"}, {"coefficients", {1.0, -1.0}}};
  try {
    load_model(cfg);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("negative density"), std::string::npos) << e.what();
  }
}

TEST(Loader, UnknownKindRejected) {
  json cfg = standard_config();
  cfg["profiles"]["p"] = {{"kind", "spline"}};
  EXPECT_THROW(load_model(cfg), ConfigError);
}

TEST(Loader, FlowAndRotationParsed) {
  json cfg = standard_config();
  cfg["flow"] = {{"kind", "toroidal"}, {"amplitude", 0.2}, {"radius", 0.5}, {"axis", {0, 0, 2}}};
  cfg["Omega"] = {0.0, 0.0, 0.1};
  const BackgroundModel m = load_model(cfg);
  EXPECT_EQ(m.flow_spec().kind, FlowSpec::Kind::kToroidal);
  EXPECT_NEAR(m.flow_spec().axis.norm(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(m.rotation().z(), 0.1);
}

TEST(Loader, FlowOutsideR1Rejected) {
  json cfg = standard_config();
  cfg["flow"] = {{"kind", "toroidal"}, {"amplitude", 0.2}, {"radius", 0.8}};
  EXPECT_THROW(load_model(cfg), ConfigError);
}

}  // namespace
}  // namespace galbrun
