// SPDX-License-Identifier: Apache-2.0
/// @file background.hpp
/// @brief Stellar background models and the coefficient fields derived from them.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "galbrun/profile.hpp"
#include "galbrun/types.hpp"

namespace galbrun {

/// Closed-form background flow b, described through the momentum density rho*b.
///
/// kToroidal:     rho b = s(r) (axis x x), div(rho b) = 0 identically.
/// kRadialSource: rho b = s(r) x, div(rho b) = 3 s + r s' (deliberately nonzero).
/// s(r) = amplitude * exp(1 - 1/(1 - r^2/radius^2)) for r < radius, 0 beyond.
struct FlowSpec {
  enum class Kind { kNone, kToroidal, kRadialSource };
  Kind kind = Kind::kNone;
  Vec3 axis = Vec3::UnitZ();
  double amplitude = 0.0;
  double radius = 0.0;
};

/// Value and Jacobian (J_ij = d b_i / d x_j) of the flow at one point.
struct FlowSample {
  Vec3 b = Vec3::Zero();
  Mat3 jacobian = Mat3::Zero();
};

struct Radii {
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
};

class BackgroundModel {
 public:
  struct Profiles {
    RadialProfile rho;
    RadialProfile cs;
    RadialProfile p;
    RadialProfile phi;
    RadialProfile gamma;
  };

  /// Throws ConfigError unless 0 < r1 < r2 < r3 and the flow radius is at most r1.
  BackgroundModel(Profiles profiles, FlowSpec flow, Radii radii, double omega, Vec3 rotation,
                  double gravitational_constant);

  const RadialProfile& rho() const { return profiles_.rho; }
  const RadialProfile& cs() const { return profiles_.cs; }
  const RadialProfile& p() const { return profiles_.p; }
  const RadialProfile& phi() const { return profiles_.phi; }
  const RadialProfile& gamma() const { return profiles_.gamma; }
  const Profiles& profiles() const { return profiles_; }
  const FlowSpec& flow_spec() const { return flow_; }
  const Radii& radii() const { return radii_; }
  double omega() const { return omega_; }
  const Vec3& rotation() const { return rotation_; }
  double G() const { return G_; }

  /// Largest radius at which every profile is defined (infinite for analytic profiles).
  double max_radius() const;
  /// Smallest radius at which every profile is defined (zero for analytic profiles).
  double min_radius() const;
  bool has_tabulated_profile() const;
  bool flow_is_zero() const { return flow_.kind == FlowSpec::Kind::kNone || flow_.amplitude == 0.0; }

  FlowSample flow(const Vec3& x) const;
  /// div(rho b) = grad(rho).b + rho div(b), assembled from the flow Jacobian.
  double momentum_divergence(const Vec3& x) const;

  BackgroundModel with_omega(double omega) const;
  BackgroundModel with_gamma(RadialProfile gamma) const;
  BackgroundModel with_flow(FlowSpec flow) const;
  BackgroundModel with_G(double G) const;

 private:
  Profiles profiles_;
  FlowSpec flow_;
  Radii radii_;
  double omega_;
  Vec3 rotation_;
  double G_;
};

/// Derived quantities at one point. m2 is Hermitian; it is real symmetric when Omega = 0.
struct CoefficientSample {
  Vec3 x = Vec3::Zero();
  double r = 0.0;
  double rho = 0.0;
  double cs = 0.0;
  double gamma = 0.0;
  Vec3 grad_p = Vec3::Zero();
  Mat3 hess_p = Mat3::Zero();
  Mat3 hess_phi = Mat3::Zero();
  double q_r = 0.0;
  Vec3 q = Vec3::Zero();
  std::optional<double> eta;  // set for r >= r2
  Mat3 m1 = Mat3::Zero();
  CMat3 m2 = CMat3::Zero();
  double m1_rr = 0.0;
  double m1_tt = 0.0;
  double m2_rr = 0.0;
  double m2_tt = 0.0;
};

/// Radius overload evaluates on the positive z-axis.
CoefficientSample derived_coefficients(const BackgroundModel& model, double r);
CoefficientSample derived_coefficients(const BackgroundModel& model, const Vec3& x);
/// Same as derived_coefficients(model, x) but skips eta (used in hot quadrature loops).
CoefficientSample pointwise_coefficients(const BackgroundModel& model, const Vec3& x);

/// Radial coefficient jets used by the l = 0 solvers; requires Omega = 0.
struct RadialCoefficients {
  double r = 0.0;
  double rho = 0.0, drho = 0.0;
  double cs = 0.0, dcs = 0.0;
  double gamma = 0.0, dgamma = 0.0;
  double q = 0.0, dq = 0.0;
  double m1_rr = 0.0, dm1_rr = 0.0;
  double m2_rr = 0.0;
  Complex M = 0.0;   // m2_rr + i omega gamma
  Complex dM = 0.0;  // d/dr of M
};
RadialCoefficients radial_coefficients(const BackgroundModel& model, double r);

/// q_r(r) = p'(r) / (cs^2 rho)
double radial_q(const BackgroundModel& model, double r);
/// eta(r) = int_{r2}^{r} q_r, adaptive Gauss-Kronrod to relative tolerance 1e-10. Requires r >= r2.
double eta(const BackgroundModel& model, double r);
/// int_a^b q_r for arbitrary a <= b (building block for cumulative eta tables).
double integrate_q(const BackgroundModel& model, double a, double b);

/// Hessian of a radial function with jet (f, f', f'') at x: f'' xx^T + (f'/r)(I - xx^T).
/// At the origin f'(0) must vanish; returns f''(0) I.
Mat3 radial_hessian(double r, double d1, double d2, const Vec3& x);

BackgroundModel load_model(const nlohmann::json& config,
                           const std::filesystem::path& base_dir = std::filesystem::path{"."});
BackgroundModel load_model_file(const std::filesystem::path& path);
RadialProfile load_profile(const nlohmann::json& config, const std::filesystem::path& base_dir,
                           const std::string& name);

// Validation -----------------------------------------------------------------

struct SamplingSpec {
  int n_radial = 10000;
  /// Outer sampling radius; <= 0 selects min(max_radius, 2 r3).
  double r_max = 0.0;
  int n_directions = 4;
  int n_random_vectors = 256;
  std::uint64_t seed = 20240601;
};

struct ValidationEntry {
  std::string name;
  bool pass = false;
  bool blocking = true;
  double value = 0.0;
  double margin = 0.0;
  std::string note;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  SamplingSpec sampling;
  double r_max = 0.0;
  double theta = 0.0;
  bool low_trust_derivatives = false;

  bool all_blocking_pass() const;
  const ValidationEntry* find(const std::string& name) const;
  nlohmann::json to_json() const;
  std::string to_table() const;
};

ValidationReport validate_assumptions(const BackgroundModel& model, const SamplingSpec& sampling = {});

}  // namespace galbrun
