// SPDX-License-Identifier: Apache-2.0
/// @file diagnostics.hpp
/// @brief Pointwise coercivity certificates: numerical-range angles, theta, beta, mu profiles.
///
/// Everything here is a sampled certificate. Suprema and infima run over finite point sets
/// and operator norms of multiplication operators are replaced by the sampled sup of the
/// pointwise spectral norm.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "galbrun/background.hpp"
#include "galbrun/types.hpp"

namespace galbrun {

struct NumericalRangeOptions {
  /// Angles phi for the eigenvectors of Herm(e^{-i phi} M), which are support points of the range.
  int rotations = 64;
  int random_vectors = 1000;
  std::uint64_t seed = 20240601;
  /// Use the exact eigenvalue hull when M is normal.
  bool exploit_normality = true;
};

/// Argument extrema of {xi^H M xi : |xi| = 1}, args in (-pi, pi].
struct ArgExtrema {
  double sup_arg = 0.0;
  double inf_arg = 0.0;
  Complex sup_point = 0.0;
  Complex inf_point = 0.0;
  bool exact = false;               // normal-matrix hull was used
  bool meets_negative_axis = false;  // range touches (-inf, 0), so sup_arg = pi
};

/// Reusable sampler; the random directions are drawn once from the seed.
class NumericalRangeSampler {
 public:
  explicit NumericalRangeSampler(NumericalRangeOptions options = {});
  ArgExtrema args(const CMat3& m) const;
  /// Points xi^H M xi used by the sampling path (support points and random directions).
  std::vector<Complex> sample_points(const CMat3& m) const;
  const NumericalRangeOptions& options() const { return options_; }

 private:
  NumericalRangeOptions options_;
  std::vector<CVec3> random_;
};

bool is_normal(const CMat3& m, double rel_tol = 1e-13);

using MatrixField = std::function<CMat3(const Vec3&)>;

struct AngleRecord {
  Vec3 x = Vec3::Zero();
  ArgExtrema extrema;
};

struct AngleReport {
  std::vector<AngleRecord> records;
  double sup_arg = -kPi;  // sup over points of sup arg
  double inf_arg = kPi;   // inf over points of inf arg
  /// theta = max(0, sup_x |sup arg(x)| - pi/2) and the point attaining it.
  double theta = 0.0;
  Vec3 theta_at = Vec3::Zero();
  double margin_to_half_pi = 0.0;  // pi/2 - theta
  /// Some point has |inf arg| > |sup arg| (range dips further below the real axis).
  bool inf_dominates = false;
  Vec3 inf_dominates_at = Vec3::Zero();
  nlohmann::json to_json(bool include_records = false) const;
};

/// Requires at least one point.
AngleReport numerical_range_arg_extrema(const MatrixField& field, const std::vector<Vec3>& points,
                                        const NumericalRangeOptions& options = {});

/// Sample points x = r d with r on a uniform grid of (0, r_hi] (n_radial points) and d from a
/// Fibonacci set of n_directions unit vectors; the origin is included when include_origin.
std::vector<Vec3> ball_samples(double r_lo, double r_hi, int n_radial, int n_directions,
                               bool include_origin);
std::vector<Vec3> fibonacci_directions(int n);

struct ThetaReport {
  AngleReport angles;
  double theta = 0.0;
  Vec3 attained_at = Vec3::Zero();
  double attained_radius = 0.0;
  std::size_t n_points = 0;
  std::vector<std::string> notes;
  nlohmann::json to_json() const;
};

/// theta over B_r2 for the matrix i w gamma I + m1. Throws DomainError when omega = 0.
ThetaReport compute_theta(const BackgroundModel& model, const SamplingSpec& sampling = {},
                          const NumericalRangeOptions& options = {});

struct SubsonicReport {
  double sup_mach_sq = 0.0;  // sup |b|^2 / cs^2
  Vec3 sup_at = Vec3::Zero();
  double theta = 0.0;
  double bound = 1.0;  // 1 / (1 + tan^2 theta)
  double margin = 0.0;
  bool pass = false;
  nlohmann::json to_json() const;
};

/// Throws DomainError unless theta in [0, pi/2).
SubsonicReport check_subsonic(const BackgroundModel& model, double theta,
                              const SamplingSpec& sampling = {});
/// Closed-form comparison used when the Mach number is already known.
SubsonicReport subsonic_from_mach(double sup_mach_sq, double theta);

enum class BetaVariant { kCowling, kFull, kCoupled };
std::string to_string(BetaVariant v);

struct BetaReport {
  BetaVariant variant = BetaVariant::kCowling;
  bool admissible = false;
  double beta = 0.0;
  double margin = 0.0;  // best margin on the grid, also when not admissible
  double interval_lo = 0.0;
  double interval_hi = 0.0;
  int n_angles = 0;
  double gamma_min = 0.0;
  double m2_norm = 0.0;  // sampled sup of the pointwise spectral norm (cowling/full)
  std::vector<std::string> caveats;
  nlohmann::json to_json() const;
};

/// Re(e^{-i beta}(|w| gamma_min - i norm)), the cowling/full margin at one angle.
double cowling_beta_margin(double beta, double abs_omega_gamma_min, double m2_norm);
/// Grid search over (0, pi/2) for the cowling/full margin.
BetaReport select_beta_scalar(double abs_omega_gamma_min, double m2_norm, int n_angles = 10000);

/// Throws DomainError when omega = 0.
BetaReport select_beta(const BackgroundModel& model, BetaVariant variant,
                       const SamplingSpec& sampling = {}, int n_angles = 10000);

/// Coupled margin at one angle: inf over the sampled range points nu of Re(i s e^{-i beta s} nu).
double coupled_beta_margin(double beta, double sign_omega, const std::vector<Complex>& range_hull);

/// Convex hull (counter-clockwise, no collinear points) of a planar point cloud.
std::vector<Complex> convex_hull(std::vector<Complex> points);

// mu profiles ------------------------------------------------------------------

/// S(t) = 1 / (1 + exp(1/t - 1/(1-t))): C-infinity, 0 for t <= 0, 1 for t >= 1, non-decreasing.
double smooth_step(double t);

enum class MuVariant {
  kCowling,  // 0 on [0, r1], rises to mu_star on [r1, r2], constant after
  kCoupled,  // 0 on [0, r1], rises to mu_r2 on [r1, r2], falls to mu_star on [r2, r3]
};

struct MuParams {
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;     // kCoupled only
  double mu_r2 = 0.0;  // kCoupled only
  double mu_star = 0.0;
};

struct MuPropertyReport {
  int n_samples = 0;
  int violations = 0;
  std::vector<std::string> failures;
  nlohmann::json to_json() const;
};

class MuProfile {
 public:
  /// Throws ConfigError on unordered radii, targets outside (0, pi), or mu_star > mu_r2 (kCoupled).
  static MuProfile build(const MuParams& params, MuVariant variant);

  double operator()(double r) const;
  /// sigma(x) = exp(i mu(|x|) sign w)
  Complex sigma(const Vec3& x, double omega) const;
  Complex sigma_star(double omega) const;
  const MuParams& params() const { return params_; }
  MuVariant variant() const { return variant_; }

  /// Exact endpoint equalities and monotonicity on n uniform samples of [0, r_end + (r_end - r1)].
  MuPropertyReport check_properties(int n = 10000) const;
  nlohmann::json to_json() const;

 private:
  MuProfile(MuParams p, MuVariant v) : params_(p), variant_(v) {}
  MuParams params_;
  MuVariant variant_;
};

struct SectorReport {
  double worst_margin = 0.0;  // pi/2 - |s arg(...)| minimized over samples
  Vec3 worst_at = Vec3::Zero();
  double theta = 0.0;
  double tau = 0.0;
  std::size_t n_points = 0;
  bool pass = false;
  nlohmann::json to_json() const;
};

/// Pointwise sector inequality for e^{-i(theta + tau + mu) s}(i w gamma + m2) on samples of
/// [0, r_max]. Throws DomainError unless theta + tau < pi/2 and omega != 0.
SectorReport pointwise_sector_check(const BackgroundModel& model, const MuProfile& mu, double theta,
                                    double tau, const SamplingSpec& sampling = {},
                                    const NumericalRangeOptions& options = {});

/// Outer sampling radius used by the model-level checks.
double sampling_radius(const BackgroundModel& model, const SamplingSpec& sampling);

}  // namespace galbrun
