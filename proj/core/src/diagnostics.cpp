// SPDX-License-Identifier: Apache-2.0
#include "galbrun/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace galbrun {

namespace {

constexpr double kHalfPi = 0.5 * kPi;

// arg in (-pi, pi]; a point on the negative real axis with a signed zero imaginary part maps to pi.
double arg_of(Complex z) {
  if (z.imag() == 0.0 && z.real() < 0.0) return kPi;
  return std::arg(z);
}

double cross(Complex o, Complex a, Complex b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
}

ArgExtrema hull_arg_extrema(const std::vector<Complex>& points) {
  const std::vector<Complex> hull = convex_hull(points);
  ArgExtrema out;
  out.sup_arg = -std::numeric_limits<double>::infinity();
  out.inf_arg = std::numeric_limits<double>::infinity();
  for (const auto& z : hull) {
    const double a = arg_of(z);
    if (a > out.sup_arg) {
      out.sup_arg = a;
      out.sup_point = z;
    }
    if (a < out.inf_arg) {
      out.inf_arg = a;
      out.inf_point = z;
    }
  }
  // An edge crossing the open negative real axis puts arg = pi in the range and lets args
  // approach -pi from below.
  const std::size_t n = hull.size();
  const std::size_t n_edges = n < 2 ? 0 : (n == 2 ? 1 : n);
  for (std::size_t k = 0; k < n_edges; ++k) {
    const Complex a = hull[k];
    const Complex b = hull[(k + 1) % n];
    if ((a.imag() > 0.0 && b.imag() < 0.0) || (a.imag() < 0.0 && b.imag() > 0.0)) {
      const double x = a.real() - a.imag() * (b.real() - a.real()) / (b.imag() - a.imag());
      if (x < 0.0) {
        out.meets_negative_axis = true;
        out.sup_arg = kPi;
        out.sup_point = Complex(x, 0.0);
        out.inf_arg = -kPi;
        out.inf_point = Complex(x, -0.0);
        break;
      }
    }
  }
  return out;
}

CMat3 hermitian_part(const CMat3& m) { return 0.5 * (m + m.adjoint()); }

double spectral_norm_hermitian(const CMat3& m) {
  Eigen::SelfAdjointEigenSolver<CMat3> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<Complex> eigenvalues(const CMat3& m) {
  Eigen::ComplexEigenSolver<CMat3> es(m, false);
  const auto& ev = es.eigenvalues();
  return {ev[0], ev[1], ev[2]};
}

std::vector<double> radial_grid(double lo, double hi, int n, bool include_lo) {
  std::vector<double> r;
  if (include_lo) r.push_back(lo);
  for (int k = 1; k <= n; ++k) r.push_back(lo + (hi - lo) * k / n);
  return r;
}

// Orthonormal pair spanning the plane perpendicular to a.
std::pair<Vec3, Vec3> perpendicular_basis(const Vec3& a) {
  const Vec3 n = a.normalized();
  const Vec3 t = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = (t - t.dot(n) * n).normalized();
  return {e1, n.cross(e1)};
}

double sign_of(double omega) { return omega >= 0.0 ? 1.0 : -1.0; }

nlohmann::json vec_json(const Vec3& x) { return {x[0], x[1], x[2]}; }
nlohmann::json complex_json(Complex z) { return {z.real(), z.imag()}; }

}  // namespace

// Numerical range --------------------------------------------------------------

bool is_normal(const CMat3& m, double rel_tol) {
  const double scale = m.squaredNorm();
  if (scale == 0.0) return true;
  return (m * m.adjoint() - m.adjoint() * m).norm() <= rel_tol * scale;
}

std::vector<Complex> convex_hull(std::vector<Complex> points) {
  std::sort(points.begin(), points.end(), [](Complex a, Complex b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() <= 2) return points;
  std::vector<Complex> hull(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = points.size() - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

NumericalRangeSampler::NumericalRangeSampler(NumericalRangeOptions options) : options_(options) {
  if (options_.rotations < 1 || options_.random_vectors < 0) {
    throw ConfigError("numerical range sampling needs at least one rotation");
  }
  std::mt19937_64 rng(options_.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  random_.reserve(static_cast<std::size_t>(options_.random_vectors));
  while (random_.size() < static_cast<std::size_t>(options_.random_vectors)) {
    CVec3 xi;
    for (int i = 0; i < 3; ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      xi[i] = Complex(re, im);
    }
    const double n = xi.norm();
    if (n > 1e-12) random_.push_back(xi / n);
  }
}

std::vector<Complex> NumericalRangeSampler::sample_points(const CMat3& m) const {
  std::vector<Complex> pts;
  pts.reserve(3 * static_cast<std::size_t>(options_.rotations) + random_.size());
  for (int k = 0; k < options_.rotations; ++k) {
    const double phi = 2.0 * kPi * k / options_.rotations;
    const CMat3 h = hermitian_part(std::polar(1.0, -phi) * m);
    Eigen::SelfAdjointEigenSolver<CMat3> es(h);
    for (int j = 0; j < 3; ++j) {
      const CVec3 xi = es.eigenvectors().col(j);
      pts.push_back(pair(m * xi, xi));
    }
  }
  for (const auto& xi : random_) pts.push_back(pair(m * xi, xi));
  return pts;
}

ArgExtrema NumericalRangeSampler::args(const CMat3& m) const {
  if (options_.exploit_normality && is_normal(m)) {
    ArgExtrema out = hull_arg_extrema(eigenvalues(m));
    out.exact = true;
    return out;
  }
  return hull_arg_extrema(sample_points(m));
}

nlohmann::json AngleReport::to_json(bool include_records) const {
  nlohmann::json j{{"sup_arg", sup_arg},
                   {"inf_arg", inf_arg},
                   {"theta", theta},
                   {"theta_at", vec_json(theta_at)},
                   {"margin_to_half_pi", margin_to_half_pi},
                   {"inf_dominates", inf_dominates},
                   {"n_points", records.size()}};
  if (inf_dominates) j["inf_dominates_at"] = vec_json(inf_dominates_at);
  if (include_records) {
    nlohmann::json rec = nlohmann::json::array();
    for (const auto& r : records) {
      rec.push_back({{"x", vec_json(r.x)},
                     {"sup_arg", r.extrema.sup_arg},
                     {"inf_arg", r.extrema.inf_arg},
                     {"exact", r.extrema.exact}});
    }
    j["records"] = rec;
  }
  return j;
}

AngleReport numerical_range_arg_extrema(const MatrixField& field, const std::vector<Vec3>& points,
                                        const NumericalRangeOptions& options) {
  if (points.empty()) throw ConfigError("numerical range sampling needs at least one point");
  const NumericalRangeSampler sampler(options);
  AngleReport rep;
  rep.records.reserve(points.size());
  double worst = -std::numeric_limits<double>::infinity();
  double worst_gap = 1e-12;  // rounding-level gaps are not reported
  for (const auto& x : points) {
    AngleRecord rec{x, sampler.args(field(x))};
    const double s = std::abs(rec.extrema.sup_arg);
    if (s > worst) {
      worst = s;
      rep.theta_at = x;
    }
    rep.sup_arg = std::max(rep.sup_arg, rec.extrema.sup_arg);
    rep.inf_arg = std::min(rep.inf_arg, rec.extrema.inf_arg);
    const double gap = std::abs(rec.extrema.inf_arg) - s;
    if (gap > worst_gap) {
      worst_gap = gap;
      rep.inf_dominates = true;
      rep.inf_dominates_at = x;
    }
    rep.records.push_back(rec);
  }
  rep.theta = std::max(0.0, worst - kHalfPi);
  rep.margin_to_half_pi = kHalfPi - rep.theta;
  return rep;
}

std::vector<Vec3> fibonacci_directions(int n) {
  if (n < 1) throw ConfigError("need at least one direction");
  std::vector<Vec3> d;
  d.reserve(static_cast<std::size_t>(n));
  if (n == 1) {
    d.push_back(Vec3::UnitZ());
    return d;
  }
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / n;
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    d.emplace_back(s * std::cos(golden * k), s * std::sin(golden * k), z);
  }
  return d;
}

std::vector<Vec3> ball_samples(double r_lo, double r_hi, int n_radial, int n_directions,
                               bool include_origin) {
  if (n_radial < 1 || !(r_hi > r_lo) || r_lo < 0.0) {
    throw ConfigError("radial sampling needs n >= 1 and 0 <= r_lo < r_hi");
  }
  const auto dirs = fibonacci_directions(n_directions);
  std::vector<Vec3> pts;
  const bool lo_point = include_origin || r_lo > 0.0;
  for (double r : radial_grid(r_lo, r_hi, n_radial, lo_point)) {
    if (r == 0.0) {
      pts.push_back(Vec3::Zero());
      continue;
    }
    for (const auto& d : dirs) pts.push_back(r * d);
  }
  return pts;
}

double sampling_radius(const BackgroundModel& model, const SamplingSpec& sampling) {
  const double r = sampling.r_max > 0.0 ? sampling.r_max
                                        : std::min(model.max_radius(), 2.0 * model.radii().r3);
  if (!(r > model.radii().r2)) throw ConfigError("sampling radius must exceed r2");
  return r;
}

// theta --------------------------------------------------------------------------

nlohmann::json ThetaReport::to_json() const {
  return {{"theta", theta},
          {"attained_at", vec_json(attained_at)},
          {"attained_radius", attained_radius},
          {"n_points", n_points},
          {"sup_arg", angles.sup_arg},
          {"inf_arg", angles.inf_arg},
          {"inf_dominates", angles.inf_dominates},
          {"notes", notes}};
}

ThetaReport compute_theta(const BackgroundModel& model, const SamplingSpec& sampling,
                          const NumericalRangeOptions& options) {
  const double w = model.omega();
  if (w == 0.0) throw DomainError("theta requires omega != 0");
  ThetaReport rep;
  std::vector<Vec3> pts =
      ball_samples(0.0, model.radii().r2, sampling.n_radial, sampling.n_directions, false);
  // The origin enters only when m1 has a finite limit there.
  try {
    (void)pointwise_coefficients(model, Vec3::Zero());
    pts.insert(pts.begin(), Vec3::Zero());
  } catch (const DomainError& e) {
    rep.notes.push_back(std::string("origin skipped: ") + e.what());
  }
  const MatrixField field = [&model, w](const Vec3& x) -> CMat3 {
    const CoefficientSample c = pointwise_coefficients(model, x);
    return kI * w * c.gamma * CMat3::Identity() + c.m1.cast<Complex>();
  };
  rep.angles = numerical_range_arg_extrema(field, pts, options);
  rep.theta = rep.angles.theta;
  rep.attained_at = rep.angles.theta_at;
  rep.attained_radius = rep.attained_at.norm();
  rep.n_points = pts.size();
  if (rep.angles.inf_dominates) {
    rep.notes.push_back("|inf arg| exceeds |sup arg| at some point; theta uses sup arg");
  }
  return rep;
}

// Subsonic -------------------------------------------------------------------------

nlohmann::json SubsonicReport::to_json() const {
  return {{"sup_mach_sq", sup_mach_sq}, {"sup_at", vec_json(sup_at)}, {"theta", theta},
          {"bound", bound},             {"margin", margin},           {"pass", pass}};
}

SubsonicReport subsonic_from_mach(double sup_mach_sq, double theta) {
  if (!(theta >= 0.0 && theta < kHalfPi)) throw DomainError("theta must lie in [0, pi/2)");
  SubsonicReport rep;
  rep.sup_mach_sq = sup_mach_sq;
  rep.theta = theta;
  const double t = std::tan(theta);
  rep.bound = 1.0 / (1.0 + t * t);
  rep.margin = rep.bound - sup_mach_sq;
  rep.pass = sup_mach_sq < rep.bound;
  return rep;
}

SubsonicReport check_subsonic(const BackgroundModel& model, double theta,
                              const SamplingSpec& sampling) {
  if (!(theta >= 0.0 && theta < kHalfPi)) throw DomainError("theta must lie in [0, pi/2)");
  double sup = 0.0;
  Vec3 at = Vec3::Zero();
  if (!model.flow_is_zero()) {
    const FlowSpec& f = model.flow_spec();
    std::vector<Vec3> dirs = fibonacci_directions(sampling.n_directions);
    const auto [e1, e2] = perpendicular_basis(f.axis);
    for (int k = 0; k < 8; ++k) {
      const double a = 2.0 * kPi * k / 8;
      dirs.push_back(std::cos(a) * e1 + std::sin(a) * e2);
    }
    for (double r : radial_grid(0.0, f.radius, sampling.n_radial, true)) {
      for (const auto& d : dirs) {
        const Vec3 x = r * d;
        const double cs = model.cs()(r);
        const double m = model.flow(x).b.squaredNorm() / (cs * cs);
        if (m > sup) {
          sup = m;
          at = x;
        }
      }
    }
  }
  SubsonicReport rep = subsonic_from_mach(sup, theta);
  rep.sup_at = at;
  return rep;
}

// beta -------------------------------------------------------------------------------

std::string to_string(BetaVariant v) {
  switch (v) {
    case BetaVariant::kCowling:
      return "cowling";
    case BetaVariant::kFull:
      return "full";
    case BetaVariant::kCoupled:
      return "coupled";
  }
  return "unknown";
}

nlohmann::json BetaReport::to_json() const {
  nlohmann::json j{{"variant", to_string(variant)},
                   {"admissible", admissible},
                   {"margin", margin},
                   {"interval", {interval_lo, interval_hi}},
                   {"n_angles", n_angles},
                   {"gamma_min", gamma_min},
                   {"caveats", caveats}};
  j["beta"] = admissible ? nlohmann::json(beta) : nlohmann::json();
  j["best_beta_on_grid"] = beta;
  if (variant != BetaVariant::kCoupled) j["m2_norm"] = m2_norm;
  if (!admissible) j["status"] = "no admissible beta";
  return j;
}

double cowling_beta_margin(double beta, double abs_omega_gamma_min, double m2_norm) {
  return abs_omega_gamma_min * std::cos(beta) - m2_norm * std::sin(beta);
}

BetaReport select_beta_scalar(double abs_omega_gamma_min, double m2_norm, int n_angles) {
  if (n_angles < 1) throw ConfigError("beta grid needs at least one angle");
  BetaReport rep;
  rep.interval_lo = 0.0;
  rep.interval_hi = kHalfPi;
  rep.n_angles = n_angles;
  rep.m2_norm = m2_norm;
  rep.margin = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_angles; ++k) {
    const double b = kHalfPi * (k + 0.5) / n_angles;
    const double m = cowling_beta_margin(b, abs_omega_gamma_min, m2_norm);
    if (m > rep.margin) {
      rep.margin = m;
      rep.beta = b;
    }
  }
  rep.admissible = rep.margin > 0.0;
  return rep;
}

double coupled_beta_margin(double beta, double sign_omega, const std::vector<Complex>& range_hull) {
  const Complex c = kI * sign_omega * std::polar(1.0, -beta * sign_omega);
  double m = std::numeric_limits<double>::infinity();
  for (const auto& z : range_hull) m = std::min(m, (c * z).real());
  return m;
}

BetaReport select_beta(const BackgroundModel& model, BetaVariant variant,
                       const SamplingSpec& sampling, int n_angles) {
  const double w = model.omega();
  if (w == 0.0) throw DomainError("beta selection requires omega != 0");
  const double r_hi = sampling_radius(model, sampling);
  const double r_lo = variant == BetaVariant::kCowling ? 0.0 : model.radii().r2;
  std::vector<Vec3> pts = ball_samples(r_lo, r_hi, sampling.n_radial, sampling.n_directions, true);
  if (r_lo == 0.0) {
    try {
      (void)pointwise_coefficients(model, Vec3::Zero());
    } catch (const DomainError&) {
      pts.erase(pts.begin());
    }
  }
  double gamma_min = std::numeric_limits<double>::infinity();
  for (double r : radial_grid(r_lo, r_hi, sampling.n_radial, true)) {
    gamma_min = std::min(gamma_min, model.gamma()(r));
  }

  BetaReport rep;
  if (variant != BetaVariant::kCoupled) {
    double norm = 0.0;
    for (const auto& x : pts) norm = std::max(norm, spectral_norm_hermitian(pointwise_coefficients(model, x).m2));
    rep = select_beta_scalar(std::abs(w) * gamma_min, norm, n_angles);
    rep.caveats.push_back(
        "operator norm of m2 replaced by the sampled sup of its pointwise spectral norm");
    if (variant == BetaVariant::kFull) {
      rep.caveats.push_back("QQ* contribution omitted: norm uses m2 alone on the exterior");
    }
  } else {
    if (n_angles < 1) throw ConfigError("beta grid needs at least one angle");
    const NumericalRangeSampler sampler;
    std::vector<Complex> cloud;
    bool singular = false;
    for (const auto& x : pts) {
      const CoefficientSample c = pointwise_coefficients(model, x);
      const CMat3 m = c.m2 + kI * w * c.gamma * CMat3::Identity();
      Eigen::FullPivLU<CMat3> lu(m);
      if (!lu.isInvertible()) {
        singular = true;
        continue;
      }
      const CMat3 n = lu.inverse();
      const std::vector<Complex> pts_n = is_normal(n) ? eigenvalues(n) : sampler.sample_points(n);
      cloud.insert(cloud.end(), pts_n.begin(), pts_n.end());
    }
    const std::vector<Complex> hull = convex_hull(cloud);
    rep.interval_lo = -kHalfPi;
    rep.interval_hi = 0.0;
    rep.n_angles = n_angles;
    rep.margin = -std::numeric_limits<double>::infinity();
    const double s = sign_of(w);
    for (int k = 0; k < n_angles; ++k) {
      const double b = -kHalfPi + kHalfPi * (k + 0.5) / n_angles;
      const double m = coupled_beta_margin(b, s, hull);
      if (m > rep.margin) {
        rep.margin = m;
        rep.beta = b;
      }
    }
    rep.admissible = !singular && rep.margin > 0.0;
    if (singular) rep.caveats.push_back("m2 + i w gamma is singular at a sample point");
    rep.caveats.push_back("range of (m2 + i w gamma)^-1 sampled over exterior points");
  }
  rep.variant = variant;
  rep.gamma_min = gamma_min;
  return rep;
}

// mu profiles ------------------------------------------------------------------

double smooth_step(double t) {
  if (!(t > 0.0)) return 0.0;
  if (!(t < 1.0)) return 1.0;
  return 1.0 / (1.0 + std::exp(1.0 / t - 1.0 / (1.0 - t)));
}

MuProfile MuProfile::build(const MuParams& p, MuVariant v) {
  auto in_open = [](double x) { return x > 0.0 && x < kPi; };
  if (!(p.r1 > 0.0 && p.r2 > p.r1)) throw ConfigError("mu profile radii unordered");
  if (!in_open(p.mu_star)) throw ConfigError("mu_star must lie in (0, pi)");
  if (v == MuVariant::kCoupled) {
    if (!(p.r3 > p.r2)) throw ConfigError("mu profile radii unordered");
    if (!in_open(p.mu_r2)) throw ConfigError("mu(r2) must lie in (0, pi)");
    if (p.mu_star > p.mu_r2) {
      throw ConfigError(
          "inconsistent targets: mu_star exceeds mu(r2) but mu must be non-increasing on [r2, r3]");
    }
  }
  return {p, v};
}

double MuProfile::operator()(double r) const {
  const MuParams& p = params_;
  if (r <= p.r1) return 0.0;
  if (variant_ == MuVariant::kCowling) {
    if (r >= p.r2) return p.mu_star;
    return p.mu_star * smooth_step((r - p.r1) / (p.r2 - p.r1));
  }
  if (r <= p.r2) return p.mu_r2 * smooth_step((r - p.r1) / (p.r2 - p.r1));
  if (r >= p.r3) return p.mu_star;
  const double t = (r - p.r2) / (p.r3 - p.r2);
  const double m = p.mu_star + (p.mu_r2 - p.mu_star) * smooth_step(1.0 - t);
  return std::clamp(m, p.mu_star, p.mu_r2);
}

Complex MuProfile::sigma(const Vec3& x, double omega) const {
  return std::polar(1.0, (*this)(x.norm()) * sign_of(omega));
}

Complex MuProfile::sigma_star(double omega) const {
  return std::polar(1.0, params_.mu_star * sign_of(omega));
}

nlohmann::json MuPropertyReport::to_json() const {
  return {{"n_samples", n_samples}, {"violations", violations}, {"failures", failures}};
}

MuPropertyReport MuProfile::check_properties(int n) const {
  if (n < 2) throw ConfigError("property scan needs at least two samples");
  const MuParams& p = params_;
  const bool coupled = variant_ == MuVariant::kCoupled;
  const double r_end = coupled ? p.r3 : p.r2;
  const double r_top = r_end + (r_end - p.r1);
  MuPropertyReport rep;
  auto fail = [&rep](const std::string& what, double r) {
    ++rep.violations;
    if (rep.failures.size() < 20) {
      std::ostringstream os;
      os.precision(17);
      os << what << " at r = " << r;
      rep.failures.push_back(os.str());
    }
  };
  std::vector<double> rs;
  rs.reserve(static_cast<std::size_t>(n) + 3);
  for (int k = 0; k < n; ++k) rs.push_back(r_top * k / (n - 1));
  rs.push_back(p.r1);
  rs.push_back(p.r2);
  rs.push_back(r_end);
  std::sort(rs.begin(), rs.end());
  rep.n_samples = static_cast<int>(rs.size());

  const double peak = coupled ? p.mu_r2 : p.mu_star;
  if ((*this)(p.r1) != 0.0) fail("mu(r1) != 0", p.r1);
  if ((*this)(p.r2) != peak) fail("mu(r2) != target", p.r2);
  if ((*this)(r_end) != p.mu_star) fail("mu != mu_star at the end radius", r_end);
  double prev = 0.0;
  for (std::size_t k = 0; k < rs.size(); ++k) {
    const double r = rs[k];
    const double m = (*this)(r);
    if (!(m >= 0.0 && m < kPi)) fail("mu outside [0, pi)", r);
    if (r <= p.r1 && m != 0.0) fail("mu != 0 inside r1", r);
    if (r >= r_end && m != p.mu_star) fail("mu != mu_star beyond the end radius", r);
    if (k > 0) {
      const bool rising = rs[k] <= p.r2;
      if (rising && m < prev) fail("mu decreases on [0, r2]", r);
      if (!rising && !coupled && m < prev) fail("mu decreases beyond r2", r);
      if (!rising && coupled && m > prev) fail("mu increases on [r2, r3]", r);
    }
    prev = m;
  }
  return rep;
}

nlohmann::json MuProfile::to_json() const {
  nlohmann::json j{{"variant", variant_ == MuVariant::kCowling ? "cowling" : "coupled"},
                   {"r1", params_.r1},
                   {"r2", params_.r2},
                   {"mu_star", params_.mu_star},
                   {"mu_at_r1", (*this)(params_.r1)},
                   {"mu_at_r2", (*this)(params_.r2)}};
  if (variant_ == MuVariant::kCoupled) {
    j["r3"] = params_.r3;
    j["mu_r2"] = params_.mu_r2;
    j["mu_at_r3"] = (*this)(params_.r3);
  }
  return j;
}

// Sector check ---------------------------------------------------------------------

nlohmann::json SectorReport::to_json() const {
  return {{"worst_margin", worst_margin}, {"worst_at", vec_json(worst_at)}, {"theta", theta},
          {"tau", tau},                   {"n_points", n_points},            {"pass", pass}};
}

SectorReport pointwise_sector_check(const BackgroundModel& model, const MuProfile& mu, double theta,
                                    double tau, const SamplingSpec& sampling,
                                    const NumericalRangeOptions& options) {
  if (!(theta + tau < kHalfPi)) throw DomainError("precondition theta + tau < pi/2 violated");
  if (theta < 0.0 || tau < 0.0) throw DomainError("theta and tau must be non-negative");
  const double w = model.omega();
  if (w == 0.0) throw DomainError("sector check requires omega != 0");
  const double s = sign_of(w);
  const double r_hi = sampling_radius(model, sampling);
  std::vector<Vec3> pts = ball_samples(0.0, r_hi, sampling.n_radial, sampling.n_directions, true);
  try {
    (void)pointwise_coefficients(model, Vec3::Zero());
  } catch (const DomainError&) {
    pts.erase(pts.begin());
  }
  const NumericalRangeSampler sampler(options);
  SectorReport rep;
  rep.theta = theta;
  rep.tau = tau;
  rep.n_points = pts.size();
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& x : pts) {
    const CoefficientSample c = pointwise_coefficients(model, x);
    const CMat3 m = c.m2 + kI * w * c.gamma * CMat3::Identity();
    const Complex rot = std::polar(1.0, -(theta + tau + mu(x.norm())) * s);
    const ArgExtrema ext = sampler.args(rot * m);
    const double margin = ext.meets_negative_axis
                              ? -kHalfPi
                              : kHalfPi - std::max(std::abs(ext.sup_arg), std::abs(ext.inf_arg));
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_at = x;
    }
  }
  rep.pass = rep.worst_margin > 0.0;
  return rep;
}

}  // namespace galbrun
