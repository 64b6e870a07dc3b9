// SPDX-License-Identifier: Apache-2.0
#include "galbrun/background.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace galbrun {

namespace {

Mat3 cross_matrix(const Vec3& a) {
  Mat3 k;
  k << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
  return k;
}

Vec3 unit_or_z(const Vec3& x, double r) { return r > 0.0 ? Vec3(x / r) : Vec3::UnitZ(); }

// Unit vector orthogonal to n, built from the coordinate axis least aligned with n.
Vec3 tangent_of(const Vec3& n) {
  Eigen::Index k = 0;
  n.cwiseAbs().minCoeff(&k);
  Vec3 e = Vec3::Zero();
  e[k] = 1.0;
  return n.cross(e).normalized();
}

// Flow envelope s(r) and s'(r).
std::pair<double, double> flow_envelope(const FlowSpec& f, double r) {
  if (f.kind == FlowSpec::Kind::kNone || r >= f.radius) return {0.0, 0.0};
  const double u = r * r / (f.radius * f.radius);
  const double s = f.amplitude * std::exp(1.0 - 1.0 / (1.0 - u));
  if (s == 0.0) return {0.0, 0.0};  // underflow next to the edge; s' vanishes faster than s
  const double ds_du = -s / ((1.0 - u) * (1.0 - u));
  return {s, ds_du * 2.0 * r / (f.radius * f.radius)};
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ConfigError(std::string("non-finite model parameter: ") + what);
}

}  // namespace

BackgroundModel::BackgroundModel(Profiles profiles, FlowSpec flow, Radii radii, double omega,
                                 Vec3 rotation, double gravitational_constant)
    : profiles_(std::move(profiles)),
      flow_(std::move(flow)),
      radii_(radii),
      omega_(omega),
      rotation_(std::move(rotation)),
      G_(gravitational_constant) {
  check_finite(omega_, "omega");
  check_finite(G_, "G");
  for (int k = 0; k < 3; ++k) check_finite(rotation_[k], "Omega");
  if (!(radii_.r1 > 0.0 && radii_.r1 < radii_.r2 && radii_.r2 < radii_.r3)) {
    std::ostringstream msg;
    msg << "radii unordered: require 0 < r1 < r2 < r3, got r1=" << radii_.r1 << ", r2=" << radii_.r2
        << ", r3=" << radii_.r3;
    throw ConfigError(msg.str());
  }
  if (!(G_ > 0.0)) throw ConfigError("gravitational constant G must be positive");
  if (flow_.kind != FlowSpec::Kind::kNone) {
    if (!(flow_.radius > 0.0) || flow_.radius > radii_.r1) {
      throw ConfigError("flow radius must lie in (0, r1]");
    }
    if (!(flow_.axis.norm() > 0.0)) throw ConfigError("flow axis must be nonzero");
    flow_.axis.normalize();
  }
}

double BackgroundModel::max_radius() const {
  double hi = std::numeric_limits<double>::infinity();
  for (const RadialProfile* p : {&profiles_.rho, &profiles_.cs, &profiles_.p, &profiles_.phi,
                                 &profiles_.gamma}) {
    hi = std::min(hi, p->domain().second);
  }
  return hi;
}

double BackgroundModel::min_radius() const {
  double lo = 0.0;
  for (const RadialProfile* p : {&profiles_.rho, &profiles_.cs, &profiles_.p, &profiles_.phi,
                                 &profiles_.gamma}) {
    lo = std::max(lo, p->domain().first);
  }
  return lo;
}

bool BackgroundModel::has_tabulated_profile() const {
  for (const RadialProfile* p : {&profiles_.rho, &profiles_.cs, &profiles_.p, &profiles_.phi,
                                 &profiles_.gamma}) {
    if (p->kind() == RadialProfile::Kind::kTabulated) return true;
  }
  return false;
}

FlowSample BackgroundModel::flow(const Vec3& x) const {
  FlowSample out;
  const double r = x.norm();
  const auto [s, ds] = flow_envelope(flow_, r);
  if (s == 0.0 && ds == 0.0) return out;
  const auto rho_jet = profiles_.rho.jet(r);
  const double g = s / rho_jet[0];
  const double dg = (ds * rho_jet[0] - s * rho_jet[1]) / (rho_jet[0] * rho_jet[0]);
  const Vec3 grad_g = r > 0.0 ? Vec3(dg * x / r) : Vec3::Zero();
  switch (flow_.kind) {
    case FlowSpec::Kind::kToroidal: {
      const Vec3 ax = flow_.axis.cross(x);
      out.b = g * ax;
      out.jacobian = g * cross_matrix(flow_.axis) + ax * grad_g.transpose();
      break;
    }
    case FlowSpec::Kind::kRadialSource:
      out.b = g * x;
      out.jacobian = g * Mat3::Identity() + x * grad_g.transpose();
      break;
    case FlowSpec::Kind::kNone:
      break;
  }
  return out;
}

double BackgroundModel::momentum_divergence(const Vec3& x) const {
  const FlowSample f = flow(x);
  const double r = x.norm();
  const auto rho_jet = profiles_.rho.jet(r);
  const Vec3 grad_rho = r > 0.0 ? Vec3(rho_jet[1] * x / r) : Vec3::Zero();
  return grad_rho.dot(f.b) + rho_jet[0] * f.jacobian.trace();
}

BackgroundModel BackgroundModel::with_omega(double omega) const {
  BackgroundModel m = *this;
  m.omega_ = omega;
  return m;
}

BackgroundModel BackgroundModel::with_gamma(RadialProfile gamma) const {
  BackgroundModel m = *this;
  m.profiles_.gamma = std::move(gamma);
  return m;
}

BackgroundModel BackgroundModel::with_flow(FlowSpec flow) const {
  return BackgroundModel(profiles_, std::move(flow), radii_, omega_, rotation_, G_);
}

BackgroundModel BackgroundModel::with_G(double G) const {
  return BackgroundModel(profiles_, flow_, radii_, omega_, rotation_, G);
}

Mat3 radial_hessian(double r, double d1, double d2, const Vec3& x) {
  if (r > 0.0) {
    const Vec3 n = x / r;
    const Mat3 nn = n * n.transpose();
    return d2 * nn + (d1 / r) * (Mat3::Identity() - nn);
  }
  if (std::abs(d1) > 1e-12 * (1.0 + std::abs(d2))) {
    throw DomainError("hessian of a radial function with nonzero slope is undefined at the origin");
  }
  return d2 * Mat3::Identity();
}

namespace {

CoefficientSample coefficients_impl(const BackgroundModel& model, const Vec3& x, bool with_eta) {
  CoefficientSample c;
  c.x = x;
  c.r = x.norm();
  const double r = c.r;
  const auto rho = model.rho().jet(r);
  const auto p = model.p().jet(r);
  const auto phi = model.phi().jet(r);
  c.rho = rho[0];
  c.cs = model.cs()(r);
  c.gamma = model.gamma()(r);
  if (!(c.rho > 0.0)) throw DomainError("density is not positive at the evaluation point");
  const Vec3 n = unit_or_z(x, r);
  const Mat3 nn = n * n.transpose();
  const Mat3 tt = Mat3::Identity() - nn;
  c.grad_p = p[1] * n;
  c.q_r = p[1] / (c.cs * c.cs * c.rho);
  c.q = c.q_r * n;

  // At the origin q, hess p and hess phi are defined only for profiles with zero slope there.
  double radial_part = p[2] - c.rho * phi[2] - c.cs * c.cs * c.rho * c.q_r * c.q_r;
  double tangential_part = 0.0;
  if (r > 0.0) {
    c.hess_p = radial_hessian(r, p[1], p[2], x);
    c.hess_phi = radial_hessian(r, phi[1], phi[2], x);
    tangential_part = (p[1] - c.rho * phi[1]) / r;
  } else {
    const double tol = 1e-12 * (1.0 + std::abs(p[2]) + std::abs(c.rho * phi[2]));
    if (std::abs(p[1]) > tol || std::abs(c.rho * phi[1]) > tol) {
      throw DomainError("m1 is undefined at the origin: p or phi has a nonzero slope there");
    }
    c.grad_p = Vec3::Zero();
    c.q_r = 0.0;
    c.q = Vec3::Zero();
    c.hess_p = p[2] * Mat3::Identity();
    c.hess_phi = phi[2] * Mat3::Identity();
    tangential_part = p[2] - c.rho * phi[2];
    radial_part = tangential_part;
  }
  c.m1 = -(radial_part * nn + tangential_part * tt) / c.rho;

  const double w = model.omega();
  CMat3 L = Complex(w, 0.0) * CMat3::Identity() + kI * cross_matrix(model.rotation()).cast<Complex>();
  c.m2 = c.m1.cast<Complex>() + L.adjoint() * L;

  const Vec3 t = tangent_of(n);
  c.m1_rr = n.dot(c.m1 * n);
  c.m1_tt = t.dot(c.m1 * t);
  const CVec3 nc = n.cast<Complex>();
  const CVec3 tc = t.cast<Complex>();
  c.m2_rr = nc.dot(c.m2 * nc).real();
  c.m2_tt = tc.dot(c.m2 * tc).real();
  if (with_eta && r >= model.radii().r2) c.eta = eta(model, r);
  return c;
}

}  // namespace

CoefficientSample derived_coefficients(const BackgroundModel& model, double r) {
  if (r < 0.0) throw DomainError("radius must be non-negative");
  return coefficients_impl(model, Vec3(0.0, 0.0, r), true);
}

CoefficientSample derived_coefficients(const BackgroundModel& model, const Vec3& x) {
  return coefficients_impl(model, x, true);
}

CoefficientSample pointwise_coefficients(const BackgroundModel& model, const Vec3& x) {
  return coefficients_impl(model, x, false);
}

double radial_q(const BackgroundModel& model, double r) {
  const double cs = model.cs()(r);
  return model.p().derivative(r, 1) / (cs * cs * model.rho()(r));
}

RadialCoefficients radial_coefficients(const BackgroundModel& model, double r) {
  if (model.rotation().squaredNorm() != 0.0) {
    throw DomainError("radial reduction requires Omega = 0");
  }
  RadialCoefficients c;
  c.r = r;
  const auto rho = model.rho().jet(r);
  const auto cs = model.cs().jet(r);
  const auto p = model.p().jet(r);
  const auto phi = model.phi().jet(r);
  const auto gamma = model.gamma().jet(r);
  c.rho = rho[0];
  c.drho = rho[1];
  c.cs = cs[0];
  c.dcs = cs[1];
  c.gamma = gamma[0];
  c.dgamma = gamma[1];
  const double cs2 = c.cs * c.cs;
  const double denom = cs2 * c.rho;
  c.q = p[1] / denom;
  c.dq = p[2] / denom - p[1] * (2.0 * c.cs * c.dcs * c.rho + cs2 * c.drho) / (denom * denom);
  c.m1_rr = -p[2] / c.rho + phi[2] + cs2 * c.q * c.q;
  c.dm1_rr = -p[3] / c.rho + p[2] * c.drho / (c.rho * c.rho) + phi[3] +
             2.0 * c.cs * c.dcs * c.q * c.q + 2.0 * cs2 * c.q * c.dq;
  const double w = model.omega();
  c.m2_rr = c.m1_rr + w * w;
  c.M = Complex(c.m2_rr, w * c.gamma);
  c.dM = Complex(c.dm1_rr, w * c.dgamma);
  return c;
}

double integrate_q(const BackgroundModel& model, double a, double b) {
  if (b == a) return 0.0;
  if (b < a) return -integrate_q(model, b, a);
  auto f = [&model](double r) {
    const double v = radial_q(model, r);
    if (!std::isfinite(v)) throw DomainError("q_r evaluation failed inside the eta integral");
    return v;
  };
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 20, 1e-10, &error);
}

double eta(const BackgroundModel& model, double r) {
  const double r2 = model.radii().r2;
  if (r < r2) throw DomainError("eta is defined for r >= r2 only");
  return integrate_q(model, r2, r);
}

}  // namespace galbrun
