// SPDX-License-Identifier: Apache-2.0
#include "galbrun/forms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

namespace galbrun {

namespace {

Complex ip(const CVec3& a, const CVec3& b) {
  if constexpr (kConjugateSecondArgument == 1) {
    return pair(a, b);
  } else {
    return pair(b, a);
  }
}

Complex ip(Complex a, Complex b) {
  if constexpr (kConjugateSecondArgument == 1) {
    return a * std::conj(b);
  } else {
    return std::conj(a) * b;
  }
}

struct Interval {
  double lo = 0.0;
  double hi = -1.0;
  bool empty() const { return !(hi > lo); }
};

Interval hull(std::initializer_list<std::optional<Support>> supports) {
  Interval out;
  bool any = false;
  for (const auto& s : supports) {
    if (!s) continue;
    if (!any) {
      out = {s->inner(), s->outer()};
      any = true;
    } else {
      out.lo = std::min(out.lo, s->inner());
      out.hi = std::max(out.hi, s->outer());
    }
  }
  return any ? out : Interval{};
}

Interval intersect(Interval a, Interval b) {
  if (a.empty() || b.empty()) return {};
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

std::optional<Support> support_of(const VectorTestField& u) {
  return u.is_zero() ? std::nullopt : std::optional<Support>(u.support());
}
std::optional<Support> support_of(const ScalarTestField& f) {
  return f.is_zero() ? std::nullopt : std::optional<Support>(f.support());
}

void require_inside(const FormContext& ctx, std::initializer_list<std::optional<Support>> supports) {
  for (const auto& s : supports) {
    if (s && s->outer() > ctx.r_out()) {
      throw DomainError("test-field support exceeds the quadrature domain (r_out)");
    }
  }
}

std::vector<double> breaks_for(const FormContext& ctx,
                               std::initializer_list<std::optional<Support>> supports) {
  const auto& m = ctx.model();
  std::vector<double> br{m.radii().r1, m.radii().r2};
  if (!m.flow_is_zero()) br.push_back(m.flow_spec().radius);
  for (const auto& s : supports) {
    if (!s) continue;
    br.push_back(s->inner());
    br.push_back(s->outer());
  }
  return br;
}

template <std::size_t N, typename F>
std::array<Complex, N> integrate_terms(const FormContext& ctx, Interval iv,
                                       const std::vector<double>& breaks, F&& f) {
  std::array<Complex, N> out{};
  if (iv.empty()) return out;
  const QuadratureRule rule = QuadratureRule::shell(iv.lo, iv.hi, ctx.order(), breaks);
  std::array<ComplexSum, N> total;
  const auto& dirs = rule.directions();
  const auto& dw = rule.direction_weights();
  for (const auto& rad : rule.radial()) {
    std::array<ComplexSum, N> shell;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      const std::array<Complex, N> v = f(Vec3(rad.r * dirs[k]), rad.r);
      for (std::size_t i = 0; i < N; ++i) shell[i].add(dw[k] * v[i]);
    }
    for (std::size_t i = 0; i < N; ++i) total[i].add(rad.w * shell[i].value());
  }
  for (std::size_t i = 0; i < N; ++i) out[i] = total[i].value();
  return out;
}

struct PointFields {
  CVec3 u;
  Complex div;
  CVec3 Lu;  // (w + i d_b + i Omega x) u
  CVec3 grad_psi;
};

PointFields point_fields(const BackgroundModel& m, const FieldPair& f, const Vec3& x,
                         const Vec3& b) {
  PointFields p;
  const CMat3 J = f.u.jacobian(x);
  p.u = f.u.value(x);
  p.div = J.trace();
  // Eigen's cross() conjugates complex results; spell out Omega x u.
  const Vec3& o = m.rotation();
  const CVec3 omega_cross_u(o[1] * p.u[2] - o[2] * p.u[1], o[2] * p.u[0] - o[0] * p.u[2],
                            o[0] * p.u[1] - o[1] * p.u[0]);
  p.Lu = m.omega() * p.u + kI * (J * b.cast<Complex>()) + kI * omega_cross_u;
  p.grad_psi = f.psi.grad(x);
  return p;
}

enum class Representation { kOriginal, kReformulated };

FormTerms eval_impl(const FormContext& ctx, const FieldPair& a, const FieldPair& b,
                    Representation rep, std::optional<double> r_cap = std::nullopt) {
  const auto sa_u = support_of(a.u), sa_p = support_of(a.psi);
  const auto sb_u = support_of(b.u), sb_p = support_of(b.psi);
  require_inside(ctx, {sa_u, sa_p, sb_u, sb_p});
  Interval iv = intersect(hull({sa_u, sa_p}), hull({sb_u, sb_p}));
  if (r_cap) iv.hi = std::min(iv.hi, *r_cap);
  const auto& m = ctx.model();
  const double w = m.omega();
  const double inv4piG = 1.0 / (4.0 * kPi * m.G());
  const bool has_flow = !m.flow_is_zero();
  auto vals = integrate_terms<9>(ctx, iv, breaks_for(ctx, {sa_u, sa_p, sb_u, sb_p}),
                                 [&](const Vec3& x, double) {
    const CoefficientSample c = pointwise_coefficients(m, x);
    const Vec3 bf = has_flow ? m.flow(x).b : Vec3::Zero();
    const PointFields fa = point_fields(m, a, x, bf);
    const PointFields fb = point_fields(m, b, x, bf);
    const double rho = c.rho;
    const double cs2 = c.cs * c.cs;
    std::array<Complex, 9> t{};
    if (rep == Representation::kOriginal) {
      const CVec3 gp = c.grad_p.cast<Complex>();
      t[0] = rho * cs2 * ip(fa.div, fb.div);
      t[1] = ip(gp.dot(fa.u), fb.div) + ip(fa.div, gp.dot(fb.u));
      const CMat3 h = (c.hess_p - rho * c.hess_phi).cast<Complex>();
      t[2] = ip(CVec3(h * fa.u), fb.u);
    } else {
      const CVec3 q = c.q.cast<Complex>();
      const Complex da = fa.div + q.dot(fa.u);
      const Complex db = fb.div + q.dot(fb.u);
      t[3] = rho * cs2 * ip(da, db);
      t[4] = -rho * ip(CVec3(c.m1.cast<Complex>() * fa.u), fb.u);
    }
    t[5] = -rho * ip(fa.Lu, fb.Lu);
    t[6] = -kI * w * c.gamma * rho * ip(fa.u, fb.u);
    t[7] = -rho * ip(fa.grad_psi, fb.u) - rho * ip(fa.u, fb.grad_psi);
    t[8] = inv4piG * ip(fa.grad_psi, fb.grad_psi);
    return t;
  });
  FormTerms out;
  out.acoustic = vals[0];
  out.pressure_cross = vals[1];
  out.hessian = vals[2];
  out.acoustic_q = vals[3];
  out.m1_term = vals[4];
  out.kinetic = vals[5];
  out.damping = vals[6];
  out.gravity_coupling = vals[7];
  out.gravity_self = vals[8];
  return out;
}

}  // namespace

FormContext::FormContext(BackgroundModel model, double r_out, QuadratureOrder order)
    : model_(std::move(model)), r_out_(r_out), order_(order) {
  if (!(r_out_ > model_.radii().r2)) throw DomainError("r_out must exceed r2");
  if (model_.min_radius() > 0.0 || model_.max_radius() < r_out_) {
    throw DomainError("model profiles are not defined on [0, r_out]");
  }
}

Complex FormTerms::total() const {
  ComplexSum s;
  for (Complex v : {acoustic, pressure_cross, hessian, acoustic_q, m1_term, kinetic, damping,
                    gravity_coupling, gravity_self}) {
    s.add(v);
  }
  return s.value();
}

nlohmann::json FormTerms::to_json() const {
  auto c = [](Complex z) { return nlohmann::json::array({z.real(), z.imag()}); };
  return {{"acoustic", c(acoustic)},
          {"pressure_cross", c(pressure_cross)},
          {"hessian", c(hessian)},
          {"acoustic_q", c(acoustic_q)},
          {"m1_term", c(m1_term)},
          {"kinetic", c(kinetic)},
          {"damping", c(damping)},
          {"gravity_coupling", c(gravity_coupling)},
          {"gravity_self", c(gravity_self)},
          {"total", c(total())}};
}

FormTerms eval_a(const FormContext& ctx, const FieldPair& a, const FieldPair& b) {
  return eval_impl(ctx, a, b, Representation::kOriginal);
}

FormTerms eval_a_reform(const FormContext& ctx, const FieldPair& a, const FieldPair& b) {
  return eval_impl(ctx, a, b, Representation::kReformulated);
}

FormTerms eval_a_cow(const FormContext& ctx, const VectorTestField& u, const VectorTestField& u2) {
  return eval_a(ctx, {u, ScalarTestField::zero()}, {u2, ScalarTestField::zero()});
}

CoupledFormTerms eval_a_cp(const FormContext& ctx, const CoupledPair& a, const CoupledPair& b) {
  const auto& m = ctx.model();
  const double r2 = m.radii().r2;
  require_inside(ctx, {support_of(a.u), support_of(b.u)});
  CoupledFormTerms out;
  out.interior = eval_impl(ctx, {a.u, ScalarTestField::zero()}, {b.u, ScalarTestField::zero()},
                           Representation::kReformulated, r2);

  // Surface terms on |x| = r2 with outward normal x / r2.
  const QuadratureRule surface = QuadratureRule::sphere(r2, ctx.order());
  out.coupling = integrate(surface, [&](const Vec3& x) {
    const CVec3 nu = (x / r2).cast<Complex>();
    const Complex nu_u = nu.dot(a.u.value(x));
    const Complex nu_u2 = nu.dot(b.u.value(x));
    return ip(nu_u, b.v.value(x)) + ip(a.v.value(x), nu_u2);
  });

  const auto sa = support_of(a.v), sb = support_of(b.v);
  require_inside(ctx, {sa, sb});
  Interval iv = intersect(hull({sa}), hull({sb}));
  iv.lo = std::max(iv.lo, r2);
  double last_r = r2;
  double last_eta = 0.0;
  const double w = m.omega();
  auto vals = integrate_terms<2>(ctx, iv, breaks_for(ctx, {sa, sb}), [&](const Vec3& x, double r) {
    if (r != last_r) {
      last_eta += integrate_q(m, last_r, r);
      last_r = r;
    }
    const CoefficientSample c = pointwise_coefficients(m, x);
    const double e2 = std::exp(2.0 * last_eta);
    const CMat3 Mx = c.m2 + kI * w * c.gamma * CMat3::Identity();
    const CMat3 N = Mx.inverse();
    const CVec3 ga = a.v.grad(x);
    const CVec3 gb = b.v.grad(x);
    std::array<Complex, 2> t{};
    t[0] = (e2 / c.rho) * ip(CVec3(N * ga), gb);
    t[1] = -(e2 / (c.cs * c.cs * c.rho)) * ip(a.v.value(x), b.v.value(x));
    return t;
  });
  out.exterior_grad = vals[0];
  out.exterior_mass = vals[1];
  return out;
}

AtmosphereNorms atmosphere_norms(const FormContext& ctx, const VectorTestField& u) {
  const auto s = support_of(u);
  require_inside(ctx, {s});
  const auto& m = ctx.model();
  auto vals = integrate_terms<2>(ctx, hull({s}), breaks_for(ctx, {s}), [&](const Vec3& x, double) {
    const CoefficientSample c = pointwise_coefficients(m, x);
    const CVec3 v = u.value(x);
    const Complex d = u.div(x) + c.q.cast<Complex>().dot(v);
    return std::array<Complex, 2>{c.rho * c.cs * c.cs * std::norm(d), c.rho * v.squaredNorm()};
  });
  return {vals[0].real(), vals[1].real()};
}

double gamma_norm_sq(const FormContext& ctx, const VectorTestField& u) {
  const auto s = support_of(u);
  require_inside(ctx, {s});
  const auto& m = ctx.model();
  auto vals = integrate_terms<1>(ctx, hull({s}), breaks_for(ctx, {s}), [&](const Vec3& x, double r) {
    return std::array<Complex, 1>{m.rho()(r) * m.gamma()(r) * u.value(x).squaredNorm()};
  });
  return vals[0].real();
}

nlohmann::json IdentityReport::to_json() const {
  auto c = [](Complex z) { return nlohmann::json::array({z.real(), z.imag()}); };
  nlohmann::json j = {{"identity", identity}, {"lhs", c(lhs)},         {"rhs", c(rhs)},
                      {"abs_err", abs_err},   {"rel_err", rel_err},    {"pass", pass},
                      {"scale", scale},       {"tolerance", tolerance}, {"skipped", skipped},
                      {"flags", flags}};
  if (!extra.empty()) j["details"] = extra;
  return j;
}

IdentityReport compare_values(const std::string& identity, Complex lhs, Complex rhs, double scale,
                              IdentityTolerance tol) {
  IdentityReport r;
  r.identity = identity;
  r.lhs = lhs;
  r.rhs = rhs;
  r.abs_err = std::abs(lhs - rhs);
  r.scale = scale;
  r.rel_err = scale > 0.0 ? r.abs_err / scale : (r.abs_err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  r.tolerance = tol.rel;
  r.pass = r.abs_err <= std::max(tol.rel * scale, tol.abs_floor);
  return r;
}

IdentityReport check_reformulation(const FormContext& ctx, const FieldPair& a, const FieldPair& b,
                                   IdentityTolerance tol) {
  const Complex lhs = eval_a(ctx, a, b).total();
  const Complex rhs = eval_a_reform(ctx, a, b).total();
  return compare_values("eval_a == eval_a_reform", lhs, rhs, std::abs(lhs), tol);
}

IdentityReport check_identity_imaginary(const FormContext& ctx, const VectorTestField& u,
                                        const ScalarTestField& psi, IdentityTolerance tol) {
  const FieldPair f{u, psi};
  const FormTerms t = eval_a(ctx, f, f);
  const double w = ctx.model().omega();
  const double g = u.is_zero() ? 0.0 : gamma_norm_sq(ctx, u);
  IdentityReport r = compare_values("Im a((u,psi),(u,psi)) == -omega <gamma u, u>",
                                    Complex(t.total().imag(), 0.0), Complex(-w * g, 0.0),
                                    std::abs(w) * g, tol);
  const double im_kinetic = t.kinetic.imag();
  const double im_gravity = t.gravity_coupling.imag() + t.gravity_self.imag();
  const double real_scale = std::max({std::abs(t.kinetic), std::abs(t.gravity_coupling),
                                      std::abs(t.gravity_self), std::abs(w) * g});
  const double real_tol = std::max(tol.rel * real_scale, tol.abs_floor);
  r.extra = {{"im_kinetic", im_kinetic},
             {"im_gravity", im_gravity},
             {"gamma_norm_sq", g},
             {"sign_convention", "Im a = -omega <gamma u, u>"}};
  if (std::abs(im_kinetic) > real_tol) {
    r.pass = false;
    r.flags.push_back("kinetic term not real");
  }
  if (std::abs(im_gravity) > real_tol) {
    r.pass = false;
    r.flags.push_back("gravity terms not real");
  }
  if (w == 0.0) r.flags.push_back("omega != 0 required");
  return r;
}

IdentityReport check_flow_symmetry(const FormContext& ctx, const VectorTestField& u,
                                   const VectorTestField& u2, IdentityTolerance tol) {
  const auto& m = ctx.model();
  const auto s1 = support_of(u), s2 = support_of(u2);
  require_inside(ctx, {s1, s2});
  Interval iv = intersect(hull({s1}), hull({s2}));
  if (!m.flow_is_zero()) iv.hi = std::min(iv.hi, m.flow_spec().radius);
  // lhs, rhs, |lhs integrand|, |rhs integrand|, -i div(rho b) u.u', max |div(rho b)|
  double max_div = 0.0;
  double max_rho_b = 0.0;
  auto vals = integrate_terms<5>(ctx, iv, breaks_for(ctx, {s1, s2}), [&](const Vec3& x, double r) {
    const FlowSample fs = m.flow(x);
    const double rho = m.rho()(r);
    const CVec3 b = fs.b.cast<Complex>();
    const CVec3 v1 = u.value(x), v2 = u2.value(x);
    const CVec3 db1 = kI * (u.jacobian(x) * b);
    const CVec3 db2 = kI * (u2.jacobian(x) * b);
    const double dv = m.momentum_divergence(x);
    max_div = std::max(max_div, std::abs(dv));
    max_rho_b = std::max(max_rho_b, rho * fs.b.norm());
    return std::array<Complex, 5>{rho * ip(db1, v2), rho * ip(v1, db2),
                                  rho * db1.norm() * v2.norm(), rho * v1.norm() * db2.norm(),
                                  -kI * dv * ip(v1, v2)};
  });
  const double scale = vals[2].real() + vals[3].real();
  IdentityReport r = compare_values("<i d_b u, u'> == <u, i d_b u'>", vals[0], vals[1], scale, tol);
  const double div_scale = std::max(max_rho_b, 1e-300) / std::max(m.flow_spec().radius, 1e-300);
  r.extra = {{"max_abs_div_rho_b", max_div},
             {"predicted_violation", nlohmann::json::array({vals[4].real(), vals[4].imag()})}};
  if (max_div > 1e-10 * std::max(1.0, div_scale)) {
    r.skipped = true;
    r.pass = false;
    r.flags.push_back("configured flow violates div(rho b) = 0");
  }
  return r;
}

nlohmann::json CoercivityReport::to_json() const {
  return {{"zero_field", zero_field},
          {"a", nlohmann::json::array({a_value.real(), a_value.imag()})},
          {"div_q_norm_sq", norms.div_q_sq},
          {"l2_norm_sq", norms.l2_sq},
          {"best_beta", best_beta},
          {"margin", margin}};
}

CoercivityReport check_atmosphere_coercivity(const FormContext& ctx, const VectorTestField& u,
                                             const std::vector<double>& angle_grid) {
  CoercivityReport rep;
  if (u.is_zero()) {
    rep.zero_field = true;
    return rep;
  }
  const double r2 = ctx.model().radii().r2;
  if (u.support().inner() < r2 * (1.0 - 1e-14)) {
    throw DomainError("atmosphere coercivity requires supp u within |x| >= r2");
  }
  rep.a_value = eval_a_cow(ctx, u, u).total();
  rep.norms = atmosphere_norms(ctx, u);
  const double denom = rep.norms.div_q_sq + rep.norms.l2_sq;
  if (!(denom > 0.0)) {
    rep.zero_field = true;
    return rep;
  }
  const double s = ctx.model().omega() >= 0.0 ? 1.0 : -1.0;
  rep.margin = -std::numeric_limits<double>::infinity();
  for (double beta : angle_grid) {
    const double v = (std::exp(-kI * (beta * s)) * rep.a_value).real() / denom;
    if (v > rep.margin) {
      rep.margin = v;
      rep.best_beta = beta;
    }
  }
  return rep;
}

std::vector<double> uniform_angle_grid(double lo, double hi, int n) {
  std::vector<double> g;
  if (n <= 1) return {0.5 * (lo + hi)};
  g.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) g.push_back(lo + (hi - lo) * k / (n - 1));
  return g;
}

}  // namespace galbrun
