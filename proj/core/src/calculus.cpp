// SPDX-License-Identifier: Apache-2.0
#include "galbrun/calculus.hpp"

#include <algorithm>
#include <cmath>

namespace galbrun {

namespace {

double pw(double x, int n) {
  if (n < 0) return 0.0;
  double out = 1.0;
  for (int k = 0; k < n; ++k) out *= x;
  return out;
}

}  // namespace

// Polynomial3 ------------------------------------------------------------------

Complex Polynomial3::value(const Vec3& x) const {
  Complex s = 0.0;
  for (const auto& t : terms_) s += t.c * (pw(x[0], t.i) * pw(x[1], t.j) * pw(x[2], t.k));
  return s;
}

CVec3 Polynomial3::grad(const Vec3& x) const {
  CVec3 g = CVec3::Zero();
  for (const auto& t : terms_) {
    const double px = pw(x[0], t.i), py = pw(x[1], t.j), pz = pw(x[2], t.k);
    g[0] += t.c * (t.i * pw(x[0], t.i - 1) * py * pz);
    g[1] += t.c * (t.j * px * pw(x[1], t.j - 1) * pz);
    g[2] += t.c * (t.k * px * py * pw(x[2], t.k - 1));
  }
  return g;
}

CMat3 Polynomial3::hess(const Vec3& x) const {
  CMat3 h = CMat3::Zero();
  for (const auto& t : terms_) {
    const int e[3] = {t.i, t.j, t.k};
    for (int a = 0; a < 3; ++a) {
      for (int b = a; b < 3; ++b) {
        double prod = 1.0;
        for (int d = 0; d < 3; ++d) {
          int n = e[d];
          double coeff = 1.0;
          if (d == a) {
            coeff *= n;
            --n;
          }
          if (d == b) {
            coeff *= n;
            --n;
          }
          prod *= coeff * pw(x[d], n);
        }
        h(a, b) += t.c * prod;
      }
    }
  }
  h(1, 0) = h(0, 1);
  h(2, 0) = h(0, 2);
  h(2, 1) = h(1, 2);
  return h;
}

Complex Polynomial3::laplacian(const Vec3& x) const {
  Complex s = 0.0;
  for (const auto& t : terms_) {
    const double px = pw(x[0], t.i), py = pw(x[1], t.j), pz = pw(x[2], t.k);
    const double lap = t.i * (t.i - 1) * pw(x[0], t.i - 2) * py * pz +
                       t.j * (t.j - 1) * px * pw(x[1], t.j - 2) * pz +
                       t.k * (t.k - 1) * px * py * pw(x[2], t.k - 2);
    s += t.c * lap;
  }
  return s;
}

int Polynomial3::degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.i + t.j + t.k);
  return d;
}

// RadialBump -------------------------------------------------------------------

std::array<double, 3> RadialBump::g_jet(double s) {
  const double w = 1.0 / (1.0 - s);
  const double g = std::exp(-w);
  return {g, -g * w * w, g * (w * w * w * w - 2.0 * w * w * w)};
}

std::array<double, 4> RadialBump::radial_parts(double r) const {
  const double a = support_.is_ball() ? -support_.b : support_.a;
  const double b = support_.b;
  const double tr = 2.0 / (b - a);
  const double t = (2.0 * r - (a + b)) / (b - a);
  if (!(std::abs(t) < 1.0)) return {0.0, 0.0, 0.0, 0.0};
  const auto g = g_jet(t * t);
  const double d1 = g[1] * 2.0 * t * tr;
  const double d2 = (g[2] * 4.0 * t * t + 2.0 * g[1]) * tr * tr;
  double d1_over_r = 0.0;
  if (support_.is_ball()) {
    d1_over_r = 2.0 * g[1] / (b * b);
  } else {
    d1_over_r = d1 / r;
  }
  return {g[0], d1, d2, d1_over_r};
}

std::array<double, 3> RadialBump::jet(double r) const {
  const auto p = radial_parts(r);
  return {p[0], p[1], p[2]};
}

double RadialBump::value(const Vec3& x) const { return radial_parts(x.norm())[0]; }

Vec3 RadialBump::grad(const Vec3& x) const { return radial_parts(x.norm())[3] * x; }

Mat3 RadialBump::hess(const Vec3& x) const {
  const double r = x.norm();
  const auto p = radial_parts(r);
  Mat3 h = p[3] * Mat3::Identity();
  if (r > 0.0) {
    const Vec3 n = x / r;
    h += (p[2] - p[3]) * (n * n.transpose());
  }
  return h;
}

double RadialBump::laplacian(const Vec3& x) const {
  const auto p = radial_parts(x.norm());
  return p[2] + 2.0 * p[3];
}

// ScalarTestField ----------------------------------------------------------------

Complex ScalarTestField::value(const Vec3& x) const {
  if (is_zero()) return 0.0;
  const double b = bump_.value(x);
  return b == 0.0 ? Complex(0.0) : poly_.value(x) * b;
}

CVec3 ScalarTestField::grad(const Vec3& x) const {
  if (is_zero()) return CVec3::Zero();
  const double b = bump_.value(x);
  if (b == 0.0) return CVec3::Zero();
  return b * poly_.grad(x) + poly_.value(x) * bump_.grad(x).cast<Complex>();
}

CMat3 ScalarTestField::hess(const Vec3& x) const {
  if (is_zero()) return CMat3::Zero();
  const double b = bump_.value(x);
  if (b == 0.0) return CMat3::Zero();
  const CVec3 gp = poly_.grad(x);
  const CVec3 gb = bump_.grad(x).cast<Complex>();
  return b * poly_.hess(x) + gp * gb.transpose() + gb * gp.transpose() +
         poly_.value(x) * bump_.hess(x).cast<Complex>();
}

Complex ScalarTestField::laplacian(const Vec3& x) const {
  if (is_zero()) return 0.0;
  const double b = bump_.value(x);
  if (b == 0.0) return 0.0;
  const CVec3 gb = bump_.grad(x).cast<Complex>();
  return b * poly_.laplacian(x) + 2.0 * (poly_.grad(x).transpose() * gb)(0, 0) +
         poly_.value(x) * bump_.laplacian(x);
}

ScalarTestField ScalarTestField::scaled(Complex a) const {
  std::vector<Polynomial3::Term> terms = poly_.terms();
  for (auto& t : terms) t.c *= a;
  return {Polynomial3(std::move(terms)), bump_.support()};
}

// VectorTestField ----------------------------------------------------------------

bool VectorTestField::is_zero() const {
  return polys_[0].is_zero() && polys_[1].is_zero() && polys_[2].is_zero();
}

CVec3 VectorTestField::value(const Vec3& x) const {
  const double b = bump_.value(x);
  if (b == 0.0 || is_zero()) return CVec3::Zero();
  return b * CVec3(polys_[0].value(x), polys_[1].value(x), polys_[2].value(x));
}

CMat3 VectorTestField::jacobian(const Vec3& x) const {
  const double b = bump_.value(x);
  if (b == 0.0 || is_zero()) return CMat3::Zero();
  const CVec3 gb = bump_.grad(x).cast<Complex>();
  CMat3 j;
  for (int i = 0; i < 3; ++i) {
    j.row(i) = (b * polys_[static_cast<std::size_t>(i)].grad(x) +
                polys_[static_cast<std::size_t>(i)].value(x) * gb)
                   .transpose();
  }
  return j;
}

Complex VectorTestField::div(const Vec3& x) const { return jacobian(x).trace(); }

CVec3 VectorTestField::curl(const Vec3& x) const {
  const CMat3 j = jacobian(x);
  return {j(2, 1) - j(1, 2), j(0, 2) - j(2, 0), j(1, 0) - j(0, 1)};
}

CMat3 VectorTestField::hess(int component, const Vec3& x) const {
  return ScalarTestField(polys_.at(static_cast<std::size_t>(component)), bump_.support()).hess(x);
}

VectorTestField VectorTestField::scaled(Complex a) const {
  std::array<Polynomial3, 3> p;
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<Polynomial3::Term> terms = polys_[i].terms();
    for (auto& t : terms) t.c *= a;
    p[i] = Polynomial3(std::move(terms));
  }
  return {std::move(p), bump_.support()};
}

DirectionalDerivative directional_derivative(const VectorTestField& u,
                                             std::function<Vec3(const Vec3&)> flow) {
  return DirectionalDerivative(u, std::move(flow));
}

namespace {

Polynomial3 random_polynomial(std::mt19937_64& rng, int degree) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Polynomial3::Term> terms;
  for (int d = 0; d <= degree; ++d) {
    for (int i = d; i >= 0; --i) {
      for (int j = d - i; j >= 0; --j) {
        const int k = d - i - j;
        const double re = dist(rng);
        const double im = dist(rng);
        terms.push_back({Complex(re, im), i, j, k});
      }
    }
  }
  return Polynomial3(std::move(terms));
}

}  // namespace

ScalarTestField random_scalar_field(std::mt19937_64& rng, Support s, int degree) {
  return {random_polynomial(rng, degree), s};
}

VectorTestField random_vector_field(std::mt19937_64& rng, Support s, int degree) {
  std::array<Polynomial3, 3> p;
  for (auto& q : p) q = random_polynomial(rng, degree);
  return {std::move(p), s};
}

// Quadrature ---------------------------------------------------------------------

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw DomainError("Gauss-Legendre rule needs at least one point");
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    nodes[lo] = -x;
    nodes[hi] = x;
    weights[lo] = w;
    weights[hi] = w;
  }
  if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)] = 0.0;
}

namespace {

void angular_rule(const QuadratureOrder& order, std::vector<Vec3>& dirs, std::vector<double>& w) {
  if (order.polar < 1 || order.azimuthal < 1) throw DomainError("angular rule needs points");
  std::vector<double> mu, wm;
  gauss_legendre(order.polar, mu, wm);
  const double dphi = 2.0 * kPi / order.azimuthal;
  dirs.clear();
  w.clear();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double st = std::sqrt(std::max(0.0, 1.0 - mu[i] * mu[i]));
    for (int k = 0; k < order.azimuthal; ++k) {
      const double ph = dphi * (k + 0.5);
      dirs.emplace_back(st * std::cos(ph), st * std::sin(ph), mu[i]);
      w.push_back(wm[i] * dphi);
    }
  }
}

}  // namespace

QuadratureRule QuadratureRule::shell(double a, double b, const QuadratureOrder& order,
                                     const std::vector<double>& breaks) {
  if (!(b > a) || a < 0.0) throw DomainError("shell rule needs 0 <= a < b");
  std::vector<double> cuts{a};
  std::vector<double> sorted = breaks;
  std::sort(sorted.begin(), sorted.end());
  for (double c : sorted) {
    if (c > a && c < b && c > cuts.back()) cuts.push_back(c);
  }
  cuts.push_back(b);
  std::vector<double> xi, wi;
  gauss_legendre(order.radial, xi, wi);
  QuadratureRule rule;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double mid = 0.5 * (cuts[p] + cuts[p + 1]);
    const double half = 0.5 * (cuts[p + 1] - cuts[p]);
    for (std::size_t k = 0; k < xi.size(); ++k) {
      const double r = mid + half * xi[k];
      rule.radial_.push_back({r, half * wi[k] * r * r});
    }
  }
  angular_rule(order, rule.directions_, rule.direction_weights_);
  return rule;
}

QuadratureRule QuadratureRule::sphere(double radius, const QuadratureOrder& order) {
  if (!(radius > 0.0)) throw DomainError("sphere rule needs a positive radius");
  QuadratureRule rule;
  rule.radial_.push_back({radius, radius * radius});
  angular_rule(order, rule.directions_, rule.direction_weights_);
  return rule;
}

Complex integrate(const QuadratureRule& rule, const std::function<Complex(const Vec3&)>& integrand) {
  ComplexSum total;
  const auto& dirs = rule.directions();
  const auto& dw = rule.direction_weights();
  for (const auto& rad : rule.radial()) {
    ComplexSum shell;
    for (std::size_t k = 0; k < dirs.size(); ++k) shell.add(dw[k] * integrand(rad.r * dirs[k]));
    total.add(rad.w * shell.value());
  }
  return total.value();
}

}  // namespace galbrun
