// SPDX-License-Identifier: Apache-2.0
/// @file calculus.hpp
/// @brief Closed-form compactly supported test fields and product quadrature on balls and shells.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "galbrun/types.hpp"

namespace galbrun {

/// Radial interval [a, b] carrying the bump. a <= 0 means the ball B_b.
struct Support {
  double a = 0.0;
  double b = 1.0;

  static Support ball(double radius) { return {0.0, radius}; }
  static Support annulus(double inner, double outer) { return {inner, outer}; }
  bool is_ball() const { return a <= 0.0; }
  double inner() const { return is_ball() ? 0.0 : a; }
  double outer() const { return b; }
};

/// Complex polynomial in (x, y, z) stored as monomials.
class Polynomial3 {
 public:
  struct Term {
    Complex c;
    int i, j, k;
  };

  Polynomial3() = default;
  explicit Polynomial3(std::vector<Term> terms) : terms_(std::move(terms)) {}
  static Polynomial3 constant(Complex c) { return Polynomial3({{c, 0, 0, 0}}); }

  Complex value(const Vec3& x) const;
  CVec3 grad(const Vec3& x) const;
  CMat3 hess(const Vec3& x) const;
  Complex laplacian(const Vec3& x) const;
  const std::vector<Term>& terms() const { return terms_; }
  int degree() const;
  bool is_zero() const { return terms_.empty(); }

 private:
  std::vector<Term> terms_;
};

/// C-infinity bump B(r) = exp(-1/(1 - t^2)), t = (2r - (a+b))/(b - a); the ball uses t = r/b.
class RadialBump {
 public:
  explicit RadialBump(Support s) : support_(s) {}
  const Support& support() const { return support_; }

  /// (B, B', B'') in r; zero outside the open support.
  std::array<double, 3> jet(double r) const;
  double value(const Vec3& x) const;
  Vec3 grad(const Vec3& x) const;
  Mat3 hess(const Vec3& x) const;
  double laplacian(const Vec3& x) const;

 private:
  // G(s) = exp(-1/(1-s)) with s = t^2; returns (G, G', G'') in s.
  static std::array<double, 3> g_jet(double s);
  // (B, B', B'', B'/r); the ball case evaluates B'/r without dividing by r.
  std::array<double, 4> radial_parts(double r) const;
  Support support_;
};

/// Scalar field P(x) B(|x|).
class ScalarTestField {
 public:
  ScalarTestField() : bump_(Support::ball(1.0)) {}
  ScalarTestField(Polynomial3 p, Support s) : poly_(std::move(p)), bump_(s) {}
  static ScalarTestField zero() { return {}; }

  Complex value(const Vec3& x) const;
  CVec3 grad(const Vec3& x) const;
  CMat3 hess(const Vec3& x) const;
  /// Laplacian from P, B separately (independent of hess).
  Complex laplacian(const Vec3& x) const;

  bool is_zero() const { return poly_.is_zero(); }
  const Support& support() const { return bump_.support(); }
  const Polynomial3& polynomial() const { return poly_; }
  ScalarTestField scaled(Complex a) const;

 private:
  Polynomial3 poly_;
  RadialBump bump_;
};

/// Vector field (P_1, P_2, P_3)(x) B(|x|) with one shared bump.
class VectorTestField {
 public:
  VectorTestField() : bump_(Support::ball(1.0)) {}
  VectorTestField(std::array<Polynomial3, 3> p, Support s) : polys_(std::move(p)), bump_(s) {}
  static VectorTestField zero() { return {}; }

  CVec3 value(const Vec3& x) const;
  /// J_ij = d u_i / d x_j
  CMat3 jacobian(const Vec3& x) const;
  Complex div(const Vec3& x) const;
  CVec3 curl(const Vec3& x) const;
  /// Hessian of component i.
  CMat3 hess(int component, const Vec3& x) const;

  bool is_zero() const;
  const Support& support() const { return bump_.support(); }
  const std::array<Polynomial3, 3>& polynomials() const { return polys_; }
  VectorTestField scaled(Complex a) const;

 private:
  std::array<Polynomial3, 3> polys_;
  RadialBump bump_;
};

/// Evaluator for (b . grad) u applied componentwise.
class DirectionalDerivative {
 public:
  DirectionalDerivative(VectorTestField u, std::function<Vec3(const Vec3&)> flow)
      : u_(std::move(u)), flow_(std::move(flow)) {}
  CVec3 operator()(const Vec3& x) const { return u_.jacobian(x) * flow_(x).cast<Complex>(); }

 private:
  VectorTestField u_;
  std::function<Vec3(const Vec3&)> flow_;
};

DirectionalDerivative directional_derivative(const VectorTestField& u,
                                             std::function<Vec3(const Vec3&)> flow);

/// Random polynomial-times-bump fields with coefficients of unit order.
ScalarTestField random_scalar_field(std::mt19937_64& rng, Support s, int degree);
VectorTestField random_vector_field(std::mt19937_64& rng, Support s, int degree);

// Quadrature -------------------------------------------------------------------

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Defaults keep order doubling below 1e-9 relative on bump integrands and integrate
/// spherical polynomials up to degree 23 exactly.
struct QuadratureOrder {
  int radial = 64;     // Gauss points per radial piece
  int polar = 12;      // Gauss points in cos(theta)
  int azimuthal = 24;  // trapezoid points in phi
};

/// Product rule: radial Gauss on each piece of a shell x Gauss(cos theta) x trapezoid(phi).
/// Nodes are grouped by radius; directions are shared across radii.
class QuadratureRule {
 public:
  struct Radial {
    double r;
    double w;  // includes r^2
  };

  /// Shell a <= r <= b, split at every break point strictly inside (a, b).
  static QuadratureRule shell(double a, double b, const QuadratureOrder& order,
                              const std::vector<double>& breaks = {});
  static QuadratureRule ball(double radius, const QuadratureOrder& order) {
    return shell(0.0, radius, order);
  }
  static QuadratureRule annulus(double a, double b, const QuadratureOrder& order) {
    return shell(a, b, order);
  }
  /// Surface rule on the sphere of the given radius (weights include radius^2).
  static QuadratureRule sphere(double radius, const QuadratureOrder& order);

  const std::vector<Radial>& radial() const { return radial_; }
  const std::vector<Vec3>& directions() const { return directions_; }
  const std::vector<double>& direction_weights() const { return direction_weights_; }
  std::size_t size() const { return radial_.size() * directions_.size(); }

 private:
  std::vector<Radial> radial_;
  std::vector<Vec3> directions_;
  std::vector<double> direction_weights_;
};

Complex integrate(const QuadratureRule& rule, const std::function<Complex(const Vec3&)>& integrand);

}  // namespace galbrun
