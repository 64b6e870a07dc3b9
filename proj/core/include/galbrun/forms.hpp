// SPDX-License-Identifier: Apache-2.0
/// @file forms.hpp
/// @brief Quadrature evaluation of the sesquilinear forms and their algebraic identities.
///
/// Convention: <u, u'> = int rho u . conj(u') dx; every form is linear in its first
/// argument and conjugate-linear in its second. The gravity self-term and the
/// exterior scalar terms are unweighted L2 pairings.
#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "galbrun/background.hpp"
#include "galbrun/calculus.hpp"

namespace galbrun {

/// Set to -1 to conjugate the first argument instead; identity checks follow it.
inline constexpr int kConjugateSecondArgument = 1;

class FormContext {
 public:
  /// Throws DomainError unless r_out > r2 and the model is defined on [0, r_out].
  FormContext(BackgroundModel model, double r_out, QuadratureOrder order = {});

  const BackgroundModel& model() const { return model_; }
  const QuadratureOrder& order() const { return order_; }
  double r_out() const { return r_out_; }

 private:
  BackgroundModel model_;
  double r_out_;
  QuadratureOrder order_;
};

struct FieldPair {
  VectorTestField u;
  ScalarTestField psi;
};

/// Term-by-term value of a form. Terms not used by a representation stay zero.
struct FormTerms {
  Complex acoustic = 0.0;          // <cs^2 div u, div u'>
  Complex pressure_cross = 0.0;    // <rho^-1 grad p . u, div u'> + <div u, rho^-1 grad p . u'>
  Complex hessian = 0.0;           // <(rho^-1 hess p - hess phi) u, u'>
  Complex acoustic_q = 0.0;        // <cs^2 (div + q.) u, (div + q.) u'>
  Complex m1_term = 0.0;           // -<m1 u, u'>
  Complex kinetic = 0.0;           // -<(w + i d_b + i Omega x) u, (same) u'>
  Complex damping = 0.0;           // -i w <gamma u, u'>
  Complex gravity_coupling = 0.0;  // -<grad psi, u'> - <u, grad psi'>
  Complex gravity_self = 0.0;      // (1/4 pi G) (grad psi, grad psi')_L2

  Complex total() const;
  nlohmann::json to_json() const;
};

FormTerms eval_a(const FormContext& ctx, const FieldPair& a, const FieldPair& b);
FormTerms eval_a_reform(const FormContext& ctx, const FieldPair& a, const FieldPair& b);
FormTerms eval_a_cow(const FormContext& ctx, const VectorTestField& u, const VectorTestField& u2);

/// Only the restriction of u to |x| <= r2 and of v to |x| >= r2 enter, so both may carry
/// nonzero traces on the coupling sphere.
struct CoupledPair {
  VectorTestField u;
  ScalarTestField v;
};

struct CoupledFormTerms {
  FormTerms interior;
  Complex coupling = 0.0;       // (nu.u, v')_S + (v, nu.u')_S on the sphere |x| = r2
  Complex exterior_grad = 0.0;  // ((e^{2 eta}/rho) (m2 + i w gamma)^-1 grad v, grad v')
  Complex exterior_mass = 0.0;  // -((e^{2 eta}/(cs^2 rho)) v, v')

  Complex total() const { return interior.total() + coupling + exterior_grad + exterior_mass; }
};

CoupledFormTerms eval_a_cp(const FormContext& ctx, const CoupledPair& a, const CoupledPair& b);

/// Weighted norms used by the coercivity certificate.
struct AtmosphereNorms {
  double div_q_sq = 0.0;  // ||cs (div + q.) u||^2
  double l2_sq = 0.0;     // ||u||^2
};
AtmosphereNorms atmosphere_norms(const FormContext& ctx, const VectorTestField& u);
/// <gamma u, u>
double gamma_norm_sq(const FormContext& ctx, const VectorTestField& u);

/// Scalar identity outcome, serialized as {identity, lhs, rhs, abs_err, rel_err, pass}.
struct IdentityReport {
  std::string identity;
  Complex lhs = 0.0;
  Complex rhs = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  double scale = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool skipped = false;
  std::vector<std::string> flags;
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// Default tolerances: relative 1e-9 with absolute floor 1e-12.
struct IdentityTolerance {
  double rel = 1e-9;
  double abs_floor = 1e-12;
};

IdentityReport compare_values(const std::string& identity, Complex lhs, Complex rhs, double scale,
                              IdentityTolerance tol);

/// eval_a against eval_a_reform on one pair.
IdentityReport check_reformulation(const FormContext& ctx, const FieldPair& a, const FieldPair& b,
                                   IdentityTolerance tol = {});
/// Im a((u,psi),(u,psi)) + w <gamma u, u> = 0; also checks that the kinetic and gravity terms are real.
IdentityReport check_identity_imaginary(const FormContext& ctx, const VectorTestField& u,
                                        const ScalarTestField& psi, IdentityTolerance tol = {});
/// <i d_b u, u'> = <u, i d_b u'> when div(rho b) = 0.
IdentityReport check_flow_symmetry(const FormContext& ctx, const VectorTestField& u,
                                   const VectorTestField& u2, IdentityTolerance tol = {});

struct CoercivityReport {
  bool zero_field = false;
  Complex a_value = 0.0;
  AtmosphereNorms norms;
  double best_beta = 0.0;
  double margin = 0.0;  // Re(e^{-i beta sign w} a) / (||cs (div+q.)u||^2 + ||u||^2)
  nlohmann::json to_json() const;
};

/// Requires supp u within |x| >= r2. Angles are searched in [-pi/2, pi/2].
CoercivityReport check_atmosphere_coercivity(const FormContext& ctx, const VectorTestField& u,
                                             const std::vector<double>& angle_grid);
std::vector<double> uniform_angle_grid(double lo, double hi, int n);

}  // namespace galbrun
