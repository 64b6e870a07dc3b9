// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace galbrun {

/// A scalar function of the radius with derivatives up to third order.
///
/// Exponential and polynomial kinds are analytic everywhere. Tabulated kinds
/// are defined on the closed grid interval only; their second and third
/// derivatives are low-trust (piecewise cubic at best).
class RadialProfile {
 public:
  enum class Kind { kExponential, kPolynomial, kTabulated };
  enum class Interpolation { kLinear, kMonotoneCubic };

  RadialProfile() : coeffs_{0.0} {}

  /// scale * exp(-rate * r)
  static RadialProfile exponential(double scale, double rate);
  /// sum_k coeffs[k] r^k
  static RadialProfile polynomial(std::vector<double> coeffs);
  static RadialProfile constant(double value);
  static RadialProfile tabulated(std::vector<double> radii, std::vector<double> values,
                                 Interpolation interpolation);

  double operator()(double r) const { return derivative(r, 0); }
  /// order in [0, 3]
  double derivative(double r, int order) const;
  /// (f, f', f'', f''')
  std::array<double, 4> jet(double r) const;

  Kind kind() const { return kind_; }
  Interpolation interpolation() const { return interpolation_; }
  bool second_derivative_low_trust() const { return kind_ == Kind::kTabulated; }
  /// Closed interval on which evaluation is defined.
  std::pair<double, double> domain() const;
  std::string describe() const;

 private:
  std::array<double, 4> tabulated_jet(double r) const;

  Kind kind_ = Kind::kPolynomial;
  Interpolation interpolation_ = Interpolation::kLinear;
  double scale_ = 0.0;
  double rate_ = 0.0;
  std::vector<double> coeffs_;
  std::vector<double> radii_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

}  // namespace galbrun
