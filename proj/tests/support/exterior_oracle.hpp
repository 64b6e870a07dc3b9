// SPDX-License-Identifier: Apache-2.0
/// @file exterior_oracle.hpp
/// @brief Shooting oracle for the l = 0 exterior equation, independent of the FEM code path.
///
/// Solves -(K r^2 v')' - W r^2 v = r^2 g on [r2, R] with v(r2) = v0 and v(R) = 0, where
/// K = e^{2 eta} / (rho M), W = e^{2 eta} / (cs^2 rho), M = m1_rr + w^2 + i w gamma and
/// eta' = p' / (cs^2 rho). Coefficients are rebuilt from the profile jets; eta is carried as
/// an extra ODE component. Integration uses adaptive Dormand-Prince with dense output.
#pragma once

#include <array>
#include <functional>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "galbrun/background.hpp"

namespace galbrun::testing {

struct ExteriorOracle {
  const BackgroundModel* model = nullptr;
  std::function<Complex(double)> g;  // exterior load, empty means zero
  double abs_tol = 1e-13;
  double rel_tol = 1e-13;

  /// Values of v at the requested radii (ascending, first entry r2, last entry R).
  std::vector<Complex> solve(Complex v0, const std::vector<double>& radii) const {
    // State: three solutions (v, F = K r^2 v') stored as (Re v, Im v, Re F, Im F), then eta.
    using State = std::array<double, 13>;
    const BackgroundModel& m = *model;
    const double w = m.omega();
    auto rhs = [&](const State& y, State& dy, double r) {
      const auto rho = m.rho().jet(r);
      const auto p = m.p().jet(r);
      const auto phi = m.phi().jet(r);
      const double cs = m.cs()(r);
      const double gamma = m.gamma()(r);
      const double q = p[1] / (cs * cs * rho[0]);
      const double m1_rr = -(p[2] - rho[0] * phi[2] - cs * cs * rho[0] * q * q) / rho[0];
      const Complex M(m1_rr + w * w, w * gamma);
      const double e2 = std::exp(2.0 * y[12]);
      const Complex K = e2 / (rho[0] * M);
      const double W = e2 / (cs * cs * rho[0]);
      for (int s = 0; s < 3; ++s) {
        const Complex v(y[4 * s], y[4 * s + 1]);
        const Complex F(y[4 * s + 2], y[4 * s + 3]);
        const Complex dv = F / (K * r * r);
        Complex dF = -W * r * r * v;
        if (s == 2 && g) dF -= r * r * g(r);
        dy[4 * s] = dv.real();
        dy[4 * s + 1] = dv.imag();
        dy[4 * s + 2] = dF.real();
        dy[4 * s + 3] = dF.imag();
      }
      dy[12] = q;
    };
    State y{};
    y[0] = 1.0;  // v1(r2) = 1, F1 = 0
    y[6] = 1.0;  // v2(r2) = 0, F2 = 1
    std::vector<State> samples;
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_dense_output(abs_tol, rel_tol, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_times(stepper, rhs, y, radii.begin(), radii.end(), 1e-3,
                            [&](const State& s, double) { samples.push_back(s); });
    auto val = [](const State& s, int k) { return Complex(s[4 * k], s[4 * k + 1]); };
    const State& end = samples.back();
    const Complex b = -(v0 * val(end, 0) + val(end, 2)) / val(end, 1);
    std::vector<Complex> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(v0 * val(s, 0) + b * val(s, 1) + val(s, 2));
    return out;
  }
};

}  // namespace galbrun::testing
