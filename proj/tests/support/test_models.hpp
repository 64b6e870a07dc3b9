// SPDX-License-Identifier: Apache-2.0
/// @file test_models.hpp
/// @brief Background models and finite-difference helpers shared by the test executables.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <type_traits>

#include "galbrun/background.hpp"
#include "galbrun/calculus.hpp"

namespace galbrun::testing {

/// rho = e^{-3r}, p = 0.5 e^{-3r}, cs = 1, phi = -1.5 r, gamma = 0.1; omega = G = 1.
inline BackgroundModel standard_model(double gamma = 0.1, double omega = 1.0) {
  BackgroundModel::Profiles p{RadialProfile::exponential(1.0, 3.0), RadialProfile::constant(1.0),
                              RadialProfile::exponential(0.5, 3.0),
                              RadialProfile::polynomial({0.0, -1.5}),
                              RadialProfile::constant(gamma)};
  return BackgroundModel(p, FlowSpec{}, Radii{0.5, 1.0, 1.5}, omega, Vec3::Zero(), 1.0);
}

/// Even polynomial profiles, positive on [0, 3]: every coefficient is regular at the origin.
inline BackgroundModel smooth_model(double omega = 1.3, Vec3 rotation = Vec3::Zero()) {
  BackgroundModel::Profiles p{RadialProfile::polynomial({1.0, 0.0, -0.1}),
                              RadialProfile::polynomial({1.0, 0.0, 0.1}),
                              RadialProfile::polynomial({1.0, 0.0, -0.08}),
                              RadialProfile::polynomial({0.0, 0.0, 0.5}),
                              RadialProfile::polynomial({0.2, 0.0, 0.05})};
  return BackgroundModel(p, FlowSpec{}, Radii{0.5, 1.0, 1.5}, omega, rotation, 1.0);
}

inline FlowSpec toroidal_flow(double amplitude, double radius, Vec3 axis = Vec3(0.3, -0.2, 1.0)) {
  FlowSpec f;
  f.kind = FlowSpec::Kind::kToroidal;
  f.amplitude = amplitude;
  f.radius = radius;
  f.axis = axis;
  return f;
}

inline FlowSpec radial_source_flow(double amplitude, double radius) {
  FlowSpec f;
  f.kind = FlowSpec::Kind::kRadialSource;
  f.amplitude = amplitude;
  f.radius = radius;
  return f;
}

/// Uniform point in the ball of the given radius.
inline Vec3 random_point(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    const Vec3 x(u(rng), u(rng), u(rng));
    if (x.norm() < 1.0) return radius * x;
  }
}

/// Fourth-order central difference of f along e_j. The result is evaluated eagerly so Eigen
/// expression templates never outlive the temporaries they reference.
template <class F>
auto fd4(const F& f, const Vec3& x, int j, double h) {
  using R = std::decay_t<decltype(f(x))>;
  Vec3 e = Vec3::Zero();
  e[j] = h;
  R out = (-f(x + 2.0 * e) + 8.0 * f(x + e) - 8.0 * f(x - e) + f(x - 2.0 * e)) / (12.0 * h);
  return out;
}

/// Fourth-order central difference of a scalar function of one variable.
template <class F>
auto fd4_1d(const F& f, double r, double h) {
  return (-f(r + 2.0 * h) + 8.0 * f(r + h) - 8.0 * f(r - h) + f(r - 2.0 * h)) / (12.0 * h);
}

}  // namespace galbrun::testing
