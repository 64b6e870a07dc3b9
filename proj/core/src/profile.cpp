// SPDX-License-Identifier: Apache-2.0
#include "galbrun/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "galbrun/types.hpp"

namespace galbrun {

namespace {

int sign(double x) { return (x > 0.0) - (x < 0.0); }

// Fritsch-Carlson slopes with the three-point one-sided end rule.
std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> h(n - 1), delta(n - 1), d(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x[k + 1] - x[k];
    delta[k] = (y[k + 1] - y[k]) / h[k];
  }
  if (n == 2) {
    d[0] = d[1] = delta[0];
    return d;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (sign(delta[k - 1]) * sign(delta[k]) <= 0) {
      d[k] = 0.0;
    } else {
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (sign(s) != sign(d0)) {
      s = 0.0;
    } else if (sign(d0) != sign(d1) && std::abs(s) > 3.0 * std::abs(d0)) {
      s = 3.0 * d0;
    }
    return s;
  };
  d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return d;
}

}  // namespace

RadialProfile RadialProfile::exponential(double scale, double rate) {
  if (!std::isfinite(scale) || !std::isfinite(rate)) {
    throw ConfigError("exponential profile: non-finite parameter");
  }
  RadialProfile p;
  p.kind_ = Kind::kExponential;
  p.scale_ = scale;
  p.rate_ = rate;
  return p;
}

RadialProfile RadialProfile::polynomial(std::vector<double> coeffs) {
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw ConfigError("polynomial profile: non-finite coefficient");
  }
  if (coeffs.empty()) coeffs.push_back(0.0);
  RadialProfile p;
  p.coeffs_ = std::move(coeffs);
  return p;
}

RadialProfile RadialProfile::constant(double value) { return polynomial({value}); }

RadialProfile RadialProfile::tabulated(std::vector<double> radii, std::vector<double> values,
                                       Interpolation interpolation) {
  if (radii.size() != values.size()) {
    throw ConfigError("tabulated profile: radius and value columns differ in length");
  }
  if (radii.size() < 2) throw ConfigError("tabulated profile: need at least two samples");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!std::isfinite(radii[k]) || !std::isfinite(values[k])) {
      throw ConfigError("tabulated profile: non-finite sample");
    }
    if (k > 0 && !(radii[k] > radii[k - 1])) {
      throw ConfigError("tabulated profile: radii must be strictly increasing");
    }
  }
  RadialProfile p;
  p.kind_ = Kind::kTabulated;
  p.interpolation_ = interpolation;
  p.coeffs_.clear();
  p.radii_ = std::move(radii);
  p.values_ = std::move(values);
  if (interpolation == Interpolation::kMonotoneCubic) {
    p.slopes_ = monotone_slopes(p.radii_, p.values_);
  }
  return p;
}

std::pair<double, double> RadialProfile::domain() const {
  if (kind_ == Kind::kTabulated) return {radii_.front(), radii_.back()};
  const double inf = std::numeric_limits<double>::infinity();
  return {-inf, inf};
}

double RadialProfile::derivative(double r, int order) const {
  if (order < 0 || order > 3) throw DomainError("profile derivative order must lie in [0, 3]");
  return jet(r)[static_cast<std::size_t>(order)];
}

std::array<double, 4> RadialProfile::jet(double r) const {
  switch (kind_) {
    case Kind::kExponential: {
      const double e = scale_ * std::exp(-rate_ * r);
      return {e, -rate_ * e, rate_ * rate_ * e, -rate_ * rate_ * rate_ * e};
    }
    case Kind::kPolynomial: {
      // Horner on the jet; out[k] accumulates the k-th derivative directly.
      std::array<double, 4> out{0.0, 0.0, 0.0, 0.0};
      for (std::size_t k = coeffs_.size(); k-- > 0;) {
        out[3] = out[3] * r + 3.0 * out[2];
        out[2] = out[2] * r + 2.0 * out[1];
        out[1] = out[1] * r + out[0];
        out[0] = out[0] * r + coeffs_[k];
      }
      return out;
    }
    case Kind::kTabulated:
      return tabulated_jet(r);
  }
  return {0.0, 0.0, 0.0, 0.0};
}

std::array<double, 4> RadialProfile::tabulated_jet(double r) const {
  const double lo = radii_.front();
  const double hi = radii_.back();
  if (!(r >= lo && r <= hi)) {
    std::ostringstream msg;
    msg << "tabulated profile evaluated at r=" << r << " outside [" << lo << ", " << hi << "]";
    throw DomainError(msg.str());
  }
  auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
  std::size_t k = static_cast<std::size_t>(std::distance(radii_.begin(), it));
  k = std::clamp<std::size_t>(k, 1, radii_.size() - 1) - 1;
  const double h = radii_[k + 1] - radii_[k];
  const double t = (r - radii_[k]) / h;
  const double y0 = values_[k];
  const double y1 = values_[k + 1];
  if (interpolation_ == Interpolation::kLinear) {
    return {y0 + t * (y1 - y0), (y1 - y0) / h, 0.0, 0.0};
  }
  const double m0 = slopes_[k] * h;
  const double m1 = slopes_[k + 1] * h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double d00 = 6 * t2 - 6 * t, d10 = 3 * t2 - 4 * t + 1;
  const double d01 = -6 * t2 + 6 * t, d11 = 3 * t2 - 2 * t;
  const double s00 = 12 * t - 6, s10 = 6 * t - 4, s01 = -12 * t + 6, s11 = 6 * t - 2;
  const double value = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
  const double first = (d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1) / h;
  const double second = (s00 * y0 + s10 * m0 + s01 * y1 + s11 * m1) / (h * h);
  const double third = (12 * y0 + 6 * m0 - 12 * y1 + 6 * m1) / (h * h * h);
  return {value, first, second, third};
}

std::string RadialProfile::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::kExponential:
      os << "exponential(scale=" << scale_ << ", rate=" << rate_ << ")";
      break;
    case Kind::kPolynomial:
      os << "polynomial(degree=" << coeffs_.size() - 1 << ")";
      break;
    case Kind::kTabulated:
      os << "tabulated(" << radii_.size() << " samples, "
         << (interpolation_ == Interpolation::kLinear ? "linear" : "monotone_cubic") << ")";
      break;
  }
  return os.str();
}

}  // namespace galbrun
