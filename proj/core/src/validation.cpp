// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "galbrun/background.hpp"
#include "galbrun/diagnostics.hpp"

namespace galbrun {

bool ValidationReport::all_blocking_pass() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const ValidationEntry& e) { return !e.blocking || e.pass; });
}

const ValidationEntry* ValidationReport::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

nlohmann::json ValidationReport::to_json() const {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  nlohmann::json list = nlohmann::json::array();
  for (const auto& e : entries) {
    list.push_back({{"name", e.name},
                    {"pass", e.pass},
                    {"blocking", e.blocking},
                    {"value", num(e.value)},
                    {"margin", num(e.margin)},
                    {"note", e.note}});
  }
  return {{"all_blocking_pass", all_blocking_pass()},
          {"entries", list},
          {"theta", theta},
          {"low_trust_derivatives", low_trust_derivatives},
          {"sampling",
           {{"n_radial", sampling.n_radial},
            {"r_max", r_max},
            {"n_directions", sampling.n_directions},
            {"n_random_vectors", sampling.n_random_vectors},
            {"seed", sampling.seed}}}};
}

namespace {

// Terminal columns of a UTF-8 string: lead bytes, minus the combining underline used in names.
std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80 ? 1 : 0;
  for (auto pos = s.find("\xCC\xB2"); pos != std::string::npos; pos = s.find("\xCC\xB2", pos + 2)) --w;
  return w;
}

}  // namespace

std::string ValidationReport::to_table() const {
  std::ostringstream os;
  os << std::left << std::setw(34) << "check" << std::setw(7) << "status" << std::setw(16)
     << "value" << std::setw(16) << "margin" << "note\n";
  for (const auto& e : entries) {
    const char* status = e.pass ? "PASS" : (e.blocking ? "FAIL" : "INFO");
    os << e.name << std::string(34 - std::min<std::size_t>(33, display_width(e.name)), ' ');
    os << std::left << std::setw(7) << status << std::setw(16)
       << std::setprecision(6) << e.value << std::setw(16) << e.margin << e.note << '\n';
  }
  os << "sampling: " << sampling.n_radial << " radial points on [0, " << r_max << "], "
     << sampling.n_directions << " directions\n";
  return os.str();
}

namespace {

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> r(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) r[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / n;
  return r;
}

ValidationEntry positive_inf(const std::string& name, const RadialProfile& f,
                             const std::vector<double>& rs) {
  double lo = std::numeric_limits<double>::infinity();
  double at = 0.0;
  for (double r : rs) {
    const double v = f(r);
    if (!(v >= lo)) {
      lo = v;
      at = r;
    }
  }
  ValidationEntry e;
  e.name = name;
  e.value = lo;
  e.margin = lo;
  e.pass = lo > 0.0;
  std::ostringstream os;
  os << "inf attained at r = " << at;
  e.note = os.str();
  return e;
}

}  // namespace

ValidationReport validate_assumptions(const BackgroundModel& model, const SamplingSpec& sampling) {
  if (sampling.n_radial < 1 || sampling.n_directions < 1) {
    throw ConfigError("sampling needs at least one radial point and one direction");
  }
  ValidationReport rep;
  rep.sampling = sampling;
  rep.r_max = sampling_radius(model, sampling);
  const std::vector<double> rs = grid(0.0, rep.r_max, sampling.n_radial);

  rep.entries.push_back(positive_inf("ρ̲ > 0", model.rho(), rs));
  rep.entries.push_back(positive_inf("c̲_s > 0", model.cs(), rs));
  rep.entries.push_back(positive_inf("γ̲ > 0", model.gamma(), rs));
  const bool positive = rep.entries[0].pass && rep.entries[1].pass;

  {
    ValidationEntry e;
    e.name = "supp b ⊂ B_r1";
    const double r1 = model.radii().r1;
    double sup = 0.0;
    if (!model.flow_is_zero()) {
      const auto dirs = fibonacci_directions(std::max(sampling.n_directions, 16));
      for (double r : rs) {
        if (r <= r1) continue;
        for (const auto& d : dirs) sup = std::max(sup, model.flow(r * d).b.norm());
      }
    }
    e.value = sup;
    e.margin = r1 - (model.flow_is_zero() ? 0.0 : model.flow_spec().radius);
    e.pass = sup == 0.0;
    e.note = "sup |b| sampled outside r1";
    rep.entries.push_back(e);
  }

  {
    ValidationEntry q;
    q.name = "q bounded";
    ValidationEntry m;
    m.name = "m1 bounded";
    if (!positive) {
      q.note = m.note = "skipped: density or sound speed not positive";
      q.value = m.value = std::numeric_limits<double>::quiet_NaN();
    } else {
      double sup_q = 0.0, sup_m = 0.0;
      bool finite = true;
      // The origin is a single point; profiles with a central cusp leave m1 direction-dependent there.
      for (double r : rs) {
        if (r <= 0.0) continue;
        try {
          const CoefficientSample c = pointwise_coefficients(model, r * Vec3::UnitZ());
          sup_q = std::max(sup_q, std::abs(c.q_r));
          const double n = c.m1.norm();
          if (!std::isfinite(n)) finite = false;
          sup_m = std::max(sup_m, n);
        } catch (const DomainError& err) {
          finite = false;
          m.note = err.what();
        }
      }
      q.value = sup_q;
      q.pass = std::isfinite(sup_q);
      q.note = "sup |q_r| over the radial grid";
      m.value = sup_m;
      m.pass = finite && std::isfinite(sup_m);
      if (m.note.empty()) m.note = "sup Frobenius norm over the radial grid";
    }
    rep.entries.push_back(q);
    rep.entries.push_back(m);
  }

  {
    ValidationEntry e;
    e.name = "ω ≠ 0";
    e.value = model.omega();
    e.margin = std::abs(model.omega());
    e.pass = model.omega() != 0.0;
    rep.entries.push_back(e);
  }

  {
    ValidationEntry th;
    th.name = "θ < π/2";
    ValidationEntry sub;
    sub.name = "subsonic";
    if (model.omega() == 0.0 || !positive) {
      th.note = sub.note = "skipped: needs omega != 0 and positive rho, cs";
      th.value = sub.value = std::numeric_limits<double>::quiet_NaN();
    } else {
      try {
        const ThetaReport t = compute_theta(model, sampling);
        rep.theta = t.theta;
        th.value = t.theta;
        th.margin = 0.5 * kPi - t.theta;
        th.pass = t.theta < 0.5 * kPi;
        std::ostringstream os;
        os << "attained at r = " << t.attained_radius;
        if (t.angles.inf_dominates) os << "; |inf arg| > |sup arg| somewhere";
        th.note = os.str();
        if (th.pass) {
          const SubsonicReport s = check_subsonic(model, t.theta, sampling);
          sub.value = s.sup_mach_sq;
          sub.margin = s.margin;
          sub.pass = s.pass;
          std::ostringstream so;
          so << "sup |b|^2/cs^2 vs bound " << s.bound;
          sub.note = so.str();
        } else {
          sub.note = "skipped: theta not below pi/2";
        }
      } catch (const DomainError& err) {
        th.note = err.what();
        sub.note = "skipped";
      }
    }
    rep.entries.push_back(th);
    rep.entries.push_back(sub);
  }

  {
    ValidationEntry e;
    e.name = "hydrostatic residual";
    e.blocking = false;
    const Vec3 om = model.rotation();
    const auto dirs = fibonacci_directions(sampling.n_directions);
    double sup_res = 0.0, sup_scale = 0.0;
    for (double r : rs) {
      if (r <= 0.0) continue;
      const auto pj = model.p().jet(r);
      const auto fj = model.phi().jet(r);
      const double rho = model.rho()(r);
      for (const auto& d : dirs) {
        const Vec3 x = r * d;
        const FlowSample f = model.flow(x);
        const Vec3 accel = f.jacobian * f.b + 2.0 * om.cross(f.b) + om.cross(om.cross(x));
        const Vec3 res = rho * (accel - fj[1] * d) + pj[1] * d;
        sup_res = std::max(sup_res, res.norm());
        sup_scale = std::max(sup_scale, std::abs(pj[1]) + rho * std::abs(fj[1]));
      }
    }
    e.value = sup_scale > 0.0 ? sup_res / sup_scale : sup_res;
    e.margin = 0.0;
    e.pass = e.value <= 1e-8;
    e.note = "informational; stability does not require the background equations";
    rep.entries.push_back(e);
  }

  if (model.has_tabulated_profile()) {
    rep.low_trust_derivatives = true;
    ValidationEntry e;
    e.name = "tabulated derivatives";
    e.blocking = false;
    e.pass = false;
    e.note = "second derivatives come from the interpolant (low-trust)";
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace galbrun
