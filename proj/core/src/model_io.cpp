// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <fstream>
#include <sstream>

#include "galbrun/background.hpp"

namespace galbrun {

namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError("missing field '" + key + "' in " + where);
  }
  return obj.at(key);
}

double require_number(const json& obj, const std::string& key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) throw ConfigError("field '" + key + "' in " + where + " must be a number");
  return v.get<double>();
}

std::vector<double> number_array(const json& v, const std::string& what) {
  if (!v.is_array()) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(what + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Vec3 vec3(const json& v, const std::string& what) {
  const auto a = number_array(v, what);
  if (a.size() != 3) throw ConfigError(what + " must have three components");
  return {a[0], a[1], a[2]};
}

// Two-column CSV (r, value); '#' starts a comment; commas or whitespace separate columns.
void read_csv_columns(const std::filesystem::path& path, std::vector<double>& r,
                      std::vector<double>& f) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile table " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& ch : line) {
      if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
    }
    std::istringstream ls(line);
    double a = 0.0, b = 0.0;
    if (!(ls >> a)) continue;
    if (!(ls >> b)) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected two columns");
    }
    r.push_back(a);
    f.push_back(b);
  }
}

FlowSpec load_flow(const json& cfg) {
  FlowSpec flow;
  if (cfg.is_null()) return flow;
  const std::string kind = require(cfg, "kind", "flow").get<std::string>();
  if (kind == "none") return flow;
  if (kind == "toroidal") {
    flow.kind = FlowSpec::Kind::kToroidal;
  } else if (kind == "radial_source") {
    flow.kind = FlowSpec::Kind::kRadialSource;
  } else {
    throw ConfigError("unknown flow kind '" + kind + "'");
  }
  flow.amplitude = require_number(cfg, "amplitude", "flow");
  flow.radius = require_number(cfg, "radius", "flow");
  if (cfg.contains("axis")) flow.axis = vec3(cfg.at("axis"), "flow.axis");
  return flow;
}

}  // namespace

RadialProfile load_profile(const json& cfg, const std::filesystem::path& base_dir,
                           const std::string& name) {
  const std::string where = "profile '" + name + "'";
  if (cfg.is_number()) return RadialProfile::constant(cfg.get<double>());
  const std::string kind = require(cfg, "kind", where).get<std::string>();
  if (kind == "constant") return RadialProfile::constant(require_number(cfg, "value", where));
  if (kind == "exponential") {
    return RadialProfile::exponential(require_number(cfg, "C", where),
                                      require_number(cfg, "alpha", where));
  }
  if (kind == "polynomial") {
    return RadialProfile::polynomial(number_array(require(cfg, "coefficients", where), where));
  }
  if (kind == "tabulated") {
    auto interp = RadialProfile::Interpolation::kMonotoneCubic;
    if (cfg.contains("interpolation")) {
      const std::string s = cfg.at("interpolation").get<std::string>();
      if (s == "linear") {
        interp = RadialProfile::Interpolation::kLinear;
      } else if (s != "monotone_cubic") {
        throw ConfigError(where + ": unknown interpolation '" + s + "'");
      }
    }
    std::vector<double> r, f;
    if (cfg.contains("csv")) {
      read_csv_columns(base_dir / cfg.at("csv").get<std::string>(), r, f);
    } else {
      r = number_array(require(cfg, "r", where), where + ".r");
      f = number_array(require(cfg, "values", where), where + ".values");
    }
    try {
      return RadialProfile::tabulated(std::move(r), std::move(f), interp);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  throw ConfigError(where + ": unknown kind '" + kind + "'");
}

BackgroundModel load_model(const json& config, const std::filesystem::path& base_dir) {
  if (!config.is_object()) throw ConfigError("model config must be a JSON object");
  const json& profiles_cfg = require(config, "profiles", "model");
  BackgroundModel::Profiles profiles{
      load_profile(require(profiles_cfg, "rho", "profiles"), base_dir, "rho"),
      load_profile(require(profiles_cfg, "cs", "profiles"), base_dir, "cs"),
      load_profile(require(profiles_cfg, "p", "profiles"), base_dir, "p"),
      load_profile(require(profiles_cfg, "phi", "profiles"), base_dir, "phi"),
      load_profile(require(profiles_cfg, "gamma", "profiles"), base_dir, "gamma")};
  const json& radii_cfg = require(config, "radii", "model");
  Radii radii{require_number(radii_cfg, "r1", "radii"), require_number(radii_cfg, "r2", "radii"),
              require_number(radii_cfg, "r3", "radii")};
  const double omega = require_number(config, "omega", "model");
  const double G = require_number(config, "G", "model");
  Vec3 rotation = Vec3::Zero();
  if (config.contains("Omega")) rotation = vec3(config.at("Omega"), "Omega");
  FlowSpec flow = config.contains("flow") ? load_flow(config.at("flow")) : FlowSpec{};

  BackgroundModel model(std::move(profiles), flow, radii, omega, rotation, G);

  // Density must be positive on every sample of the loadable range.
  const double lo = model.min_radius();
  const double hi = std::min(model.max_radius(), std::max(2.0 * radii.r3, lo));
  constexpr int kSamples = 1000;
  for (int k = 0; k <= kSamples; ++k) {
    const double r = lo + (hi - lo) * k / kSamples;
    const double rho = model.rho()(r);
    if (!(rho > 0.0)) {
      std::ostringstream msg;
      msg << "negative density sample: rho(" << r << ") = " << rho;
      throw ConfigError(msg.str());
    }
  }
  return model;
}

BackgroundModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file " + path.string());
  json cfg;
  try {
    cfg = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
  const json& model_cfg = cfg.contains("model") ? cfg.at("model") : cfg;
  return load_model(model_cfg, path.parent_path());
}

}  // namespace galbrun
