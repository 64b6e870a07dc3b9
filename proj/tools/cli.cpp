// SPDX-License-Identifier: Apache-2.0
#include "galbrun/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "galbrun/background.hpp"
#include "galbrun/diagnostics.hpp"
#include "galbrun/forms.hpp"
#include "galbrun/radial_solver.hpp"

namespace galbrun::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

namespace {

constexpr std::uint64_t kDefaultSeed = 20240601;

/// Everything a command needs; outputs are registered so the manifest can list them.
struct RunContext {
  std::string command;
  fs::path config_path;
  fs::path out_dir;
  std::uint64_t seed = kDefaultSeed;
  json config;
  json parameters = json::object();
  std::vector<std::string> outputs;
  std::ostream* out = nullptr;

  void write_text(const std::string& name, const std::string& text) {
    std::ofstream f(out_dir / name, std::ios::binary);
    if (!f) throw std::ios_base::failure("cannot write " + (out_dir / name).string());
    f << text;
    outputs.push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }
};

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) {
    for (std::size_t k = 0; k < header.size(); ++k) os_ << (k ? "," : "") << header[k];
    os_ << '\n';
  }
  void row(const std::vector<double>& values) {
    for (std::size_t k = 0; k < values.size(); ++k) os_ << (k ? "," : "") << format_number(values[k]);
    os_ << '\n';
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

json section(const json& cfg, const std::string& name) {
  if (!cfg.contains(name)) return json::object();
  const json& s = cfg.at(name);
  if (!s.is_object()) throw ConfigError("section '" + name + "' must be an object");
  return s;
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + key + "' has the wrong type");
  }
}

Complex complex_or(const json& obj, const std::string& key, Complex fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError("field '" + key + "' must be a number or [re, im]");
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

SamplingSpec load_sampling(const json& cfg, std::uint64_t seed) {
  const json s = section(cfg, "sampling");
  SamplingSpec spec;
  spec.n_radial = get_or(s, "n_radial", spec.n_radial);
  spec.n_directions = get_or(s, "n_directions", spec.n_directions);
  spec.n_random_vectors = get_or(s, "n_random_vectors", spec.n_random_vectors);
  spec.r_max = get_or(s, "r_max", spec.r_max);
  spec.seed = seed;
  if (spec.n_radial < 1 || spec.n_directions < 1 || spec.n_random_vectors < 0) {
    throw ConfigError("sampling counts must be positive");
  }
  return spec;
}

json sampling_json(const SamplingSpec& s) {
  return {{"n_radial", s.n_radial},
          {"n_directions", s.n_directions},
          {"n_random_vectors", s.n_random_vectors},
          {"r_max", s.r_max},
          {"seed", s.seed}};
}

NumericalRangeOptions range_options(const SamplingSpec& s) {
  NumericalRangeOptions o;
  o.random_vectors = s.n_random_vectors;
  o.seed = s.seed;
  return o;
}

BackgroundModel model_from(const RunContext& ctx) {
  const json& m = ctx.config.contains("model") ? ctx.config.at("model") : ctx.config;
  return load_model(m, ctx.config_path.parent_path());
}

// check-model -------------------------------------------------------------------

int cmd_check_model(RunContext& ctx) {
  const BackgroundModel model = model_from(ctx);
  const SamplingSpec sampling = load_sampling(ctx.config, ctx.seed);
  ctx.parameters["sampling"] = sampling_json(sampling);
  const ValidationReport rep = validate_assumptions(model, sampling);
  ctx.write_json("validation.json", rep.to_json());
  ctx.write_text("validation.txt", rep.to_table());
  *ctx.out << rep.to_table();
  return rep.all_blocking_pass() ? kExitPass : kExitDomainFailure;
}

// verify-forms ------------------------------------------------------------------

struct FormsSuite {
  double r_out = 0.0;
  QuadratureOrder order;
  int n_pairs = 3;
  int degree = 2;
  IdentityTolerance tol;
  FlowSpec symmetry_flow;
};

FormsSuite load_forms_suite(const json& cfg, const BackgroundModel& model) {
  const json s = section(cfg, "verify_forms");
  FormsSuite suite;
  const Radii& r = model.radii();
  suite.r_out = get_or(s, "r_out", r.r3 + (r.r3 - r.r2));
  const json q = section(s, "quadrature");
  suite.order.radial = get_or(q, "radial", suite.order.radial);
  suite.order.polar = get_or(q, "polar", suite.order.polar);
  suite.order.azimuthal = get_or(q, "azimuthal", suite.order.azimuthal);
  suite.n_pairs = get_or(s, "n_pairs", suite.n_pairs);
  suite.degree = get_or(s, "degree", suite.degree);
  suite.tol.rel = get_or(s, "tolerance", suite.tol.rel);
  suite.tol.abs_floor = get_or(s, "abs_floor", suite.tol.abs_floor);
  if (suite.n_pairs < 1 || suite.degree < 0) throw ConfigError("verify_forms counts must be positive");
  // Flow used by the symmetry identity when the model itself carries none.
  const json f = section(s, "symmetry_flow");
  suite.symmetry_flow.kind = FlowSpec::Kind::kToroidal;
  suite.symmetry_flow.amplitude = get_or(f, "amplitude", 0.2);
  suite.symmetry_flow.radius = get_or(f, "radius", r.r1);
  if (f.contains("axis")) {
    const auto a = f.at("axis").get<std::vector<double>>();
    if (a.size() != 3) throw ConfigError("symmetry_flow.axis must have three components");
    suite.symmetry_flow.axis = Vec3(a[0], a[1], a[2]);
  }
  return suite;
}

int cmd_verify_forms(RunContext& ctx) {
  const BackgroundModel model = model_from(ctx);
  const FormsSuite suite = load_forms_suite(ctx.config, model);
  const Radii& r = model.radii();
  ctx.parameters["verify_forms"] = {
      {"r_out", suite.r_out},
      {"quadrature", {{"radial", suite.order.radial}, {"polar", suite.order.polar}, {"azimuthal", suite.order.azimuthal}}},
      {"n_pairs", suite.n_pairs},
      {"degree", suite.degree},
      {"tolerance", suite.tol.rel},
      {"abs_floor", suite.tol.abs_floor}};

  const FormContext fctx(model, suite.r_out, suite.order);
  const bool own_flow = !model.flow_is_zero() && model.flow_spec().kind == FlowSpec::Kind::kToroidal;
  const FormContext flow_ctx(own_flow ? model : model.with_flow(suite.symmetry_flow), suite.r_out,
                             suite.order);
  const std::vector<std::pair<std::string, Support>> supports = {
      {"interior", Support::ball(0.9 * r.r2)},
      {"interface", Support::annulus(0.5 * r.r1, r.r2 + 0.5 * (r.r3 - r.r2))},
      {"atmosphere", Support::annulus(r.r2 + 0.05 * (suite.r_out - r.r2), 0.95 * suite.r_out)}};
  const Support psi_support = Support::ball(0.95 * suite.r_out);

  std::mt19937_64 rng(ctx.seed);
  json reports = json::array();
  CsvWriter csv({"case", "check", "abs_err", "rel_err", "pass"});
  int case_id = 0;
  bool all_pass = true;
  for (const auto& [label, support] : supports) {
    for (int k = 0; k < suite.n_pairs; ++k, ++case_id) {
      const FieldPair a{random_vector_field(rng, support, suite.degree),
                        random_scalar_field(rng, psi_support, suite.degree)};
      const FieldPair b{random_vector_field(rng, support, suite.degree),
                        random_scalar_field(rng, psi_support, suite.degree)};
      std::vector<IdentityReport> reps;
      reps.push_back(check_reformulation(fctx, a, b, suite.tol));
      reps.push_back(check_identity_imaginary(fctx, a.u, a.psi, suite.tol));
      if (label != "atmosphere") reps.push_back(check_flow_symmetry(flow_ctx, a.u, b.u, suite.tol));
      for (std::size_t c = 0; c < reps.size(); ++c) {
        const IdentityReport& rep = reps[c];
        json j = rep.to_json();
        j["case"] = case_id;
        j["support"] = label;
        if (!rep.pass && !rep.skipped) {
          // Failures within the default relative tolerance are tolerance-setting failures.
          j["failure_kind"] = rep.rel_err <= IdentityTolerance{}.rel ? "tolerance" : "identity";
          all_pass = false;
        }
        reports.push_back(j);
        csv.row({static_cast<double>(case_id), static_cast<double>(c), rep.abs_err, rep.rel_err,
                 rep.pass ? 1.0 : 0.0});
      }
    }
  }
  // check: 0 reformulation, 1 imaginary part, 2 flow symmetry; names live in identities.json.
  ctx.write_json("identities.json", {{"all_pass", all_pass}, {"reports", reports}});
  ctx.write_text("identities.csv", csv.str());
  int n_pass = 0;
  for (const auto& j : reports) n_pass += j.at("pass").get<bool>() ? 1 : 0;
  *ctx.out << "identities: " << n_pass << "/" << reports.size() << " pass\n";
  return all_pass ? kExitPass : kExitDomainFailure;
}

// solve / compare -----------------------------------------------------------------

Formulation parse_formulation(const std::string& s) {
  if (s == "coupled") return Formulation::kCoupled;
  if (s == "reference") return Formulation::kReference;
  if (s == "full-gravity" || s == "full_gravity") return Formulation::kFullGravity;
  throw ConfigError("unknown formulation '" + s + "'");
}

struct SourceChoice {
  std::string kind = "bump";
  Complex amplitude = 1.0;
  double a = 0.0, b = 0.0;
};

SourceChoice load_source(const json& s, const BackgroundModel& model) {
  SourceChoice c;
  const json src = section(s, "source");
  c.kind = get_or<std::string>(src, "kind", "bump");
  c.amplitude = complex_or(src, "amplitude", 1.0);
  c.a = get_or(src, "a", 0.2 * model.radii().r2);
  c.b = get_or(src, "b", 0.8 * model.radii().r2);
  if (c.kind != "bump" && c.kind != "zero" && c.kind != "manufactured") {
    throw ConfigError("unknown source kind '" + c.kind + "'");
  }
  return c;
}

json source_json(const SourceChoice& c) {
  return {{"kind", c.kind}, {"amplitude", complex_json(c.amplitude)}, {"a", c.a}, {"b", c.b}};
}

Scenario make_scenario(const BackgroundModel& model, Formulation f, double R, const SourceChoice& src,
                       int n_int, int n_ext) {
  Scenario s{model, f, R, RadialSource::zero(), n_int, n_ext, std::nullopt, {}};
  if (src.kind == "bump") s.source = RadialSource::bump(src.amplitude, src.a, src.b);
  if (src.kind == "manufactured") {
    if (f != Formulation::kCoupled) throw ConfigError("manufactured source needs the coupled formulation");
    s.exact.emplace(model, R, src.amplitude);
    s.source = s.exact->source();
  }
  return s;
}

void write_solution_csv(RunContext& ctx, const ModalSolution& sol) {
  const bool psi = !sol.psi_nodes.empty();
  std::vector<std::string> header{"r", "re_u", "im_u"};
  if (psi) {
    header.push_back("re_psi");
    header.push_back("im_psi");
  }
  CsvWriter u(header);
  for (std::size_t k = 0; k < sol.mesh_u.n_nodes(); ++k) {
    std::vector<double> row{sol.mesh_u.nodes()[k], sol.u_nodes[k].real(), sol.u_nodes[k].imag()};
    if (psi) {
      row.push_back(sol.psi_nodes[k].real());
      row.push_back(sol.psi_nodes[k].imag());
    }
    u.row(row);
  }
  ctx.write_text("u.csv", u.str());
  if (sol.mesh_v) {
    const ReconstructedDisplacement rec = reconstruct_u_from_v(sol);
    const Mesh1D& mv = *sol.mesh_v;
    CsvWriter v({"r", "re_v", "im_v", "re_u_rec", "im_u_rec"});
    for (std::size_t k = 0; k < mv.n_nodes(); ++k) {
      const Complex ur = rec.on_element(std::min(k, mv.n_elements() - 1), mv.nodes()[k]);
      v.row({mv.nodes()[k], sol.v_nodes[k].real(), sol.v_nodes[k].imag(), ur.real(), ur.imag()});
    }
    ctx.write_text("exterior.csv", v.str());
  }
}

int cmd_solve(RunContext& ctx) {
  const BackgroundModel model = model_from(ctx);
  const json s = section(ctx.config, "solve");
  const Formulation f = parse_formulation(get_or<std::string>(s, "formulation", "coupled"));
  const Radii& r = model.radii();
  const double R = get_or(s, "R_ext", r.r2 + 3.0);
  const int n_int = get_or(s, "n_int", 32);
  const int n_ext = get_or(s, "n_ext", 96);
  const SourceChoice src = load_source(s, model);
  const auto refinements = get_or<std::vector<int>>(s, "refinements", {});
  ctx.parameters["solve"] = {{"formulation", to_string(f)}, {"R_ext", R},   {"n_int", n_int},
                             {"n_ext", n_ext},             {"source", source_json(src)},
                             {"refinements", refinements}};

  const Scenario scen = make_scenario(model, f, R, src, n_int, n_ext);
  ModalSolution sol;
  try {
    sol = solve_scenario(scen, 1);
  } catch (const SolverError& e) {
    ctx.write_json("residuals.json", {{"status", "solver failure"}, {"error", e.what()}});
    *ctx.out << "solver failure: " << e.what() << "\n";
    return kExitDomainFailure;
  }
  write_solution_csv(ctx, sol);
  json res{{"residual", sol.residual},
           {"rhs_norm", sol.rhs_norm},
           {"matrix_scale", sol.matrix_scale},
           {"max_abs", sol.max_abs()},
           {"pivots", sol.pivots.to_json()},
           {"metadata", sol.meta.to_json()},
           {"n_unknowns", sol.coefficients.size()}};
  if (f == Formulation::kCoupled) res["interface"] = interface_residuals(sol).to_json();
  if (f == Formulation::kFullGravity) res["multiplier"] = complex_json(sol.multiplier);
  if (!refinements.empty()) {
    const RateTable table = convergence_study(scen, refinements);
    res["rates"] = table.to_json();
    CsvWriter csv({"h", "l2_error", "energy_error", "l2_rate", "energy_rate"});
    for (const auto& row : table.rows) csv.row({row.h, row.l2_error, row.energy_error, row.l2_rate, row.energy_rate});
    ctx.write_text("rates.csv", csv.str());
    if (f == Formulation::kCoupled) {
      CsvWriter ic({"refinement", "h_int", "intf1", "intf2"});
      json list = json::array();
      for (int m : refinements) {
        const ModalSolution sm = solve_scenario(scen, m);
        const InterfaceResiduals ir = interface_residuals(sm);
        ic.row({static_cast<double>(m), sm.mesh_u.max_h(), ir.intf1, ir.intf2});
        list.push_back(ir.to_json());
      }
      res["interface_refinement"] = list;
      ctx.write_text("interface.csv", ic.str());
    }
  }
  ctx.write_json("residuals.json", res);
  *ctx.out << "solve[" << to_string(f) << "]: " << sol.coefficients.size()
           << " unknowns, relative residual " << sol.residual << "\n";
  if (sol.pivots.near_singular) *ctx.out << "warning: near-singular matrix\n";
  return kExitPass;
}

int cmd_compare(RunContext& ctx) {
  const BackgroundModel model = model_from(ctx);
  const json s = section(ctx.config, "compare");
  const Radii& r = model.radii();
  const auto Rs = get_or<std::vector<double>>(s, "R_values", {r.r2 + 1.0, r.r2 + 2.0, r.r2 + 3.0, r.r2 + 4.0});
  const double epu = get_or(s, "elements_per_unit", 200.0);
  const SourceChoice src = load_source(s, model);
  if (src.kind == "manufactured") throw ConfigError("compare needs a bump or zero source");
  if (Rs.size() < 2 || !(epu > 0.0)) throw ConfigError("compare needs two R values and positive density");
  ctx.parameters["compare"] = {{"R_values", Rs}, {"elements_per_unit", epu}, {"source", source_json(src)}};

  const int n_int = std::max(1, static_cast<int>(std::lround(r.r2 * epu)));
  CsvWriter csv({"R", "interior_rel_diff"});
  json rows = json::array();
  std::vector<double> diffs;
  for (double R : Rs) {
    const int n_ext = std::max(2, static_cast<int>(std::lround((R - r.r2) * epu)));
    const ModalSolution a = solve_scenario(make_scenario(model, Formulation::kCoupled, R, src, n_int, n_ext), 1);
    const ModalSolution b = solve_scenario(make_scenario(model, Formulation::kReference, R, src, n_int, n_ext), 1);
    const double d = interior_relative_difference(a, b, r.r2);
    diffs.push_back(d);
    csv.row({R, d});
    rows.push_back({{"R", R}, {"interior_rel_diff", d}, {"n_int", n_int}, {"n_ext", n_ext}});
  }
  bool monotone = true;
  for (std::size_t k = 1; k < diffs.size(); ++k) monotone = monotone && diffs[k] < diffs[k - 1];
  ctx.write_text("compare.csv", csv.str());
  ctx.write_json("compare.json", {{"rows", rows}, {"monotone_decreasing", monotone}});
  *ctx.out << "compare: " << (monotone ? "monotone decreasing" : "NOT monotone") << " interior differences\n";
  return monotone ? kExitPass : kExitDomainFailure;
}

// diagnostics ----------------------------------------------------------------------

int cmd_diagnostics(RunContext& ctx) {
  const BackgroundModel model = model_from(ctx);
  const SamplingSpec sampling = load_sampling(ctx.config, ctx.seed);
  const json s = section(ctx.config, "diagnostics");
  const double tau = get_or(s, "tau", 0.01);
  const int n_angles = get_or(s, "n_angles", 10000);
  const bool sector = get_or(s, "sector_check", true);
  ctx.parameters["sampling"] = sampling_json(sampling);
  ctx.parameters["diagnostics"] = {{"tau", tau}, {"n_angles", n_angles}, {"sector_check", sector}};
  const NumericalRangeOptions ropt = range_options(sampling);
  const Radii& r = model.radii();

  json cert;
  const ThetaReport th = compute_theta(model, sampling, ropt);
  cert["theta"] = th.to_json();
  const SubsonicReport sub = check_subsonic(model, th.theta, sampling);
  cert["subsonic"] = sub.to_json();

  json betas = json::object();
  std::map<BetaVariant, BetaReport> beta_reports;
  for (BetaVariant v : {BetaVariant::kCowling, BetaVariant::kFull, BetaVariant::kCoupled}) {
    beta_reports[v] = select_beta(model, v, sampling, n_angles);
    betas[to_string(v)] = beta_reports[v].to_json();
  }
  cert["beta"] = betas;

  // mu* = beta + pi/2 - theta - tau; mu(r2) = pi/2 - theta - tau for the coupled profile.
  json mu = json::object();
  const double base = 0.5 * kPi - th.theta - tau;
  auto try_profile = [&](const std::string& name, const MuParams& p, MuVariant v, bool admissible) {
    json j;
    if (!admissible) {
      j = {{"status", "skipped: no admissible beta"}};
    } else {
      try {
        const MuProfile prof = MuProfile::build(p, v);
        j = prof.to_json();
        j["properties"] = prof.check_properties().to_json();
        if (sector && v == MuVariant::kCowling) {
          j["sector_check"] = pointwise_sector_check(model, prof, th.theta, tau, sampling, ropt).to_json();
        }
      } catch (const ConfigError& e) {
        j = {{"status", std::string("not constructible: ") + e.what()}};
      } catch (const DomainError& e) {
        j = {{"status", std::string("not constructible: ") + e.what()}};
      }
    }
    mu[name] = j;
  };
  const BetaReport& bc = beta_reports[BetaVariant::kCowling];
  try_profile("cowling", MuParams{r.r1, r.r2, 0.0, 0.0, bc.beta + base}, MuVariant::kCowling, bc.admissible);
  const BetaReport& bp = beta_reports[BetaVariant::kCoupled];
  try_profile("coupled", MuParams{r.r1, r.r2, r.r3, base, bp.beta + base}, MuVariant::kCoupled, bp.admissible);
  cert["mu"] = mu;
  cert["tau"] = tau;
  ctx.write_json("certificate.json", cert);

  *ctx.out << "theta = " << th.theta << " (attained at r = " << th.attained_radius << ")\n"
           << "subsonic: " << (sub.pass ? "pass" : "fail") << ", margin " << sub.margin << "\n";
  for (const auto& [v, rep] : beta_reports) {
    *ctx.out << "beta[" << to_string(v) << "]: ";
    if (rep.admissible) {
      *ctx.out << rep.beta << " (margin " << rep.margin << ")\n";
    } else {
      *ctx.out << "no admissible beta (best margin " << rep.margin << ")\n";
    }
  }
  return kExitPass;
}

// Driver ---------------------------------------------------------------------------

json read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("schema error: malformed JSON: ") + e.what());
  }
}

void write_manifest(RunContext& ctx, int code, const std::string& error, double seconds) {
  json m{{"command", ctx.command},
         {"config", ctx.config_path.string()},
         {"seed", ctx.seed},
         {"tool_version", kToolVersion},
         {"parameters", ctx.parameters},
         {"exit_code", code},
         {"outputs", ctx.outputs},
         {"wall_clock_seconds", seconds}};
  if (!error.empty()) m["error"] = error;
  std::ofstream f(ctx.out_dir / "manifest.json", std::ios::binary);
  if (f) f << m.dump(2) << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"galbrun: verification engine for time-harmonic Galbrun problems", "galbrun"};
  app.require_subcommand(1);
  RunContext ctx;
  ctx.out = &out;
  std::string config, out_dir = "galbrun_out";
  std::uint64_t seed = kDefaultSeed;

  using Handler = std::function<int(RunContext&)>;
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"check-model", "Validate model assumptions", cmd_check_model},
      {"verify-forms", "Check the sesquilinear-form identities", cmd_verify_forms},
      {"solve", "Run a radial solver scenario", cmd_solve},
      {"compare", "Coupled versus reference sweep over truncation radii", cmd_compare},
      {"diagnostics", "Coercivity certificate: theta, beta, mu", cmd_diagnostics}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help, handler] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON config file")->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Random seed");
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  Handler handler;
  for (std::size_t k = 0; k < subs.size(); ++k) {
    if (subs[k]->parsed()) {
      ctx.command = std::get<0>(commands[k]);
      handler = std::get<2>(commands[k]);
    }
  }
  ctx.config_path = config;
  ctx.out_dir = out_dir;
  ctx.seed = seed;

  const auto t0 = std::chrono::steady_clock::now();
  int code = kExitPass;
  std::string error;
  try {
    fs::create_directories(ctx.out_dir);
  } catch (const fs::filesystem_error& e) {
    err << "cannot create output directory: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    ctx.config = read_config(ctx.config_path);
    code = handler(ctx);
  } catch (const ConfigError& e) {
    error = e.what();
    code = kExitUsage;
  } catch (const json::exception& e) {
    error = std::string("schema error: ") + e.what();
    code = kExitUsage;
  } catch (const std::ios_base::failure& e) {
    error = e.what();
    code = kExitUsage;
  } catch (const DomainError& e) {
    error = e.what();
    code = kExitDomainFailure;
  } catch (const SolverError& e) {
    error = e.what();
    code = kExitDomainFailure;
  }
  if (!error.empty()) err << ctx.command << ": " << error << "\n";
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(ctx, code, error, seconds);
  return code;
}

}  // namespace galbrun::cli
