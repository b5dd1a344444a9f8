// Command-line front end: solve-radial, solve-field, perturb, sweep, check,
// export-glyphs. Every subcommand accepts --config FILE (flat JSON); flags
// given on the command line override config values.

#include "ldg/io.hpp"
#include "ldg/perturbation.hpp"
#include "ldg/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace ldg;

namespace {

// Collects flag values that were actually given, keyed by config name.
class Overrides {
 public:
  template <class T>
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto holder = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *holder, help);
    apply_.push_back([opt, holder, key](json& j) {
      if (opt->count() > 0) j[key] = *holder;
    });
  }
  void flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto holder = std::make_shared<bool>(false);
    CLI::Option* opt = app->add_flag(flag, *holder, help);
    apply_.push_back([opt, holder, key](json& j) {
      if (opt->count() > 0) j[key] = *holder;
    });
  }
  json merged(const std::string& config_path) const {
    json j = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::invalid_argument("cannot read config " + config_path);
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
      }
      if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    }
    for (const auto& f : apply_) f(j);
    return j;
  }

 private:
  std::vector<std::function<void(json&)>> apply_;
};

void add_params(Overrides& o, CLI::App* app) {
  o.add<double>(app, "--a2", "a2", "bulk constant a^2");
  o.add<double>(app, "--b2", "b2", "bulk constant b^2");
  o.add<double>(app, "--c2", "c2", "bulk constant c^2");
  o.add<double>(app, "--L", "L", "elastic constant L");
  o.add<double>(app, "--M", "M", "elastic constant M");
  o.add<double>(app, "--R", "R", "disk radius");
  o.add<int>(app, "--k", "k", "winding number");
}

template <class T>
T get(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config key '" + key + "' has the wrong type");
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw std::invalid_argument("unknown config key: " + it.key());
}

const std::set<std::string> kParamKeys{"a2", "b2", "c2", "L", "M", "R", "k"};

std::set<std::string> with_params(std::set<std::string> s) {
  s.insert(kParamKeys.begin(), kParamKeys.end());
  return s;
}

MaterialParams read_params(const json& j) {
  MaterialParams p = params_from_json(j);
  p.validate();
  return p;
}

std::string prepare_out(const std::string& dir) {
  fs::create_directories(dir);
  return dir;
}

void print(const json& j) { std::cout << j.dump(2) << std::endl; }

int cmd_solve_radial(const json& j) {
  check_keys(j, with_params({"branch", "N", "tol", "out"}));
  const MaterialParams p = read_params(j);
  const std::string out = prepare_out(get<std::string>(j, "out", "out"));
  RadialOptions opt;
  opt.N = get<int>(j, "N", 2000);
  opt.tol = get<double>(j, "tol", -1.0);
  const std::string bname = get<std::string>(j, "branch", "q2minus");
  const Branch b = branch_from_name(bname);
  RadialResult r;
  if (p.M == 0 && p.k != 2) {
    const M0Result m0 = minimize_radial_M0(p, opt.N);
    r.profile = to_profile(m0.profile);
    r.energy = m0.energy;
    r.converged = m0.converged;
    r.grad_norm = m0.grad_norm;
  } else {
    r = minimize_radial(p, b, opt);
  }
  write_profile_csv(out + "/profile.csv", r.profile, p);
  json rep = {{"branch", bname},
              {"converged", r.converged},
              {"energy_radial", r.energy},
              {"energy", radial_to_field_energy(r.energy, p)},
              {"grad_norm", r.grad_norm},
              {"iterations", r.iterations},
              {"params", params_json(p)}};
  if (r.converged) {
    rep["label"] = classify_profile(r.profile, 1e-6 * s_plus(p));
    rep["min_eig"] = reduced_hessian_min_eig(r.profile, p).value;
    rep["ode_residual"] = ode_residual_norm(r.profile, p);
    const GammaResidual g = gamma_limit_residual(r.profile);
    rep["gamma_constraint_relative"] = g.relative;
  } else {
    rep["label"] = "unconverged";
  }
  std::ofstream(out + "/report.json") << rep.dump(2) << '\n';
  write_manifest(out + "/manifest.json", {{"command", "solve-radial"}, {"config", j}});
  print(rep);
  return r.converged ? 0 : 2;
}

int cmd_solve_field(const json& j) {
  check_keys(j, with_params({"seed", "mesh_h", "grading", "optimizer", "tol", "max_iter", "profile", "out", "stability"}));
  const MaterialParams p = read_params(j);
  const std::string out = prepare_out(get<std::string>(j, "out", "out"));
  const double h = get<double>(j, "mesh_h", p.R / 60.0);
  auto mesh = std::make_shared<const DiskMesh>(build_mesh(p.R, h, get<double>(j, "grading", 1.0)));
  Field2D init;
  const std::string profile = get<std::string>(j, "profile", "");
  const std::string seed = get<std::string>(j, "seed", "interp");
  if (!profile.empty())
    init = field_from_profile(mesh, p, read_profile_csv(profile));
  else
    init = field_seed(mesh, p, field_seed_from_name(seed));
  FieldOptions fo;
  const std::string optname = get<std::string>(j, "optimizer", "lbfgs");
  if (optname != "lbfgs" && optname != "trust-region") throw std::invalid_argument("optimizer: lbfgs or trust-region");
  fo.optimizer = optname == "lbfgs" ? Optimizer::LBFGS : Optimizer::TrustRegion;
  fo.grad_tol = get<double>(j, "tol", -1.0);
  fo.max_iter = get<int>(j, "max_iter", 50000);
  const FieldResult r = minimize_field(init, fo);
  write_field_checkpoint(out + "/checkpoint.csv", r.field);
  const FieldClass fc = classify_field(r.field);
  json defects = json::array();
  for (const auto& d : detect_defects(r.field, 0.05))
    defects.push_back({{"x", d.position.x()}, {"y", d.position.y()}, {"beta", d.beta}});
  json rep = {{"seed", profile.empty() ? seed : profile},
              {"converged", r.converged},
              {"energy", r.energy},
              {"grad_norm", r.grad_norm},
              {"iterations", r.iterations},
              {"monotone", r.monotone},
              {"el_residual", r.el_residual_l2},
              {"label", r.converged ? fc.label : "unconverged"},
              {"symmetry_residual", fc.symmetry_residual},
              {"e3_residual", fc.e3_residual},
              {"defects", defects},
              {"nodes", mesh->num_nodes()},
              {"params", params_json(p)}};
  if (get<bool>(j, "stability", false)) {
    const FieldStability st = field_stability(r.field);
    rep["min_eig"] = st.min_eig;
    rep["negative_eigenvalues"] = st.negative;
  }
  std::ofstream(out + "/report.json") << rep.dump(2) << '\n';
  write_manifest(out + "/manifest.json", {{"command", "solve-field"}, {"config", j}});
  print(rep);
  return r.converged ? 0 : 2;
}

int cmd_perturb(const json& j) {
  check_keys(j, with_params({"eps", "N", "mesh_h", "grading", "out", "radial_only"}));
  json jj = j;
  if (!jj.contains("a2")) jj["a2"] = 400.0;
  if (!jj.contains("R")) jj["R"] = 5.0;
  if (!jj.contains("k")) jj["k"] = -1;
  MaterialParams p = params_from_json(jj);
  p.M = 0;
  p.validate();
  const std::string out = prepare_out(get<std::string>(jj, "out", "out"));
  std::vector<double> eps;
  if (jj.contains("eps")) {
    if (jj["eps"].is_array())
      eps = jj["eps"].get<std::vector<double>>();
    else
      eps = {jj["eps"].get<double>()};
  } else {
    eps = {0.025, 0.05, 0.1};
  }
  ScalingOptions so;
  so.N = get<int>(jj, "N", 2000);
  so.mesh_h = get<double>(jj, "mesh_h", -1.0);
  so.grading = get<double>(jj, "grading", 2.0);

  json rep = {{"params", params_json(p)}};
  if (get<bool>(jj, "radial_only", false)) {
    const M0Result Y = minimize_radial_M0(p, so.N);
    const PerturbationResult pr = solve_perturbation(Y.profile, p);
    write_perturbation_csv(out + "/perturbation.csv", pr.profile, p);
    rep["residual"] = pr.residual;
    rep["min_eig_radial"] = pr.min_eig_radial;
    rep["min_eig_nr"] = pr.min_eig_nr;
  } else {
    const ScalingResult sr = epsilon_scaling_check(p, eps, so);
    write_perturbation_csv(out + "/perturbation.csv", sr.perturbation.profile, p);
    std::ofstream tab(out + "/scaling.csv");
    tab << std::setprecision(12) << "eps,delta,delta_over_Y,converged\n";
    json rows = json::array();
    for (const auto& r : sr.rows) {
      tab << r.eps << ',' << r.delta << ',' << r.relative << ',' << int(r.converged) << '\n';
      rows.push_back({{"eps", r.eps}, {"delta", r.delta}, {"delta_over_Y", r.relative}, {"converged", r.converged}});
    }
    rep["rows"] = rows;
    rep["slope"] = sr.slope;
    rep["Y_norm"] = sr.y_norm;
    rep["Y_converged"] = sr.y_converged;
    rep["residual"] = sr.perturbation.residual;
    rep["min_eig_radial"] = sr.perturbation.min_eig_radial;
    rep["min_eig_nr"] = sr.perturbation.min_eig_nr;
  }
  std::ofstream(out + "/report.json") << rep.dump(2) << '\n';
  write_manifest(out + "/manifest.json", {{"command", "perturb"}, {"config", jj}});
  print(rep);
  return 0;
}

int cmd_sweep(const json& j) {
  SweepConfig cfg = SweepConfig::from_json(j);
  if (cfg.output_dir.empty()) cfg.output_dir = "out";
  prepare_out(cfg.output_dir);
  const PhaseDiagram pd = continuation_sweep(cfg);
  write_phase_diagram_csv(cfg.output_dir + "/phase_diagram.csv", pd);
  const json summary = phase_diagram_json(pd);
  std::ofstream(cfg.output_dir + "/phase_diagram.json") << summary.dump(2) << '\n';
  write_manifest(cfg.output_dir + "/manifest.json", {{"command", "sweep"}, {"config", cfg.to_json()}});
  print(summary);
  if (pd.unresolved() > 0) {
    std::cerr << "warning: " << pd.unresolved() << " unresolved grid point(s)\n";
    return 2;
  }
  return 0;
}

int cmd_check(const std::string& path) {
  CheckReport rep;
  try {
    rep = check_checkpoint(read_field_checkpoint(path));
  } catch (const std::exception& e) {
    std::cerr << "check failed: " << e.what() << '\n';
    return 1;
  }
  json j = rep.summary;
  j["ok"] = rep.ok;
  j["failures"] = rep.failures;
  print(j);
  return rep.ok ? 0 : 1;
}

int cmd_export_glyphs(const std::string& path, const std::string& out) {
  const CheckpointData c = read_field_checkpoint(path);
  prepare_out(out);
  write_glyph_csv(out + "/glyphs.csv", glyph_export(c.field));
  write_beta_csv(out + "/beta.csv", c.field);
  write_manifest(out + "/manifest.json", {{"command", "export-glyphs"}, {"checkpoint", path}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-constant Landau-de Gennes solver for nematic defects on a disk"};
  app.require_subcommand(1);
  std::string config;

  Overrides o_rad, o_field, o_pert, o_sweep;

  auto* rad = app.add_subcommand("solve-radial", "minimize the reduced radial energy");
  rad->add_option("--config", config, "JSON config file");
  add_params(o_rad, rad);
  o_rad.add<std::string>(rad, "--branch", "branch", "q2minus, q2pm, q3 or q5");
  o_rad.add<int>(rad, "--N", "N", "radial grid intervals");
  o_rad.add<double>(rad, "--tol", "tol", "gradient tolerance");
  o_rad.add<std::string>(rad, "--out", "out", "output directory");

  auto* fld = app.add_subcommand("solve-field", "minimize the 2D energy on a disk mesh");
  fld->add_option("--config", config, "JSON config file");
  add_params(o_field, fld);
  o_field.add<std::string>(fld, "--seed", "seed", "interp, nr_vertical or nr_tilted");
  o_field.add<std::string>(fld, "--profile", "profile", "radial profile CSV used as the initial guess");
  o_field.add<double>(fld, "--mesh-h", "mesh_h", "target mesh size");
  o_field.add<double>(fld, "--grading", "grading", "radial grading exponent (>= 1)");
  o_field.add<std::string>(fld, "--optimizer", "optimizer", "lbfgs or trust-region");
  o_field.add<double>(fld, "--tol", "tol", "gradient tolerance");
  o_field.add<int>(fld, "--max-iter", "max_iter", "iteration limit");
  o_field.flag(fld, "--stability", "stability", "report the 2D Hessian inertia");
  o_field.add<std::string>(fld, "--out", "out", "output directory");

  auto* per = app.add_subcommand("perturb", "first-order symmetry-breaking correction and eps^2 check");
  per->add_option("--config", config, "JSON config file");
  add_params(o_pert, per);
  o_pert.add<std::vector<double>>(per, "--eps", "eps", "values of M = eps");
  o_pert.add<int>(per, "--N", "N", "radial grid intervals");
  o_pert.add<double>(per, "--mesh-h", "mesh_h", "target mesh size");
  o_pert.add<double>(per, "--grading", "grading", "radial grading exponent");
  o_pert.flag(per, "--radial-only", "radial_only", "skip the 2D comparison");
  o_pert.add<std::string>(per, "--out", "out", "output directory");

  auto* swp = app.add_subcommand("sweep", "continuation sweep over (M, R)");
  swp->add_option("--config", config, "JSON config file");
  o_sweep.add<double>(swp, "--a2", "a2", "bulk constant a^2");
  o_sweep.add<double>(swp, "--b2", "b2", "bulk constant b^2");
  o_sweep.add<double>(swp, "--c2", "c2", "bulk constant c^2");
  o_sweep.add<double>(swp, "--L", "L", "elastic constant L");
  o_sweep.add<int>(swp, "--k", "k", "winding number");
  o_sweep.add<std::vector<double>>(swp, "--M-grid", "M_grid", "values of M");
  o_sweep.add<std::vector<double>>(swp, "--R-grid", "R_grid", "values of R");
  o_sweep.add<std::vector<std::string>>(swp, "--branches", "branches", "branch presets");
  o_sweep.add<double>(swp, "--M-min", "M_min", "exclusive lower bound on M");
  o_sweep.add<int>(swp, "--N", "radial_N", "radial grid intervals");
  o_sweep.add<double>(swp, "--mesh-h", "mesh_h", "target mesh size");
  o_sweep.flag(swp, "--stability", "field_stability", "2D Hessian inertia for every record");
  o_sweep.add<std::string>(swp, "--out", "output_dir", "output directory");

  std::string ck_path;
  auto* chk = app.add_subcommand("check", "run the invariant suite on a field checkpoint");
  chk->add_option("checkpoint", ck_path, "checkpoint CSV")->required();

  std::string gl_path, gl_out = "out";
  auto* gly = app.add_subcommand("export-glyphs", "glyph and biaxiality tables from a checkpoint");
  gly->add_option("checkpoint", gl_path, "checkpoint CSV")->required();
  gly->add_option("--out", gl_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*rad) return cmd_solve_radial(o_rad.merged(config));
    if (*fld) return cmd_solve_field(o_field.merged(config));
    if (*per) return cmd_perturb(o_pert.merged(config));
    if (*swp) return cmd_sweep(o_sweep.merged(config));
    if (*chk) return cmd_check(ck_path);
    if (*gly) return cmd_export_glyphs(gl_path, gl_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
