#include "ldg/sweep.hpp"

#include "ldg/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ldg {

namespace {

const std::set<std::string> kRadialBranches{"q2minus", "q2pm", "q3", "q5"};
const std::set<std::string> kFieldBranches{"nr_vertical", "nr_tilted"};

ComponentMask mask_for(Branch b) {
  if (b == Branch::Q2minus || b == Branch::Q2pm) return kTwoComponents;
  if (b == Branch::Q3) return kThreeComponents;
  return kAllComponents;
}

MaterialParams point_params(const SweepConfig& c, double M, double R) {
  MaterialParams p;
  p.a2 = c.a2;
  p.b2 = c.b2;
  p.c2 = c.c2;
  p.L = c.L;
  p.k = c.k;
  p.M = M;
  p.R = R;
  return p;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

bool has_field_branch(const SweepConfig& c) {
  return std::any_of(c.branches.begin(), c.branches.end(), [](const std::string& b) { return kFieldBranches.count(b); });
}

// Radial label of a 2D field whose symmetry residual is small.
std::string refine_radial_label(const Field2D& f) {
  const RadialComponents rc = extract_radial_components(f, 201, 48);
  RadialProfile p = RadialProfile::zeros(static_cast<int>(rc.r.size()) - 1, f.mesh().R, f.params().k);
  p.r = rc.r;
  p.w = rc.w;
  return classify_profile(p, 1e-3 * s_plus(f.params()));
}

std::string checkpoint_path(const SweepConfig& c, const std::string& branch, const std::string& pass, double M,
                            double R) {
  if (c.output_dir.empty()) return {};
  return c.output_dir + "/R" + fmt(R) + "_M" + fmt(M) + "_" + branch + "_" + pass + ".csv";
}

class Walker {
 public:
  Walker(const SweepConfig& c, double r, std::string b, std::shared_ptr<const DiskMesh> m)
      : cfg(c), R(r), branch(std::move(b)), mesh(std::move(m)) {}

  std::vector<BranchRecord> run() {
    std::vector<BranchRecord> out;
    std::vector<double> up = cfg.M_grid;
    walk(up, "up", out);
    if (cfg.descending_pass && up.size() > 1) {
      std::vector<double> down(up.rbegin() + 1, up.rend());
      walk(down, "down", out);
    }
    return out;
  }

 private:
  const SweepConfig& cfg;
  double R;
  std::string branch;
  std::shared_ptr<const DiskMesh> mesh;  // null when the sweep has no 2D branch
  RadialProfile prev_profile;
  Field2D prev_field;
  bool have_prev = false;

  void walk(const std::vector<double>& Ms, const std::string& pass, std::vector<BranchRecord>& out) {
    for (double M : Ms) {
      BranchRecord rec;
      rec.branch = branch;
      rec.pass = pass;
      rec.M = M;
      rec.R = R;
      rec.checkpoint = checkpoint_path(cfg, branch, pass, M, R);
      const MaterialParams p = point_params(cfg, M, R);
      try {
        if (kRadialBranches.count(branch))
          solve_radial(p, rec);
        else
          solve_field(p, rec);
      } catch (const std::exception&) {
        rec.converged = false;
        rec.label = "unconverged";
        rec.energy = std::numeric_limits<double>::quiet_NaN();
      }
      out.push_back(rec);
    }
  }

  void solve_radial(const MaterialParams& p, BranchRecord& rec) {
    const Branch b = branch_from_name(branch);
    RadialOptions opt;
    opt.N = cfg.radial_N;
    opt.tol = cfg.radial_tol;
    opt.active = mask_for(b);
    RadialResult r = have_prev ? minimize_radial(p, prev_profile, opt) : minimize_radial(p, b, opt);
    rec.converged = r.converged;
    if (!r.converged) {
      rec.label = "unconverged";
      rec.energy = rec.radial_energy = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    prev_profile = r.profile;
    have_prev = true;
    rec.label = classify_profile(r.profile, 1e-6 * s_plus(p));
    rec.radial_energy = radial_to_field_energy(r.energy, p);
    rec.energy = rec.radial_energy;
    rec.min_eig = reduced_hessian_min_eig(r.profile, p, kAllComponents).value;
    if (mesh) {
      const Field2D f = field_from_profile(mesh, p, r.profile);
      rec.energy = total_energy(f);
      if (cfg.field_stability) rec.negative_2d = field_stability(f).negative;
    }
    if (!rec.checkpoint.empty()) write_profile_csv(rec.checkpoint, r.profile, p);
  }

  void solve_field(const MaterialParams& p, BranchRecord& rec) {
    Field2D init;
    if (have_prev) {
      init = prev_field;
      init.set_params(p);
      init.apply_boundary();
    } else {
      init = field_seed(mesh, p, field_seed_from_name(branch));
    }
    FieldOptions fo;
    fo.grad_tol = cfg.field_tol;
    fo.max_iter = cfg.field_max_iter;
    const FieldResult r = minimize_field(init, fo);
    rec.converged = r.converged;
    rec.energy = r.energy;
    rec.radial_energy = std::numeric_limits<double>::quiet_NaN();
    prev_field = r.field;
    have_prev = true;
    if (!r.converged) {
      rec.label = "unconverged";
      return;
    }
    const FieldClass fc = classify_field(r.field);
    rec.symmetry_residual = fc.symmetry_residual;
    rec.e3_residual = fc.e3_residual;
    rec.label = fc.label == "radial" ? refine_radial_label(r.field) : fc.label;
    rec.defects = detect_defects(r.field, 0.05);
    rec.min_eig = std::numeric_limits<double>::quiet_NaN();
    if (cfg.field_stability) {
      const FieldStability st = field_stability(r.field);
      rec.min_eig = st.min_eig;
      rec.negative_2d = st.negative;
    }
    if (!rec.checkpoint.empty()) write_field_checkpoint(rec.checkpoint, r.field);
  }
};

// Stable when the best available indicator says so.
bool stable(const BranchRecord& r) {
  if (r.negative_2d >= 0) return r.negative_2d == 0;
  return !(r.min_eig < 0);
}

}  // namespace

bool is_radial_branch(const std::string& name) { return kRadialBranches.count(name) > 0; }

void SweepConfig::validate() const {
  if (M_grid.empty() || R_grid.empty()) throw std::invalid_argument("M_grid and R_grid must be non-empty");
  if (!std::is_sorted(M_grid.begin(), M_grid.end()) || std::adjacent_find(M_grid.begin(), M_grid.end()) != M_grid.end())
    throw std::invalid_argument("M_grid must be strictly increasing");
  if (!std::is_sorted(R_grid.begin(), R_grid.end()) || std::adjacent_find(R_grid.begin(), R_grid.end()) != R_grid.end())
    throw std::invalid_argument("R_grid must be strictly increasing");
  if (branches.empty()) throw std::invalid_argument("no branches selected");
  for (const auto& b : branches)
    if (!kRadialBranches.count(b) && !kFieldBranches.count(b)) throw std::invalid_argument("unknown branch: " + b);
  for (double M : M_grid) {
    if (!(M > M_min)) throw std::invalid_argument("M = " + fmt(M) + " is not above M_min = " + fmt(M_min));
    if (!coercivity_dirichlet(L, M))
      throw std::invalid_argument("L = " + fmt(L) + ", M = " + fmt(M) + " violates L > 0, L + 4M/3 > 0");
    if (k != 2 && M != 0 && std::any_of(branches.begin(), branches.end(), is_radial_branch))
      throw std::invalid_argument("radial branches need k = 2 when M != 0");
  }
  for (double R : R_grid) point_params(*this, M_grid.front(), R).validate();
  if (radial_N < 8) throw std::invalid_argument("radial_N must be at least 8");
  if (mesh_grading < 1.0) throw std::invalid_argument("mesh_grading must be >= 1");
}

SweepConfig SweepConfig::from_json(const nlohmann::json& j) { return from_json(j, SweepConfig{}); }

SweepConfig SweepConfig::from_json(const nlohmann::json& j, SweepConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const std::set<std::string> known{"a2",         "b2",          "c2",          "L",
                                           "k",          "M_grid",      "R_grid",      "branches",
                                           "M_min",      "radial_N",    "radial_tol",  "mesh_h",
                                           "mesh_grading", "field_tol", "field_max_iter", "field_stability",
                                           "descending_pass", "output_dir"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw std::invalid_argument("unknown config key: " + it.key());
  try {
    if (j.contains("a2")) c.a2 = j["a2"].get<double>();
    if (j.contains("b2")) c.b2 = j["b2"].get<double>();
    if (j.contains("c2")) c.c2 = j["c2"].get<double>();
    if (j.contains("L")) c.L = j["L"].get<double>();
    if (j.contains("k")) c.k = j["k"].get<int>();
    if (j.contains("M_grid")) c.M_grid = j["M_grid"].get<std::vector<double>>();
    if (j.contains("R_grid")) c.R_grid = j["R_grid"].get<std::vector<double>>();
    if (j.contains("branches")) c.branches = j["branches"].get<std::vector<std::string>>();
    if (j.contains("M_min")) c.M_min = j["M_min"].get<double>();
    if (j.contains("radial_N")) c.radial_N = j["radial_N"].get<int>();
    if (j.contains("radial_tol")) c.radial_tol = j["radial_tol"].get<double>();
    if (j.contains("mesh_h")) c.mesh_h = j["mesh_h"].get<double>();
    if (j.contains("mesh_grading")) c.mesh_grading = j["mesh_grading"].get<double>();
    if (j.contains("field_tol")) c.field_tol = j["field_tol"].get<double>();
    if (j.contains("field_max_iter")) c.field_max_iter = j["field_max_iter"].get<int>();
    if (j.contains("field_stability")) c.field_stability = j["field_stability"].get<bool>();
    if (j.contains("descending_pass")) c.descending_pass = j["descending_pass"].get<bool>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config type error: ") + e.what());
  }
  return c;
}

nlohmann::json SweepConfig::to_json() const {
  return {{"a2", a2},
          {"b2", b2},
          {"c2", c2},
          {"L", L},
          {"k", k},
          {"M_grid", M_grid},
          {"R_grid", R_grid},
          {"branches", branches},
          {"M_min", M_min},
          {"radial_N", radial_N},
          {"radial_tol", radial_tol},
          {"mesh_h", mesh_h},
          {"mesh_grading", mesh_grading},
          {"field_tol", field_tol},
          {"field_max_iter", field_max_iter},
          {"field_stability", field_stability},
          {"descending_pass", descending_pass},
          {"output_dir", output_dir}};
}

int PhaseDiagram::unresolved() const {
  return static_cast<int>(std::count_if(points.begin(), points.end(), [](const PointSummary& p) { return !p.resolved; }));
}

PhaseDiagram continuation_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const bool need_mesh = has_field_branch(cfg);
  std::map<double, std::shared_ptr<const DiskMesh>> meshes;
  if (need_mesh)
    for (double R : cfg.R_grid)
      meshes[R] = std::make_shared<const DiskMesh>(
          build_mesh(R, cfg.mesh_h > 0 ? cfg.mesh_h : R / 60.0, cfg.mesh_grading));

  std::vector<std::future<std::vector<BranchRecord>>> jobs;
  for (double R : cfg.R_grid)
    for (const auto& b : cfg.branches)
      jobs.push_back(std::async(std::launch::async, [&cfg, R, b, mesh = need_mesh ? meshes[R] : nullptr] {
        Walker w(cfg, R, b, mesh);
        return w.run();
      }));

  PhaseDiagram pd;
  for (auto& j : jobs) {
    auto recs = j.get();
    pd.records.insert(pd.records.end(), recs.begin(), recs.end());
  }
  for (double R : cfg.R_grid)
    for (double M : cfg.M_grid) {
      PointSummary s;
      s.M = M;
      s.R = R;
      s.energy = std::numeric_limits<double>::infinity();
      for (const auto& r : pd.records)
        if (r.R == R && r.M == M && r.converged && std::isfinite(r.energy) && r.energy < s.energy) {
          s.energy = r.energy;
          s.label = r.label;
          s.branch = r.branch;
          s.resolved = true;
        }
      if (!s.resolved) s.label = "unresolved";
      pd.points.push_back(s);
    }
  pd.transitions = detect_transitions(pd);
  return pd;
}

std::vector<Transition> detect_transitions(const PhaseDiagram& pd) {
  std::vector<Transition> out;
  auto records_at = [&](double R, double M) {
    std::vector<const BranchRecord*> v;
    for (const auto& r : pd.records)
      if (r.R == R && r.M == M && r.converged) v.push_back(&r);
    return v;
  };
  // A converged, stable record carrying `label` exists at (R, M).
  auto persists = [&](double R, double M, const std::string& label) {
    for (const auto* r : records_at(R, M))
      if (r->label == label && stable(*r)) return true;
    return false;
  };
  auto best_energy = [&](double R, double M, const std::string& label) {
    double e = std::numeric_limits<double>::infinity();
    for (const auto* r : records_at(R, M))
      if (r->label == label) e = std::min(e, r->energy);
    return e;
  };

  // Global label changes.
  for (size_t i = 0; i + 1 < pd.points.size(); ++i) {
    const auto &a = pd.points[i], &b = pd.points[i + 1];
    if (a.R != b.R || !a.resolved || !b.resolved || a.label == b.label) continue;
    Transition t{a.R, a.M, b.M, a.label, b.label, "unclassified"};
    const bool both = persists(a.R, a.M, a.label) && persists(a.R, a.M, b.label) && persists(b.R, b.M, a.label) &&
                      persists(b.R, b.M, b.label);
    if (both) {
      const double d0 = best_energy(a.R, a.M, b.label) - best_energy(a.R, a.M, a.label);
      const double d1 = best_energy(b.R, b.M, b.label) - best_energy(b.R, b.M, a.label);
      if (d0 > 0 && d1 < 0) t.type = "first-order";
    } else {
      t.type = "bifurcation";
    }
    out.push_back(t);
  }

  // Stability changes and appearance or disappearance along each branch walk.
  std::map<std::tuple<double, std::string, std::string>, std::vector<const BranchRecord*>> walks;
  for (const auto& r : pd.records) walks[{r.R, r.branch, r.pass}].push_back(&r);
  for (auto& [key, recs] : walks) {
    std::sort(recs.begin(), recs.end(), [](auto* x, auto* y) { return x->M < y->M; });
    for (size_t i = 0; i + 1 < recs.size(); ++i) {
      const auto &a = *recs[i], &b = *recs[i + 1];
      if (!a.converged || !b.converged) continue;
      const std::string la = a.label + (stable(a) ? " stable" : " unstable");
      const std::string lb = b.label + (stable(b) ? " stable" : " unstable");
      if (la == lb) continue;
      Transition t{a.R, a.M, b.M, a.branch + ": " + la, a.branch + ": " + lb, "bifurcation"};
      const bool dup = std::any_of(out.begin(), out.end(), [&](const Transition& o) {
        return o.R == t.R && o.M_lo == t.M_lo && o.M_hi == t.M_hi && o.from == t.from && o.to == t.to;
      });
      if (!dup) out.push_back(t);
    }
  }
  return out;
}

void write_phase_diagram_csv(const std::string& path, const PhaseDiagram& pd) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(12);
  out << "M,R,branch,pass,label,energy,converged,min_eig,negative_2d,defects,checkpoint\n";
  for (const auto& r : pd.records)
    out << r.M << ',' << r.R << ',' << r.branch << ',' << r.pass << ',' << r.label << ',' << r.energy << ','
        << int(r.converged) << ',' << r.min_eig << ',' << r.negative_2d << ',' << r.defects.size() << ','
        << r.checkpoint << '\n';
}

nlohmann::json phase_diagram_json(const PhaseDiagram& pd) {
  nlohmann::json pts = nlohmann::json::array(), tr = nlohmann::json::array();
  for (const auto& p : pd.points)
    pts.push_back({{"M", p.M}, {"R", p.R}, {"label", p.label}, {"branch", p.branch}, {"energy", p.resolved ? p.energy : 0.0},
                   {"resolved", p.resolved}});
  for (const auto& t : pd.transitions)
    tr.push_back({{"R", t.R}, {"M_lo", t.M_lo}, {"M_hi", t.M_hi}, {"from", t.from}, {"to", t.to}, {"type", t.type}});
  return {{"points", pts}, {"transitions", tr}, {"unresolved", pd.unresolved()}};
}

}  // namespace ldg
