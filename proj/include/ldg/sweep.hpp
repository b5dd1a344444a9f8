#pragma once

// Continuation sweeps in M at fixed R over a set of branch presets, global
// minimizer bookkeeping and transition bracketing.

#include "ldg/field_solver.hpp"
#include "ldg/radial.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace ldg {

struct SweepConfig {
  double a2 = 1, b2 = 0, c2 = 1, L = 1;
  int k = 2;
  std::vector<double> M_grid{0.0};
  std::vector<double> R_grid{10.0};
  // q2minus, q2pm, q3, q5 (radial) and nr_vertical, nr_tilted (2D).
  std::vector<std::string> branches{"q2minus", "q2pm", "q3"};
  double M_min = -0.75;     // exclusive lower bound on M
  int radial_N = 2000;
  double radial_tol = -1;   // negative: solver default
  double mesh_h = -1;       // negative selects R / 60
  double mesh_grading = 1.0;
  double field_tol = -1;    // negative: solver default
  int field_max_iter = 50000;
  bool field_stability = false;  // 2D Hessian inertia for radial branches (needs a mesh)
  bool descending_pass = true;
  std::string output_dir;   // checkpoints are written when non-empty

  /// Throws std::invalid_argument on empty or unsorted grids, unknown
  /// branches, M outside (M_min, inf) or elastic constants violating coercivity.
  void validate() const;
  static SweepConfig from_json(const nlohmann::json& j);
  static SweepConfig from_json(const nlohmann::json& j, SweepConfig base);
  nlohmann::json to_json() const;
};

bool is_radial_branch(const std::string& name);

struct BranchRecord {
  std::string branch;
  std::string pass;          // "up" or "down"
  double M = 0, R = 0;
  std::string label;         // classifier output; "unconverged" if the solve failed
  double energy = 0;         // comparison energy (see continuation_sweep)
  double radial_energy = 0;  // radial-solver energy in the 2D convention (radial branches)
  bool converged = false;
  double min_eig = 0;        // reduced radial Hessian (radial) or 2D Hessian estimate (2D)
  int negative_2d = -1;      // 2D inertia when computed, -1 otherwise
  std::vector<Defect> defects;
  double symmetry_residual = 0;
  double e3_residual = 0;
  std::string checkpoint;
};

struct PointSummary {
  double M = 0, R = 0;
  std::string label;   // label of the least-energy converged record
  std::string branch;  // its branch preset
  double energy = 0;
  bool resolved = false;
};

struct Transition {
  double R = 0;
  double M_lo = 0, M_hi = 0;
  std::string from, to;
  std::string type;  // first-order, bifurcation, unclassified
};

struct PhaseDiagram {
  std::vector<BranchRecord> records;
  std::vector<PointSummary> points;  // per (R, M), sorted by R then M
  std::vector<Transition> transitions;
  int unresolved() const;
};

/// For each R and branch: an ascending walk in M warm-started from the
/// previous solution, then (optionally) a descending walk starting from the
/// last ascending one. When any 2D branch is present all energies are
/// compared on the common mesh, radial solutions being evaluated there by
/// interpolation; otherwise radial energies are used directly.
PhaseDiagram continuation_sweep(const SweepConfig& cfg);

/// Label changes of the global minimizer between adjacent M values and sign
/// changes of a branch's stability indicator, as intervals.
std::vector<Transition> detect_transitions(const PhaseDiagram& pd);

void write_phase_diagram_csv(const std::string& path, const PhaseDiagram& pd);
nlohmann::json phase_diagram_json(const PhaseDiagram& pd);

}  // namespace ldg
