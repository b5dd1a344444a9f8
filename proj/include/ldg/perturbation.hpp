#pragma once

// First-order correction W to the M = 0 radial solution Y at small M = eps
// for odd winding numbers:
//   W = a0 E0 + a1 E1 + cos((k-2)phi) (b0 E0 + b1 E1) + sin((k-2)phi) b2 E2.
//
// The five-mode operator is the second variation of the one-constant energy
// at Y restricted to the ansatz, projected with a 64-point angular rule and
// discretized on the radial grid of Y (cell midpoints for gradient terms,
// nodal weights r_j h for the bulk term). The right-hand side is the mode
// projection of -LY from the closed-form L action.

#include "ldg/field.hpp"
#include "ldg/field_solver.hpp"
#include "ldg/radial.hpp"

#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace ldg {

enum PerturbationMode { kA0 = 0, kA1 = 1, kB0 = 2, kB1 = 3, kB2 = 4 };

struct PerturbationProfile {
  int k = 1;
  double R = 1.0;
  Eigen::VectorXd r;
  Eigen::Matrix<double, 5, Eigen::Dynamic> modes;  // rows a0, a1, b0, b1, b2

  int N() const { return static_cast<int>(r.size()) - 1; }
  /// Mode amplitudes at radius rr (linear interpolation).
  Vec5 at(double rr) const;
  /// Lab coefficients of W (or of W_nr only) at x.
  Vec5 tensor_at(const Vec2& x, bool nr_only = false) const;
};

/// Lab coefficients of the five angular basis tensors at phi, and their phi derivatives.
std::array<Vec5, 5> mode_basis(int k, double phi);
std::array<Vec5, 5> mode_basis_dphi(int k, double phi);

/// Mode coefficients of -LY at every node of Y's grid (zero at r = 0 and r = R).
std::vector<ModeCoefficients> forcing_LY(const M0Profile& Y);

/// Load vector entries: integral over phi of <-LY, Phi_m> for each mode, per node.
Eigen::Matrix<double, 5, Eigen::Dynamic> forcing_projection(const M0Profile& Y);

class SecondVariation {
 public:
  SecondVariation(const M0Profile& Y, const MaterialParams& params, int n_angles = 64);

  int size() const { return n_; }
  const Eigen::SparseMatrix<double>& matrix() const { return A_; }

  /// A w in the unknown ordering; `modes` is 5 x (N+1), fixed entries ignored.
  Eigen::Matrix<double, 5, Eigen::Dynamic> apply(const Eigen::Matrix<double, 5, Eigen::Dynamic>& modes) const;
  /// <V, A W>: the second variation of the discrete energy along the ansatz.
  double bilinear(const Eigen::Matrix<double, 5, Eigen::Dynamic>& v,
                  const Eigen::Matrix<double, 5, Eigen::Dynamic>& w) const;

  Eigen::VectorXd pack(const Eigen::Matrix<double, 5, Eigen::Dynamic>& modes) const;
  Eigen::Matrix<double, 5, Eigen::Dynamic> unpack(const Eigen::VectorXd& x) const;
  /// Load vector for the discretized equation A w = F.
  Eigen::VectorXd load() const;

  /// Smallest eigenvalue of the radial (a0, a1) or symmetry-breaking
  /// (b0, b1, b2) block relative to the r-weighted mass; -inf if the block is
  /// indefinite.
  double min_eigenvalue(bool nr_block) const;

  /// Discrete M = 0 energy of Y + t W in the same quadrature as the operator.
  double mode_energy(const Eigen::Matrix<double, 5, Eigen::Dynamic>& w, double t) const;

 private:
  M0Profile Y_;
  MaterialParams p_;
  int N_, n_, n_angles_;
  std::vector<std::array<int, 5>> idx_;  // unknown index per node and mode, -1 if fixed
  Eigen::SparseMatrix<double> A_;
};

struct PerturbationResult {
  PerturbationProfile profile;
  double residual = 0;      // |A w - F| / |F|
  double min_eig_radial = 0;
  double min_eig_nr = 0;
};

/// Throws std::invalid_argument unless |k| = 1 and M = 0 in `params`, and
/// std::runtime_error if the second variation is not positive definite.
PerturbationResult solve_perturbation(const M0Profile& Y, const MaterialParams& params);

/// Same operator with a caller-supplied load (5 x (N+1) nodal projections).
PerturbationResult solve_perturbation(const M0Profile& Y, const MaterialParams& params,
                                      const Eigen::Matrix<double, 5, Eigen::Dynamic>& projections);

/// W (or W_nr) evaluated at the mesh nodes. Boundary values are not overwritten.
Field2D perturbation_field(std::shared_ptr<const DiskMesh> mesh, const MaterialParams& params,
                           const PerturbationProfile& W, bool nr_only = false);

/// max over samples of |W_nr(R(psi) x) - R_k(psi) W_nr(x) R_k(psi)^t| / max |W_nr|.
double perturbation_symmetry_residual(const PerturbationProfile& W, double psi, int n_r = 40, int n_phi = 72);

struct ScalingOptions {
  int N = 2000;             // radial grid for Y and W
  double mesh_h = -1;       // negative selects R / 40
  double grading = 2.0;
  FieldOptions field;
};

struct ScalingRow {
  double eps = 0;
  double delta = 0;         // |Q*_eps - Y - eps W|_L2
  double relative = 0;      // delta / |Y|_L2
  bool converged = false;
  double energy = 0;
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  double slope = 0;         // least-squares slope of log delta vs log eps over rows with eps > 0
  double y_norm = 0;
  bool y_converged = false;
  PerturbationResult perturbation;
};

/// Y is the converged 2D minimizer at M = 0 (started from the radial profile);
/// each Q*_eps is minimized at M = eps from Y + eps W.
ScalingResult epsilon_scaling_check(const MaterialParams& params, const std::vector<double>& eps_list,
                                    const ScalingOptions& opt = {});

}  // namespace ldg
