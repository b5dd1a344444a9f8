#pragma once

// Piecewise-linear Landau-de Gennes energy on a disk with k-radial Dirichlet
// data: assembly, minimization, seeds and post-processing.

#include "ldg/elastic.hpp"
#include "ldg/field.hpp"
#include "ldg/optimize.hpp"
#include "ldg/radial.hpp"

#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace ldg {

/// Elastic triple used by the assembly: (L, 2M, 0).
ElasticTriple field_triple(const MaterialParams& p);

/// Integral of (L/2)|grad Q|^2 + M Q_ij,k Q_ik,j + f_B(Q): exact for the
/// gradient terms, centroid rule for the bulk.
double total_energy(const Field2D& f);

/// Exact derivative of total_energy with respect to the nodal lab
/// coefficients; boundary columns are zero.
Eigen::Matrix<double, 5, Eigen::Dynamic> total_gradient(const Field2D& f);

double energy_and_gradient(const Field2D& f, Eigen::Matrix<double, 5, Eigen::Dynamic>* grad);

/// Energy of the field assembled from a radial profile, in the same
/// convention as total_energy: 2 pi (radial_energy - M s_+^2).
double radial_to_field_energy(double radial_energy_value, const MaterialParams& p);

enum class Optimizer { LBFGS, TrustRegion };

struct FieldOptions {
  Optimizer optimizer = Optimizer::LBFGS;
  double grad_tol = -1.0;  // negative selects 1e-6 sqrt(#dof)
  int max_iter = 50000;
  bool verbose = false;
};

struct FieldResult {
  Field2D field;
  double energy = 0;
  bool converged = false;
  bool monotone = true;
  double grad_norm = 0;
  int iterations = 0;
  double el_residual_l2 = 0;
  std::string message;
};

/// Boundary nodes are left bit-identical.
FieldResult minimize_field(const Field2D& init, const FieldOptions& opt = {});

/// Exact Hessian of total_energy with respect to the interior nodal lab
/// coefficients (5 per interior node, node order preserved).
Eigen::SparseMatrix<double> field_hessian(const Field2D& f);

struct FieldStability {
  double min_eig;    // estimate of the smallest eigenvalue relative to the lumped mass
  int negative;      // exact count of negative eigenvalues (Sylvester inertia)
};

FieldStability field_stability(const Field2D& f);

enum class FieldSeed { Interpolated, NonRadialVertical, NonRadialTilted };

FieldSeed field_seed_from_name(const std::string& s);
std::string field_seed_name(FieldSeed s);

/// Interpolated: |x|/R times the boundary tensor. Non-radial seeds place two
/// half-defects on the e1 axis at +-R/4 (tilted rotates the director out of
/// the plane near the origin).
Field2D field_seed(std::shared_ptr<const DiskMesh> mesh, const MaterialParams& p, FieldSeed s);

struct Defect {
  Vec2 position;
  double beta;
};

/// Interior local minima of nodal biaxiality below beta_tol, merged within 2h.
std::vector<Defect> detect_defects(const Field2D& f, double beta_tol);

/// Rotation by psi in the joint domain/tensor sense:
/// (psi Q)(x) = R_k(psi) Q(R(-psi) x) R_k(psi)^t, by barycentric interpolation.
Field2D rotate_field(const Field2D& f, double psi);

/// max over sampled psi and nodes of |Q(R(psi) x) - R_k(psi) Q(x) R_k(psi)^t|.
double symmetry_residual(const Field2D& f, int n_psi = 12);

/// max over nodes of |Q e3 - (e3.Q e3) e3|.
double e3_eigen_residual(const Field2D& f);

struct FieldClass {
  std::string label;  // radial, NR_vertical, NR_tilted
  double symmetry_residual;
  double e3_residual;
};

/// tol <= 0 selects 1e-3 s_+.
FieldClass classify_field(const Field2D& f, double tol = -1.0);

struct RadialComponents {
  Eigen::VectorXd r;
  Eigen::Matrix<double, 5, Eigen::Dynamic> w;        // angular means
  Eigen::Matrix<double, 5, Eigen::Dynamic> variance; // angular variances
  double anisotropy;                                 // max variance
};

RadialComponents extract_radial_components(const Field2D& f, int n_radii = 101, int n_angles = 64);

struct Glyph {
  Vec2 position;
  Mat3 frame;    // columns are unit eigenvectors, ascending eigenvalues
  Vec3 lengths;  // eigenvalues + sqrt(2/3)|Q|
  double beta;
};

Glyph glyph(const QTensor& q, const Vec2& x = Vec2::Zero());
std::vector<Glyph> glyph_export(const Field2D& f);

/// L2 norm of a field's tensor values.
double field_l2_norm(const Field2D& f);
double field_l2_distance(const Field2D& a, const Field2D& b);

}  // namespace ldg
