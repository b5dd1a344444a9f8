#pragma once

// Elastic invariants and densities, coercivity predicates, the null-Lagrangian
// boundary identity, the operator
//   (LQ)_ij = d_j d_k Q_ik + d_i d_k Q_jk - 2/3 d_l d_k Q_lk delta_ij
// and residuals built from them. All derivatives are planar (d/dx3 = 0).

#include "ldg/field.hpp"
#include "ldg/tensor.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

namespace ldg {

/// d[m](i,j) = dQ_ij / dx_m, m = 0, 1.
struct GradientQ {
  std::array<Mat3, 2> d{Mat3::Zero(), Mat3::Zero()};

  /// From a 5x2 lab-coefficient gradient.
  static GradientQ from_lab(const Eigen::Matrix<double, 5, 2>& g);
  /// Throws std::invalid_argument unless each d[m] is symmetric and traceless.
  void validate() const;
};

struct ElasticTriple {
  double L1 = 1.0, L2 = 0.0, L3 = 0.0;

  /// (L/2)|grad Q|^2 + M Q_ij,k Q_ik,j  ==  triple (L, 2M, 0).
  static ElasticTriple from_LM(double L, double M) { return {L, 2.0 * M, 0.0}; }
};

struct Invariants {
  double I1, I2, I3;
};

Invariants elastic_invariants(const GradientQ& g);
double elastic_density(const GradientQ& g, const ElasticTriple& t);

/// Symmetric matrix K with density = 1/2 g^T K g, where g stacks the lab
/// gradient coefficients as g[a + 5 m] = d q_a / d x_m, m < dim (dim = 2 or 3).
Eigen::MatrixXd elastic_matrix(const ElasticTriple& t, int dim = 2);

struct CoercivityResult {
  bool ok;
  double mu0;  // min of density / |P|^2 over the admissible third-order tensors
};

/// Strict inequalities L1+L2>0, 2L1-L2>0, L1+L2/6+5L3/3>0 together with the
/// minimum of the density quotient over {P_ijk = P_jik, P_iik = 0}.
CoercivityResult coercivity_pointwise(const ElasticTriple& t, int dim = 3);

bool coercivity_dirichlet(double L, double M);

struct NullLagrangian {
  double volume;    // integral of I2 - I3 over the mesh
  double boundary;  // boundary integral over the exact circle |x| = R of the trace
};

/// `trace(phi)` gives the boundary tensor at angle phi; by default the
/// field's boundary_data. Throws on a degenerate mesh.
NullLagrangian null_lagrangian_check(const Field2D& f,
                                     const std::function<QTensor(double)>& trace = nullptr,
                                     int boundary_points = 4096);

/// Volume integral of I2 - I3 alone.
double null_lagrangian_volume(const Field2D& f);

struct NodalResidual {
  std::vector<QTensor> residual;  // zero at excluded nodes
  std::vector<int> excluded;      // boundary nodes
  double l2_norm;                 // sqrt(sum mass_i |r_i|^2) over included nodes
  double max_norm;
};

/// L Delta Q + M LQ - df_B/dQ at interior nodes, from the weak form divided by
/// the lumped mass. Vanishes at exact discrete critical points.
NodalResidual el_residual(const Field2D& f);

/// Jets of a radial function at one radius.
struct RadialJet {
  double w = 0, dw = 0, d2w = 0;
};

/// Coefficients of L(w0 E0 + w1 E1 + w2 E2) at radius r, split into angular
/// modes: E0 * (c0 + cc cos((k-2)phi) + cs sin((k-2)phi)), E1 * (c1 + c1c cos),
/// E2 * (c2 + c2s sin).
struct ModeCoefficients {
  double e0_const, e0_cos, e0_sin;
  double e1_const, e1_cos;
  double e2_const, e2_sin;

  /// Norm of the coefficients multiplying cos/sin((k-2)phi).
  double off_mode_norm() const;
};

ModeCoefficients mode_coupling(int k, double r, const RadialJet& w0, const RadialJet& w1,
                               const RadialJet& w2 = {});

/// Second-order central-difference evaluation of L at x for an analytic field.
QTensor lop_stencil(const std::function<QTensor(const Vec2&)>& q, const Vec2& x, double h);

/// Central-difference Laplacian.
QTensor laplacian_stencil(const std::function<QTensor(const Vec2&)>& q, const Vec2& x, double h);

struct ZExtension {
  std::vector<double> norm;  // Frobenius norm per node
  double max_norm;
};

/// L2 (d_j Q_i3 + d_i Q_j3) + L3 (d_k Q_ik delta_3j + d_k Q_jk delta_3i) from
/// recovered nodal gradients. Boundary nodes are included.
ZExtension z_extension_residual(const Field2D& f, double L2, double L3);

}  // namespace ldg
