#pragma once

// Q-tensor algebra: traceless symmetric 3x3 order parameters, the quartic
// bulk potential, k-radial boundary data and the moving orthonormal frame.

#include <Eigen/Dense>

#include <array>

namespace ldg {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

/// Traceless symmetric 3x3 tensor. Construction from an arbitrary matrix
/// validates symmetry and trace; arithmetic between valid tensors stays valid.
class QTensor {
 public:
  QTensor() : m_(Mat3::Zero()) {}

  /// Throws std::invalid_argument if `m` is not symmetric and traceless
  /// within 1e-12 * (1 + |m|).
  explicit QTensor(const Mat3& m);

  /// Symmetrizes and removes the trace. Never throws.
  static QTensor project(const Mat3& m);
  static QTensor uniaxial(double s, const Vec3& director);
  /// Inverse of lab_coefficients().
  static QTensor from_lab(const Vec5& q);

  const Mat3& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  double norm() const { return m_.norm(); }
  double trace_sq() const { return m_.squaredNorm(); }
  double trace_cube() const { return (m_ * m_ * m_).trace(); }
  double dot(const QTensor& o) const { return (m_.cwiseProduct(o.m_)).sum(); }

  /// Coefficients in the fixed orthonormal lab basis (see lab_basis()).
  Vec5 lab_coefficients() const;

  QTensor operator+(const QTensor& o) const { return QTensor(m_ + o.m_, Unchecked{}); }
  QTensor operator-(const QTensor& o) const { return QTensor(m_ - o.m_, Unchecked{}); }
  QTensor operator*(double s) const { return QTensor(m_ * s, Unchecked{}); }
  QTensor& operator+=(const QTensor& o) {
    m_ += o.m_;
    return *this;
  }

 private:
  struct Unchecked {};
  QTensor(const Mat3& m, Unchecked) : m_(m) {}
  Mat3 m_;
};

inline QTensor operator*(double s, const QTensor& q) { return q * s; }

/// Fixed orthonormal basis of traceless symmetric tensors:
/// E0, (e1e1 - e2e2)/sqrt2, (e1e2 + e2e1)/sqrt2, (e1e3 + e3e1)/sqrt2, (e2e3 + e3e2)/sqrt2.
const std::array<Mat3, 5>& lab_basis();

struct MaterialParams {
  double a2 = 1.0;
  double b2 = 0.0;
  double c2 = 1.0;
  double L = 1.0;
  double M = 0.0;
  int k = 2;
  double R = 1.0;

  /// Throws std::invalid_argument on c2 <= 0, L <= 0, L + 4M/3 <= 0,
  /// negative bulk constants, k == 0 or R <= 0.
  void validate() const;
};

double s_plus(const MaterialParams& p);

double bulk_potential(const QTensor& q, const MaterialParams& p);

/// Traceless-projected derivative of the bulk potential.
QTensor bulk_gradient(const QTensor& q, const MaterialParams& p);

/// The same two functions on lab-basis coefficients (see lab_basis()).
double bulk_potential_lab(const Vec5& q, const MaterialParams& p);
Vec5 bulk_gradient_lab(const Vec5& q, const MaterialParams& p);
Mat5 bulk_hessian_lab(const Vec5& q, const MaterialParams& p);

/// 1 - 6 (tr Q^3)^2 / (tr Q^2)^3, clamped to [0,1]; zero when |Q| < 1e-12.
double biaxiality(const QTensor& q);

/// Uniaxial Dirichlet data s_+ (n n - I/3) with n = (cos(k phi/2), sin(k phi/2), 0).
QTensor boundary_data(double phi, const MaterialParams& p);

/// Moving frame E0..E4 at polar angle phi for winding k. For odd k the last
/// two members are the fixed tensors (e1e3 + e3e1)/sqrt2 and (e2e3 + e3e2)/sqrt2.
struct BasisFrame {
  BasisFrame(double phi, int k);

  double phi;
  int k;
  std::array<QTensor, 5> E;
};

Vec5 components(const QTensor& q, const BasisFrame& frame);
QTensor from_components(const Vec5& w, const BasisFrame& frame);

/// Rotation about e3 by angle k*psi/2.
Mat3 rotation_k(double psi, int k);

/// R_k(psi) Q R_k(psi)^t.
QTensor rotate_tensor(const QTensor& q, double psi, int k);

struct OseenFrank {
  double K1, K2, K3, K4;
  bool ericksen_ok;
};

OseenFrank oseen_frank_constants(double L1, double L2, double L3);

}  // namespace ldg
