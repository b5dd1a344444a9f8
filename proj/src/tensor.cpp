#include "ldg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ldg {

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kSqrt3 = std::sqrt(3.0);
const double kSqrt6 = std::sqrt(6.0);

Mat3 sym_outer(const Vec3& a, const Vec3& b) { return a * b.transpose() + b * a.transpose(); }

}  // namespace

QTensor::QTensor(const Mat3& m) : m_(m) {
  const double scale = 1e-12 * (1.0 + m.norm());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > scale)
    throw std::invalid_argument("QTensor: matrix is not symmetric");
  if (std::abs(m.trace()) > scale) throw std::invalid_argument("QTensor: matrix is not traceless");
  if (!m.allFinite()) throw std::invalid_argument("QTensor: non-finite entry");
}

QTensor QTensor::project(const Mat3& m) {
  Mat3 s = 0.5 * (m + m.transpose());
  s -= (s.trace() / 3.0) * Mat3::Identity();
  return QTensor(s, Unchecked{});
}

QTensor QTensor::uniaxial(double s, const Vec3& director) {
  Vec3 n = director.normalized();
  return QTensor::project(s * (n * n.transpose() - Mat3::Identity() / 3.0));
}

const std::array<Mat3, 5>& lab_basis() {
  static const std::array<Mat3, 5> basis = [] {
    Vec3 e1 = Vec3::UnitX(), e2 = Vec3::UnitY(), e3 = Vec3::UnitZ();
    std::array<Mat3, 5> b;
    b[0] = std::sqrt(1.5) * (e3 * e3.transpose() - Mat3::Identity() / 3.0);
    b[1] = (e1 * e1.transpose() - e2 * e2.transpose()) / kSqrt2;
    b[2] = sym_outer(e1, e2) / kSqrt2;
    b[3] = sym_outer(e1, e3) / kSqrt2;
    b[4] = sym_outer(e2, e3) / kSqrt2;
    return b;
  }();
  return basis;
}

QTensor QTensor::from_lab(const Vec5& q) {
  const auto& T = lab_basis();
  Mat3 m = Mat3::Zero();
  for (int a = 0; a < 5; ++a) m += q[a] * T[a];
  return QTensor(m, Unchecked{});
}

Vec5 QTensor::lab_coefficients() const {
  const auto& T = lab_basis();
  Vec5 q;
  for (int a = 0; a < 5; ++a) q[a] = m_.cwiseProduct(T[a]).sum();
  return q;
}

void MaterialParams::validate() const {
  if (!(c2 > 0)) throw std::invalid_argument("c2 must be positive");
  if (a2 < 0 || b2 < 0) throw std::invalid_argument("a2 and b2 must be nonnegative");
  if (!(L > 0)) throw std::invalid_argument("L must be positive");
  if (!(L + 4.0 * M / 3.0 > 0)) throw std::invalid_argument("L + 4M/3 must be positive");
  if (k == 0) throw std::invalid_argument("winding number k must be nonzero");
  if (!(R > 0)) throw std::invalid_argument("R must be positive");
}

double s_plus(const MaterialParams& p) {
  return (p.b2 + std::sqrt(p.b2 * p.b2 + 24.0 * p.a2 * p.c2)) / (4.0 * p.c2);
}

double bulk_potential(const QTensor& q, const MaterialParams& p) {
  const double t2 = q.trace_sq();
  return -0.5 * p.a2 * t2 - p.b2 / 3.0 * q.trace_cube() + 0.25 * p.c2 * t2 * t2;
}

QTensor bulk_gradient(const QTensor& q, const MaterialParams& p) {
  const Mat3& m = q.matrix();
  const double t2 = q.trace_sq();
  Mat3 g = (-p.a2 + p.c2 * t2) * m - p.b2 * (m * m - t2 / 3.0 * Mat3::Identity());
  return QTensor::project(g);
}

// tr Q^3 = sqrt6/12 * cubic(q) in the lab basis.
static double lab_cubic(const Vec5& w) {
  return 2 * w[0] * w[0] * w[0] - 6 * w[0] * (w[1] * w[1] + w[2] * w[2]) + 3 * w[0] * (w[3] * w[3] + w[4] * w[4]) +
         3 * kSqrt3 * w[1] * (w[3] * w[3] - w[4] * w[4]) + 6 * kSqrt3 * w[2] * w[3] * w[4];
}

static Vec5 lab_cubic_grad(const Vec5& w) {
  Vec5 g;
  g[0] = 6 * w[0] * w[0] - 6 * (w[1] * w[1] + w[2] * w[2]) + 3 * (w[3] * w[3] + w[4] * w[4]);
  g[1] = -12 * w[0] * w[1] + 3 * kSqrt3 * (w[3] * w[3] - w[4] * w[4]);
  g[2] = -12 * w[0] * w[2] + 6 * kSqrt3 * w[3] * w[4];
  g[3] = 6 * w[0] * w[3] + 6 * kSqrt3 * w[1] * w[3] + 6 * kSqrt3 * w[2] * w[4];
  g[4] = 6 * w[0] * w[4] - 6 * kSqrt3 * w[1] * w[4] + 6 * kSqrt3 * w[2] * w[3];
  return g;
}

static Mat5 lab_cubic_hessian(const Vec5& w) {
  Mat5 H = Mat5::Zero();
  H(0, 0) = 12 * w[0];
  H(0, 1) = H(1, 0) = -12 * w[1];
  H(0, 2) = H(2, 0) = -12 * w[2];
  H(0, 3) = H(3, 0) = 6 * w[3];
  H(0, 4) = H(4, 0) = 6 * w[4];
  H(1, 1) = H(2, 2) = -12 * w[0];
  H(1, 3) = H(3, 1) = 6 * kSqrt3 * w[3];
  H(1, 4) = H(4, 1) = -6 * kSqrt3 * w[4];
  H(2, 3) = H(3, 2) = 6 * kSqrt3 * w[4];
  H(2, 4) = H(4, 2) = 6 * kSqrt3 * w[3];
  H(3, 3) = 6 * w[0] + 6 * kSqrt3 * w[1];
  H(4, 4) = 6 * w[0] - 6 * kSqrt3 * w[1];
  H(3, 4) = H(4, 3) = 6 * kSqrt3 * w[2];
  return H;
}

double bulk_potential_lab(const Vec5& q, const MaterialParams& p) {
  const double t2 = q.squaredNorm();
  return -0.5 * p.a2 * t2 - p.b2 * kSqrt6 / 36.0 * lab_cubic(q) + 0.25 * p.c2 * t2 * t2;
}

Vec5 bulk_gradient_lab(const Vec5& q, const MaterialParams& p) {
  return (-p.a2 + p.c2 * q.squaredNorm()) * q - p.b2 * kSqrt6 / 36.0 * lab_cubic_grad(q);
}

Mat5 bulk_hessian_lab(const Vec5& q, const MaterialParams& p) {
  return (-p.a2 + p.c2 * q.squaredNorm()) * Mat5::Identity() + 2 * p.c2 * q * q.transpose() -
         p.b2 * kSqrt6 / 36.0 * lab_cubic_hessian(q);
}

double biaxiality(const QTensor& q) {
  const double t2 = q.trace_sq();
  if (std::sqrt(t2) < 1e-12) return 0.0;
  const double t3 = q.trace_cube();
  return std::clamp(1.0 - 6.0 * t3 * t3 / (t2 * t2 * t2), 0.0, 1.0);
}

QTensor boundary_data(double phi, const MaterialParams& p) {
  const double th = 0.5 * p.k * phi;
  return QTensor::uniaxial(s_plus(p), Vec3(std::cos(th), std::sin(th), 0.0));
}

BasisFrame::BasisFrame(double phi_, int k_) : phi(phi_), k(k_) {
  const auto& T = lab_basis();
  const double c = std::cos(k * phi), s = std::sin(k * phi);
  E[0] = QTensor::from_lab((Vec5() << 1, 0, 0, 0, 0).finished());
  E[1] = QTensor::from_lab((Vec5() << 0, c, s, 0, 0).finished());
  E[2] = QTensor::from_lab((Vec5() << 0, -s, c, 0, 0).finished());
  if (k % 2 == 0) {
    const double ch = std::cos(0.5 * k * phi), sh = std::sin(0.5 * k * phi);
    E[3] = QTensor::from_lab((Vec5() << 0, 0, 0, ch, sh).finished());
    E[4] = QTensor::from_lab((Vec5() << 0, 0, 0, -sh, ch).finished());
  } else {
    E[3] = QTensor(T[3]);
    E[4] = QTensor(T[4]);
  }
}

Vec5 components(const QTensor& q, const BasisFrame& frame) {
  Vec5 w;
  for (int i = 0; i < 5; ++i) w[i] = q.dot(frame.E[i]);
  return w;
}

QTensor from_components(const Vec5& w, const BasisFrame& frame) {
  QTensor q;
  for (int i = 0; i < 5; ++i) q += w[i] * frame.E[i];
  return q;
}

Mat3 rotation_k(double psi, int k) {
  const double a = 0.5 * k * psi;
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

QTensor rotate_tensor(const QTensor& q, double psi, int k) {
  Mat3 r = rotation_k(psi, k);
  return QTensor::project(r * q.matrix() * r.transpose());
}

OseenFrank oseen_frank_constants(double L1, double L2, double L3) {
  OseenFrank of;
  of.K1 = of.K3 = L1 + 0.5 * (L2 + L3);
  of.K2 = L1;
  of.K4 = 0.5 * L2;
  of.ericksen_ok = 2.0 * of.K1 > of.K2 + of.K4 && of.K2 + of.K4 > 0.0;
  return of;
}

}  // namespace ldg
