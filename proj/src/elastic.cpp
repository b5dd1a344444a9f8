#include "ldg/elastic.hpp"

#include "ldg/field_solver.hpp"

#include <cmath>
#include <stdexcept>

namespace ldg {

GradientQ GradientQ::from_lab(const Eigen::Matrix<double, 5, 2>& g) {
  const auto& T = lab_basis();
  GradientQ out;
  for (int m = 0; m < 2; ++m)
    for (int a = 0; a < 5; ++a) out.d[m] += g(a, m) * T[a];
  return out;
}

void GradientQ::validate() const {
  for (const auto& m : d) QTensor check(m);
}

Invariants elastic_invariants(const GradientQ& g) {
  Invariants inv{0, 0, 0};
  for (int m = 0; m < 2; ++m) inv.I1 += g.d[m].squaredNorm();
  for (int i = 0; i < 3; ++i) {
    double div = 0;
    for (int j = 0; j < 2; ++j) {
      div += g.d[j](i, j);
      for (int k = 0; k < 2; ++k) inv.I2 += g.d[j](i, k) * g.d[k](i, j);
    }
    inv.I3 += div * div;
  }
  return inv;
}

double elastic_density(const GradientQ& g, const ElasticTriple& t) {
  const auto inv = elastic_invariants(g);
  return 0.5 * (t.L1 * inv.I1 + t.L2 * inv.I2 + t.L3 * inv.I3);
}

Eigen::MatrixXd elastic_matrix(const ElasticTriple& t, int dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("elastic_matrix: dim must be 2 or 3");
  const auto& T = lab_basis();
  const int n = 5 * dim;
  Eigen::MatrixXd K = t.L1 * Eigen::MatrixXd::Identity(n, n);
  for (int a = 0; a < 5; ++a)
    for (int j = 0; j < dim; ++j)
      for (int b = 0; b < 5; ++b)
        for (int k = 0; k < dim; ++k) {
          double i2 = 0, i3 = 0;
          for (int i = 0; i < 3; ++i) {
            i2 += T[a](i, k) * T[b](i, j);
            i3 += T[a](i, j) * T[b](i, k);
          }
          K(a + 5 * j, b + 5 * k) += t.L2 * i2 + t.L3 * i3;
        }
  return 0.5 * (K + K.transpose());
}

CoercivityResult coercivity_pointwise(const ElasticTriple& t, int dim) {
  CoercivityResult res;
  res.ok = t.L1 + t.L2 > 0 && 2 * t.L1 - t.L2 > 0 && t.L1 + t.L2 / 6.0 + 5.0 * t.L3 / 3.0 > 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(elastic_matrix(t, dim), Eigen::EigenvaluesOnly);
  res.mu0 = 0.5 * es.eigenvalues().minCoeff();
  return res;
}

bool coercivity_dirichlet(double L, double M) { return L > 0 && L + 4.0 * M / 3.0 > 0; }

double null_lagrangian_volume(const Field2D& f) {
  const auto& m = f.mesh();
  const Eigen::MatrixXd K = elastic_matrix({0.0, 1.0, -1.0}, 2);
  double vol = 0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto G = f.element_gradient(t);
    Eigen::Matrix<double, 10, 1> g;
    g << G.col(0), G.col(1);
    vol += m.area[t] * g.dot(K * g);
  }
  return vol;
}

NullLagrangian null_lagrangian_check(const Field2D& f, const std::function<QTensor(double)>& trace,
                                     int boundary_points) {
  NullLagrangian out;
  out.volume = null_lagrangian_volume(f);
  const MaterialParams p = f.params();
  auto Qb = trace ? trace : [&p](double phi) { return boundary_data(phi, p); };
  const double R = f.mesh().R;
  const double dphi = 2 * M_PI / boundary_points, d = 1e-3;
  double sum = 0;
  for (int s = 0; s < boundary_points; ++s) {
    const double phi = s * dphi;
    const Mat3 Q = Qb(phi).matrix();
    const Mat3 dQ = (-Qb(phi + 2 * d).matrix() + 8 * Qb(phi + d).matrix() - 8 * Qb(phi - d).matrix() +
                     Qb(phi - 2 * d).matrix()) /
                    (12 * d * R);
    const Vec3 t(-std::sin(phi), std::cos(phi), 0), n(std::cos(phi), std::sin(phi), 0);
    double val = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l) val += t[j] * (dQ(i, l) * Q(i, j) - dQ(i, j) * Q(i, l)) * n[l];
    sum += val;
  }
  out.boundary = sum * dphi * R;
  return out;
}

NodalResidual el_residual(const Field2D& f) {
  const auto& m = f.mesh();
  const auto grad = total_gradient(f);
  NodalResidual out;
  out.residual.assign(m.num_nodes(), QTensor());
  out.l2_norm = 0;
  out.max_norm = 0;
  for (int i = 0; i < m.num_nodes(); ++i) {
    if (m.is_boundary[i]) {
      out.excluded.push_back(i);
      continue;
    }
    const Vec5 r = -grad.col(i) / m.lumped_mass[i];
    out.residual[i] = QTensor::from_lab(r);
    out.l2_norm += m.lumped_mass[i] * r.squaredNorm();
    out.max_norm = std::max(out.max_norm, r.norm());
  }
  out.l2_norm = std::sqrt(out.l2_norm);
  return out;
}

double ModeCoefficients::off_mode_norm() const {
  return std::sqrt(e0_cos * e0_cos + e0_sin * e0_sin + e1_cos * e1_cos + e2_sin * e2_sin);
}

ModeCoefficients mode_coupling(int k, double r, const RadialJet& w0, const RadialJet& w1, const RadialJet& w2) {
  if (k == 0) throw std::invalid_argument("mode_coupling: k must be nonzero");
  const double s3 = std::sqrt(3.0);
  auto mixed = [&](const RadialJet& w) {
    return w.d2w + (2.0 * k - 1.0) * w.dw / r + k * (k - 2.0) * w.w / (r * r);
  };
  auto bessel = [&](const RadialJet& w) { return w.d2w + w.dw / r - double(k) * k * w.w / (r * r); };
  const double d0 = w0.d2w - w0.dw / r;
  ModeCoefficients c;
  c.e0_const = (w0.d2w + w0.dw / r) / 3.0;
  c.e0_cos = -mixed(w1) / s3;
  c.e0_sin = mixed(w2) / s3;
  c.e1_const = bessel(w1);
  c.e1_cos = -d0 / s3;
  c.e2_const = bessel(w2);
  c.e2_sin = d0 / s3;
  if (k == 2) {
    // cos(0) = 1 and sin(0) = 0: the angular modes collapse onto the constants.
    c.e0_const += c.e0_cos;
    c.e1_const += c.e1_cos;
    c.e0_cos = c.e0_sin = c.e1_cos = c.e2_sin = 0;
  }
  return c;
}

namespace {

// H[a][b] = d_a d_b Q for a, b in {0, 1}.
std::array<std::array<Mat3, 2>, 2> hessian_stencil(const std::function<QTensor(const Vec2&)>& q, const Vec2& x,
                                                   double h) {
  const Vec2 ex(h, 0), ey(0, h);
  const Mat3 c = q(x).matrix();
  std::array<std::array<Mat3, 2>, 2> H;
  H[0][0] = (q(x + ex).matrix() - 2 * c + q(x - ex).matrix()) / (h * h);
  H[1][1] = (q(x + ey).matrix() - 2 * c + q(x - ey).matrix()) / (h * h);
  H[0][1] = (q(x + ex + ey).matrix() - q(x + ex - ey).matrix() - q(x - ex + ey).matrix() +
             q(x - ex - ey).matrix()) /
            (4 * h * h);
  H[1][0] = H[0][1];
  return H;
}

}  // namespace

QTensor lop_stencil(const std::function<QTensor(const Vec2&)>& q, const Vec2& x, double h) {
  const auto H = hessian_stencil(q, x, h);
  // v_i = d_j d_k Q_ik summed over planar k, as a function of the planar index j.
  Mat3 A = Mat3::Zero();  // A(i, j) = sum_k d_j d_k Q_ik, zero for j = 2
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) A(i, j) += H[j][k](i, k);
  double dd = 0;
  for (int l = 0; l < 2; ++l) dd += A(l, l);
  Mat3 L = A + A.transpose() - (2.0 / 3.0) * dd * Mat3::Identity();
  return QTensor::project(L);
}

QTensor laplacian_stencil(const std::function<QTensor(const Vec2&)>& q, const Vec2& x, double h) {
  const auto H = hessian_stencil(q, x, h);
  return QTensor::project(H[0][0] + H[1][1]);
}

ZExtension z_extension_residual(const Field2D& f, double L2, double L3) {
  const auto grads = f.recovered_gradients();
  ZExtension out;
  out.norm.resize(grads.size());
  out.max_norm = 0;
  for (size_t n = 0; n < grads.size(); ++n) {
    const GradientQ g = GradientQ::from_lab(grads[n]);
    auto dQ = [&](int m, int i, int j) { return m < 2 ? g.d[m](i, j) : 0.0; };
    Vec3 div = Vec3::Zero();
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 2; ++k) div[i] += g.d[k](i, k);
    Mat3 T;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        T(i, j) = L2 * (dQ(j, i, 2) + dQ(i, j, 2)) + L3 * (div[i] * (j == 2) + div[j] * (i == 2));
    out.norm[n] = T.norm();
    out.max_norm = std::max(out.max_norm, out.norm[n]);
  }
  return out;
}

}  // namespace ldg
