#include "ldg/elastic.hpp"
#include "ldg/field_solver.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ldg;
using doctest::Approx;

namespace {

GradientQ random_gradient(std::mt19937& g) {
  GradientQ q;
  for (int m = 0; m < 2; ++m) q.d[m] = oracle::random_traceless(g);
  return q;
}

// Index loops over the 3x3x2 gradient.
Invariants loops(const GradientQ& g) {
  auto d = [&](int i, int j, int k) { return k < 2 ? g.d[k](i, j) : 0.0; };
  Invariants r{0, 0, 0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        r.I1 += d(i, j, k) * d(i, j, k);
        r.I2 += d(i, k, j) * d(i, j, k);
        r.I3 += d(i, j, j) * d(i, k, k);
      }
  return r;
}

// Minimum of density / I1 over third-order tensors P_ijk (symmetric traceless
// in ij, derivative index k = 1..3): the quadratic form is built by
// polarizing the index-loop density over a 15-dimensional lab parametrization.
double min_quotient(const ElasticTriple& t) {
  const auto& E = lab_basis();
  auto density = [&](const Eigen::Matrix<double, 15, 1>& v) {
    std::array<Mat3, 3> d;
    for (int m = 0; m < 3; ++m) {
      d[m] = Mat3::Zero();
      for (int a = 0; a < 5; ++a) d[m] += v[5 * m + a] * E[a];
    }
    double I1 = 0, I2 = 0, I3 = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          I1 += d[k](i, j) * d[k](i, j);
          I2 += d[j](i, k) * d[k](i, j);
          I3 += d[j](i, j) * d[k](i, k);
        }
    return 0.5 * (t.L1 * I1 + t.L2 * I2 + t.L3 * I3);
  };
  Eigen::Matrix<double, 15, 15> A;
  using V = Eigen::Matrix<double, 15, 1>;
  for (int a = 0; a < 15; ++a)
    for (int b = 0; b < 15; ++b)
      A(a, b) = 0.5 * (density(V::Unit(a) + V::Unit(b)) - density(V::Unit(a)) - density(V::Unit(b)));
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 15, 15>>(A).eigenvalues()[0];
}

}  // namespace

TEST_CASE("invariants: hand example and index oracle") {
  GradientQ g;
  g.d[0].diagonal() << 1, -1, 0;
  const Invariants a = elastic_invariants(g);
  CHECK(a.I1 == Approx(2));
  CHECK(a.I2 == Approx(1));
  CHECK(a.I3 == Approx(1));
  const Invariants z = elastic_invariants(GradientQ{});
  CHECK(z.I1 == 0.0);
  CHECK(z.I2 == 0.0);
  CHECK(z.I3 == 0.0);

  std::mt19937 rng(11);
  for (int n = 0; n < 200; ++n) {
    const GradientQ q = random_gradient(rng);
    const Invariants x = elastic_invariants(q), y = loops(q);
    CHECK(x.I1 >= 0.0);
    CHECK(x.I1 == Approx(q.d[0].squaredNorm() + q.d[1].squaredNorm()));
    CHECK(x.I2 == Approx(y.I2));
    CHECK(x.I3 == Approx(y.I3));
  }
}

TEST_CASE("density, (L, M) form and quadratic matrix") {
  std::mt19937 rng(12);
  CHECK(elastic_density(GradientQ{}, {1, 2, 3}) == 0.0);
  for (int n = 0; n < 100; ++n) {
    const GradientQ q = random_gradient(rng);
    const Invariants I = loops(q);
    CHECK(elastic_density(q, {1.5, 0, 0}) == Approx(0.75 * I.I1));
    const double L = 0.8, M = -0.3;
    CHECK(elastic_density(q, ElasticTriple::from_LM(L, M)) == Approx(0.5 * L * I.I1 + M * I.I2));

    const ElasticTriple t{1.2, 0.7, -0.4};
    const Eigen::MatrixXd K = elastic_matrix(t, 2);
    Eigen::VectorXd v(10);
    for (int m = 0; m < 2; ++m) v.segment<5>(5 * m) = QTensor(q.d[m]).lab_coefficients();
    CHECK(0.5 * v.dot(K * v) == Approx(elastic_density(q, t)));
  }
}

TEST_CASE("coercivity predicates") {
  CHECK(coercivity_pointwise({1, 0, 0}).ok);
  CHECK_FALSE(coercivity_pointwise({1, 2.5, 0}).ok);
  CHECK(coercivity_pointwise({1, 0, -0.5}).ok);
  CHECK(coercivity_dirichlet(1, 0));
  CHECK_FALSE(coercivity_dirichlet(1, -0.75));
  CHECK(coercivity_dirichlet(1, -0.74));

  for (const ElasticTriple t : {ElasticTriple{1, 0, 0}, ElasticTriple{1, 1, 0}, ElasticTriple{1, -0.5, 0.3},
                                ElasticTriple{1, 2.5, 0}, ElasticTriple{0.3, 0.2, -1.0}}) {
    const CoercivityResult c = coercivity_pointwise(t);
    CHECK(c.mu0 == Approx(min_quotient(t)).epsilon(1e-8));
  }
}

TEST_CASE("mode coupling: hand value, collapse at k = 2 and stencil agreement") {
  // k = 1, w0 = r^3: E1 coefficient of L(w0 E0) is -sqrt3 r
  const double r = 0.7;
  const ModeCoefficients c = mode_coupling(1, r, {r * r * r, 3 * r * r, 6 * r}, {});
  CHECK(c.e1_const + c.e1_cos == Approx(-std::sqrt(3.0) * r));

  // w0 = r^2 gives zero there
  const ModeCoefficients c2 = mode_coupling(1, r, {r * r, 2 * r, 2.0}, {});
  CHECK(std::abs(c2.e1_const + c2.e1_cos) < 1e-13);

  for (int k : {-1, 1, 2, 3}) {
    auto w0 = [](double s) { return -0.3 * std::exp(-s * s); };
    auto w1 = [](double s) { return 0.5 * s * s * std::exp(-0.5 * s * s); };
    auto field = [&](const Vec2& x) {
      const double s = x.norm();
      const BasisFrame f(std::atan2(x.y(), x.x()), k);
      return f.E[0] * w0(s) + f.E[1] * w1(s);
    };
    const double rr = 0.9, d = 1e-5;
    auto jet = [&](auto w) {
      return RadialJet{w(rr), (w(rr + d) - w(rr - d)) / (2 * d), (w(rr + d) - 2 * w(rr) + w(rr - d)) / (d * d)};
    };
    const ModeCoefficients m = mode_coupling(k, rr, jet(w0), jet(w1));
    if (k == 2) {
      CHECK(std::abs(m.e0_cos) + std::abs(m.e0_sin) + std::abs(m.e1_cos) + std::abs(m.e2_sin) < 1e-14);
    }
    for (double phi : {0.0, 0.4, 2.1, 4.0}) {
      const Vec2 x(rr * std::cos(phi), rr * std::sin(phi));
      const BasisFrame f(phi, k);
      const double cs = std::cos((k - 2) * phi), sn = std::sin((k - 2) * phi);
      const QTensor pred = f.E[0] * (m.e0_const + m.e0_cos * cs + m.e0_sin * sn) +
                           f.E[1] * (m.e1_const + m.e1_cos * cs) + f.E[2] * (m.e2_const + m.e2_sin * sn);
      const QTensor ref = lop_stencil(field, x, 1e-3);
      CHECK((pred - ref).norm() < 1e-4 * (1 + ref.norm()));
    }
  }
}

TEST_CASE("null Lagrangian identity and z-extension") {
  MaterialParams p;
  p.k = 2;
  p.R = 1;
  auto mesh = std::make_shared<const DiskMesh>(build_mesh(1.0, 0.05));
  // constant field on a constant trace
  const QTensor c = QTensor::uniaxial(0.8, Vec3(1, 1, 0).normalized());
  Field2D fc(mesh, p);
  for (int i = 0; i < fc.num_nodes(); ++i) fc.set_q(i, c);
  const NullLagrangian n0 = null_lagrangian_check(fc, [&](double) { return c; });
  CHECK(std::abs(n0.volume) < 1e-12);
  CHECK(std::abs(n0.boundary) < 1e-12);
  CHECK(z_extension_residual(fc, 2.0, 1.0).max_norm < 1e-12);

  // r-independent extension of the boundary data
  const Field2D fb = field_from_function(mesh, p, [&](const Vec2& x) {
    return x.norm() < 1e-14 ? QTensor() : boundary_data(std::atan2(x.y(), x.x()), p);
  });
  const NullLagrangian nb = null_lagrangian_check(fb);
  CHECK(nb.volume == Approx(nb.boundary).epsilon(5e-2));

  // L2 = L3 = 0 kills the z-extension residual on any field
  CHECK(z_extension_residual(fb, 0.0, 0.0).max_norm == 0.0);
}

TEST_CASE("Euler-Lagrange residual vanishes on a constant minimizer") {
  MaterialParams p;
  p.R = 1;
  auto mesh = std::make_shared<const DiskMesh>(build_mesh(1.0, 0.2));
  const QTensor u = QTensor::uniaxial(s_plus(p), Vec3(0, 0, 1));
  Field2D g(mesh, p);
  for (int i = 0; i < g.num_nodes(); ++i) g.set_q(i, u);
  CHECK(el_residual(g).max_norm < 1e-8);
}
