#include "ldg/tensor.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace ldg;
using doctest::Approx;

namespace {

MaterialParams bulk_params(double a2, double b2, double c2) {
  MaterialParams p;
  p.a2 = a2;
  p.b2 = b2;
  p.c2 = c2;
  return p;
}

std::vector<double> sorted_eigs(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(m);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + 3);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("QTensor validates symmetry and trace") {
  Mat3 m = Mat3::Zero();
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(QTensor{m}, std::invalid_argument);
  CHECK_THROWS_AS(QTensor{Mat3::Identity()}, std::invalid_argument);
  const QTensor p = QTensor::project(m + Mat3::Identity());
  CHECK(p.matrix().trace() == Approx(0.0).epsilon(1e-15));
  CHECK((p.matrix() - p.matrix().transpose()).norm() == 0.0);
}

TEST_CASE("lab basis is orthonormal, traceless and round-trips") {
  const auto& E = lab_basis();
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(E[i].trace()) < 1e-14);
    for (int j = 0; j < 5; ++j) CHECK((E[i] * E[j]).trace() == Approx(i == j ? 1.0 : 0.0));
  }
  std::mt19937 g(1);
  for (int n = 0; n < 50; ++n) {
    const Mat3 m = oracle::random_traceless(g);
    CHECK((QTensor::from_lab(QTensor(m).lab_coefficients()).matrix() - m).norm() < 1e-13);
  }
}

TEST_CASE("s_plus closed form") {
  CHECK(s_plus(bulk_params(1, 0, 1)) == Approx(std::sqrt(6.0) / 2));
  CHECK(s_plus(bulk_params(1, 1, 1)) == Approx(1.5));
  CHECK(s_plus(bulk_params(0, 0, 1)) == 0.0);
}

TEST_CASE("bulk potential against trace oracle") {
  const MaterialParams p = bulk_params(1, 0, 1);
  CHECK(bulk_potential(QTensor(), p) == 0.0);
  const QTensor u = QTensor::uniaxial(s_plus(p), Vec3(0.3, -0.2, 0.9).normalized());
  CHECK(bulk_potential(u, p) == Approx(-0.25));

  std::mt19937 g(2);
  for (double b2 : {0.0, 0.7, 3.0}) {
    const MaterialParams q = bulk_params(1.3, b2, 0.8);
    for (int n = 0; n < 30; ++n) {
      const Mat3 m = oracle::random_traceless(g);
      CHECK(bulk_potential(QTensor(m), q) == Approx(oracle::bulk(m, 1.3, b2, 0.8)).epsilon(1e-12));
      CHECK(bulk_potential_lab(QTensor(m).lab_coefficients(), q) == Approx(oracle::bulk(m, 1.3, b2, 0.8)).epsilon(1e-12));
    }
  }
}

TEST_CASE("bulk gradient and Hessian match finite differences") {
  std::mt19937 g(3);
  const MaterialParams p = bulk_params(1.0, 1.0, 1.0);
  CHECK(bulk_gradient(QTensor(), p).norm() == 0.0);
  CHECK(bulk_gradient(QTensor::uniaxial(s_plus(p), Vec3(1, 2, 3).normalized()), p).norm() < 1e-10);
  const double h = 1e-6;
  for (int n = 0; n < 100; ++n) {
    const Vec5 q = QTensor(oracle::random_traceless(g)).lab_coefficients();
    const Vec5 gr = bulk_gradient_lab(q, p);
    Vec5 fd;
    for (int a = 0; a < 5; ++a) {
      Vec5 e = Vec5::Zero();
      e[a] = h;
      fd[a] = (oracle::bulk(QTensor::from_lab(q + e).matrix(), 1, 1, 1) -
               oracle::bulk(QTensor::from_lab(q - e).matrix(), 1, 1, 1)) / (2 * h);
    }
    CHECK((gr - fd).norm() <= 1e-6 * (1 + gr.norm()));
    // matrix form agrees with the lab form
    CHECK((bulk_gradient(QTensor::from_lab(q), p).lab_coefficients() - gr).norm() < 1e-12 * (1 + gr.norm()));

    const Mat5 H = bulk_hessian_lab(q, p);
    Mat5 Hfd;
    for (int a = 0; a < 5; ++a) {
      Vec5 e = Vec5::Zero();
      e[a] = h;
      Hfd.col(a) = (bulk_gradient_lab(q + e, p) - bulk_gradient_lab(q - e, p)) / (2 * h);
    }
    CHECK((H - Hfd).norm() <= 1e-6 * (1 + H.norm()));
    CHECK((H - H.transpose()).norm() < 1e-13);
  }
}

TEST_CASE("biaxiality bounds and special values") {
  CHECK(biaxiality(QTensor()) == 0.0);
  CHECK(biaxiality(QTensor::uniaxial(-0.7, Vec3(0, 1, 1).normalized())) < 1e-12);
  Mat3 d = Mat3::Zero();
  d(0, 0) = 0.4;
  d(1, 1) = -0.4;
  CHECK(biaxiality(QTensor(d)) == Approx(1.0));
  std::mt19937 g(4);
  for (int n = 0; n < 2000; ++n) {
    const Mat3 m = oracle::random_traceless(g);
    const double b = biaxiality(QTensor(m));
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
    CHECK(b == Approx(std::clamp(oracle::beta(m), 0.0, 1.0)).epsilon(1e-9));
  }
}

TEST_CASE("boundary data") {
  MaterialParams p = bulk_params(1, 0, 1);
  p.k = 2;
  const double s = std::sqrt(6.0) / 2;
  Mat3 ref = Mat3::Zero();
  ref.diagonal() << 2.0 / 3, -1.0 / 3, -1.0 / 3;
  CHECK((boundary_data(0.0, p).matrix() - s * ref).norm() < 1e-14);

  p.k = 1;
  std::mt19937 g(5);
  std::uniform_real_distribution<double> U(0, 2 * M_PI);
  for (int n = 0; n < 100; ++n) {
    const double phi = U(g);
    const QTensor q = boundary_data(phi, p);
    CHECK((q.matrix() - boundary_data(phi + 2 * M_PI, p).matrix()).norm() < 1e-13);
    const auto ev = sorted_eigs(q.matrix());
    CHECK(ev[0] == Approx(-s / 3));
    CHECK(ev[1] == Approx(-s / 3));
    CHECK(ev[2] == Approx(2 * s / 3));
  }
}

TEST_CASE("moving frame expansion") {
  MaterialParams p = bulk_params(1, 0, 1);
  const double s = s_plus(p);
  std::mt19937 g(6);
  std::uniform_real_distribution<double> U(0, 2 * M_PI);
  for (int k : {-1, 1, 2, 3}) {
    p.k = k;
    for (int n = 0; n < 50; ++n) {
      const BasisFrame f(U(g), k);
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) CHECK(f.E[i].dot(f.E[j]) == Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
      const QTensor q(oracle::random_traceless(g));
      CHECK((from_components(components(q, f), f).matrix() - q.matrix()).norm() < 1e-12);
      Vec5 w = Vec5::Zero();
      w[0] = -s / std::sqrt(6.0);
      w[1] = s / std::sqrt(2.0);
      CHECK((from_components(w, f).matrix() - boundary_data(f.phi, p).matrix()).norm() < 1e-12);
    }
  }
  CHECK(from_components(Vec5::Zero(), BasisFrame(0.3, 2)).norm() == 0.0);
}

TEST_CASE("rotations transport the frame") {
  std::mt19937 g(7);
  std::uniform_real_distribution<double> U(0, 2 * M_PI);
  for (int k : {-1, 1, 2, 3}) {
    for (int n = 0; n < 30; ++n) {
      const QTensor q(oracle::random_traceless(g));
      const double phi = U(g), psi = U(g);
      CHECK((rotate_tensor(q, 0.0, k).matrix() - q.matrix()).norm() < 1e-14);
      const QTensor r = rotate_tensor(q, psi, k);
      const auto e0 = sorted_eigs(q.matrix()), e1 = sorted_eigs(r.matrix());
      for (int i = 0; i < 3; ++i) CHECK(e0[i] == Approx(e1[i]).epsilon(1e-12));
      // components in frame(phi + psi) after rotation == components in frame(phi)
      // before; for odd k only E0..E2 move with the frame
      const Vec5 a = components(q, BasisFrame(phi, k)), b = components(r, BasisFrame(phi + psi, k));
      const int n_moving = k % 2 == 0 ? 5 : 3;
      CHECK((a - b).head(n_moving).norm() < 1e-12);
    }
  }
}

TEST_CASE("Oseen-Frank constants") {
  const OseenFrank a = oseen_frank_constants(1, 0, 0);
  CHECK(a.K1 == Approx(1));
  CHECK(a.K2 == Approx(1));
  CHECK(a.K3 == Approx(1));
  CHECK(a.K4 == Approx(0));
  CHECK(a.ericksen_ok);
  const OseenFrank b = oseen_frank_constants(1, 2, 0);
  CHECK(b.K1 == Approx(2));
  CHECK(b.K2 == Approx(1));
  CHECK(b.K3 == Approx(2));
  CHECK(b.K4 == Approx(1));
  CHECK(b.ericksen_ok);
  const OseenFrank c = oseen_frank_constants(1, -4, 0);
  CHECK(c.K4 == Approx(-2));
  CHECK_FALSE(c.ericksen_ok);
}

TEST_CASE("parameter validation") {
  MaterialParams p;
  CHECK_NOTHROW(p.validate());
  p.c2 = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.M = -0.75;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.M = -0.74;
  CHECK_NOTHROW(p.validate());
  p = {};
  p.k = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.R = -1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
