#include "ldg/perturbation.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ldg;
using doctest::Approx;

namespace {

MaterialParams params(int k, double a2 = 400, double R = 5) {
  MaterialParams p;
  p.a2 = a2;
  p.R = R;
  p.k = k;
  return p;
}

using Modes = Eigen::Matrix<double, 5, Eigen::Dynamic>;

Modes random_modes(const SecondVariation& A, std::mt19937& g) {
  Eigen::VectorXd x(A.size());
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < x.size(); ++i) x[i] = n(g);
  return A.unpack(x);
}

// Y as a function of x, from linear interpolation of (u, v).
QTensor y_at(const M0Profile& Y, const Vec2& x) {
  const double r = x.norm(), h = Y.R / (Y.r.size() - 1);
  const int j = std::min(static_cast<int>(r / h), static_cast<int>(Y.r.size()) - 2);
  const double t = r / h - j;
  const double u = (1 - t) * Y.u[j] + t * Y.u[j + 1], v = (1 - t) * Y.v[j] + t * Y.v[j + 1];
  const BasisFrame f(std::atan2(x.y(), x.x()), Y.k);
  return f.E[1] * u + f.E[0] * v;
}

}  // namespace

TEST_CASE("argument validation") {
  MaterialParams p = params(2);
  const M0Result Y = minimize_radial_M0(params(1), 200);
  CHECK_THROWS_AS(solve_perturbation(Y.profile, p), std::invalid_argument);
  p = params(1);
  p.M = 0.1;
  CHECK_THROWS_AS(solve_perturbation(Y.profile, p), std::invalid_argument);
}

TEST_CASE("forcing: zero on zero input, stencil agreement") {
  M0Profile zero;
  zero.k = 1;
  zero.R = 5;
  zero.r = Eigen::VectorXd::LinSpaced(101, 0, 5);
  zero.u = Eigen::VectorXd::Zero(101);
  zero.v = Eigen::VectorXd::Zero(101);
  for (const auto& m : forcing_LY(zero)) {
    CHECK(m.e0_const == 0.0);
    CHECK(m.off_mode_norm() == 0.0);
  }

  for (int k : {-1, 1}) {
    const MaterialParams p = params(k, 1.0, 5.0);
    const M0Result Y = minimize_radial_M0(p, 4000);
    REQUIRE(Y.converged);
    const auto F = forcing_LY(Y.profile);
    const int N = static_cast<int>(Y.profile.r.size()) - 1;
    for (int j : {N / 5, N / 2, 4 * N / 5}) {
      const double r = Y.profile.r[j];
      for (double phi : {0.3, 1.9, 4.4}) {
        const Vec2 x(r * std::cos(phi), r * std::sin(phi));
        const BasisFrame f(phi, k);
        const ModeCoefficients& m = F[j];
        const double cs = std::cos((k - 2) * phi), sn = std::sin((k - 2) * phi);
        const QTensor pred = f.E[0] * (m.e0_const + m.e0_cos * cs + m.e0_sin * sn) +
                             f.E[1] * (m.e1_const + m.e1_cos * cs) + f.E[2] * (m.e2_const + m.e2_sin * sn);
        // forcing is -LY
        const QTensor ref = lop_stencil([&](const Vec2& z) { return y_at(Y.profile, z); }, x, 0.02) * -1.0;
        CHECK((pred - ref).norm() < 2e-3 * (1 + ref.norm()));
      }
    }
  }
}

TEST_CASE("second variation is symmetric and matches the discrete energy") {
  std::mt19937 g(41);
  const MaterialParams p = params(-1);
  const M0Result Y = minimize_radial_M0(p, 400);
  REQUIRE(Y.converged);
  const SecondVariation A(Y.profile, p);
  CHECK(A.bilinear(Modes::Zero(5, 401), random_modes(A, g)) == 0.0);
  for (int n = 0; n < 5; ++n) {
    const Modes v = random_modes(A, g), w = random_modes(A, g);
    const double vw = A.bilinear(v, w), wv = A.bilinear(w, v);
    CHECK(std::abs(vw - wv) < 1e-8 * (std::abs(vw) + 1e-12));
    // second difference of the quartic energy, Richardson over t and 2t
    auto second = [&](double t) { return (A.mode_energy(w, t) - 2 * A.mode_energy(w, 0) + A.mode_energy(w, -t)) / (t * t); };
    const double t = 1e-3, rich = (4 * second(t) - second(2 * t)) / 3;
    CHECK(rich == Approx(A.bilinear(w, w)).epsilon(1e-4));
  }
}

TEST_CASE("first-order correction: solve, positivity and symmetry") {
  const MaterialParams pm = params(-1), pp = params(1);
  const M0Result Ym = minimize_radial_M0(pm, 2000), Yp = minimize_radial_M0(pp, 2000);
  REQUIRE(Ym.converged);
  REQUIRE(Yp.converged);
  const PerturbationResult wm = solve_perturbation(Ym.profile, pm), wp = solve_perturbation(Yp.profile, pp);
  CHECK(wm.residual < 1e-9);
  CHECK(wm.min_eig_radial > 0);
  CHECK(wm.min_eig_nr > 0);
  CHECK(wp.residual < 1e-9);

  const Modes& a = wm.profile.modes;
  const Modes& b = wp.profile.modes;
  const double a_diff = (a.topRows(2) - b.topRows(2)).norm() / b.topRows(2).norm();
  const double b_diff = (a.bottomRows(3) - b.bottomRows(3)).norm() / b.bottomRows(3).norm();
  CHECK(a_diff < 1e-8);
  CHECK(b_diff > 1e-3);
  CHECK(b.bottomRows(3).norm() > 0);

  CHECK(perturbation_symmetry_residual(wm.profile, 2 * M_PI / 3) < 1e-6);

  // radial-only load leaves the symmetry-breaking block at zero
  Modes proj = forcing_projection(Yp.profile);
  proj.bottomRows(3).setZero();
  const PerturbationResult rad = solve_perturbation(Yp.profile, pp, proj);
  CHECK(rad.profile.modes.bottomRows(3).norm() == 0.0);
  CHECK((rad.profile.modes.topRows(2) - b.topRows(2)).norm() < 1e-10 * b.topRows(2).norm());

  // assembled field agrees with pointwise evaluation
  auto mesh = std::make_shared<const DiskMesh>(build_mesh(5.0, 0.5));
  const Field2D W = perturbation_field(mesh, pp, wp.profile);
  for (int i = 0; i < mesh->num_nodes(); i += 7)
    CHECK((W.coeffs().col(i) - wp.profile.tensor_at(mesh->nodes[i])).norm() < 1e-12);
}
