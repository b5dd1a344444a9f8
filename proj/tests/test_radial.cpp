#include "ldg/radial.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ldg;
using doctest::Approx;

namespace {

MaterialParams params(double b2, double M, double R, int k = 2) {
  MaterialParams p;
  p.b2 = b2;
  p.M = M;
  p.R = R;
  p.k = k;
  return p;
}

RadialProfile smooth_profile(const MaterialParams& p, int N) {
  RadialProfile q = RadialProfile::zeros(N, p.R, p.k);
  const double s = s_plus(p);
  for (int j = 0; j <= N; ++j) {
    const double t = q.r[j] / p.R;
    q.w(0, j) = -s / std::sqrt(6.0) * t * t;
    q.w(1, j) = s / std::sqrt(2.0) * t * t;
  }
  return q;
}

// Random admissible perturbation of a profile: interior values only, w0(0) free.
RadialProfile perturbed(RadialProfile q, std::mt19937& g, double amp) {
  std::normal_distribution<double> n(0.0, amp);
  for (int j = 0; j < q.N(); ++j)
    for (int i = 0; i < 5; ++i)
      if (j > 0 || i == 0) q.w(i, j) += n(g);
  return q;
}

// Composite Gauss-Legendre (5 points per cell) of the reduced M = 0 density
// for w0 E0 + w1 E1: (1/2)(w0'^2 + w1'^2 + k^2 w1^2 / r^2) + f_B.
double smooth_profile_oracle(const MaterialParams& p) {
  static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  static const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665, 0.2369268850561891};
  const double s = s_plus(p), R = p.R, A = -s / std::sqrt(6.0), B = s / std::sqrt(2.0);
  const int cells = 400;
  double E = 0;
  for (int c = 0; c < cells; ++c) {
    const double lo = c * R / cells, hi = (c + 1) * R / cells;
    for (int g = 0; g < 5; ++g) {
      const double r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x[g], t = r / R;
      const double w0 = A * t * t, w1 = B * t * t, d0 = 2 * A * t / R, d1 = 2 * B * t / R;
      const BasisFrame f(0.0, p.k);
      const Mat3 q = (f.E[0] * w0 + f.E[1] * w1).matrix();
      const double dens = 0.5 * (d0 * d0 + d1 * d1 + p.k * p.k * w1 * w1 / (r * r)) + oracle::bulk(q, p.a2, p.b2, p.c2);
      E += 0.5 * (hi - lo) * w[g] * dens * r;
    }
  }
  return E;
}

}  // namespace

TEST_CASE("reduced energy converges to a high-order quadrature oracle") {
  const MaterialParams p = params(0, 0, 1);
  const double ref = smooth_profile_oracle(p);
  const double e1 = std::abs(radial_energy(smooth_profile(p, 50), p) - ref);
  const double e2 = std::abs(radial_energy(smooth_profile(p, 100), p) - ref);
  const double e3 = std::abs(radial_energy(smooth_profile(p, 200), p) - ref);
  CHECK(e1 < 1e-2);
  CHECK(e1 / e2 == Approx(4.0).epsilon(0.25));
  CHECK(e2 / e3 == Approx(4.0).epsilon(0.25));
}

TEST_CASE("standard and rewritten forms agree") {
  std::mt19937 g(21);
  for (double M : {-0.5, 0.3, 5.0}) {
    const MaterialParams p = params(1, M, 10);
    for (int n = 0; n < 10; ++n) {
      const RadialProfile q = perturbed(smooth_profile(p, 200), g, 0.05);
      const double a = radial_energy(q, p, EnergyForm::Standard), b = radial_energy(q, p, EnergyForm::Rewritten);
      CHECK(std::abs(a - b) < 1e-10 * (1 + std::abs(a)));
    }
  }
}

TEST_CASE("radial gradient and Hessian match finite differences") {
  std::mt19937 g(22);
  for (double M : {-0.4, 0.0, 2.0}) {
    const MaterialParams p = params(1, M, 5);
    const RadialProfile q = perturbed(smooth_profile(p, 40), g, 0.1);
    const auto G = radial_energy_gradient(q, p);
    Eigen::Matrix<double, 5, Eigen::Dynamic> v = Eigen::Matrix<double, 5, Eigen::Dynamic>::Zero(5, q.N() + 1);
    std::normal_distribution<double> n(0, 1);
    for (int j = 0; j < q.N(); ++j)
      for (int i = 0; i < 5; ++i)
        if (j > 0 || i == 0) v(i, j) = n(g);
    const double t = 1e-5;
    RadialProfile qp = q, qm = q;
    qp.w += t * v;
    qm.w += -t * v;
    const double fd = (radial_energy(qp, p) - radial_energy(qm, p)) / (2 * t);
    const double an = (G.cwiseProduct(v)).sum();
    CHECK(std::abs(fd - an) < 1e-6 * (1 + std::abs(an)));

    // quadratic form against a second difference; the energy is quartic so
    // Richardson extrapolation over t and 2t removes the t^2 term
    const double e0 = radial_energy(q, p);
    auto second = [&](double s) {
      RadialProfile a = q, b = q;
      a.w += s * v;
      b.w += -s * v;
      return (radial_energy(a, p) - 2 * e0 + radial_energy(b, p)) / (s * s);
    };
    const double tt = 1e-3, rich = (4 * second(tt) - second(2 * tt)) / 3;
    const double quad = radial_hessian_quadratic(q, p, v);
    CHECK(std::abs(rich - quad) < 1e-4 * std::abs(quad));
  }
}

TEST_CASE("branches at b = 1, R = 10") {
  // energies from an independent prototype of the same discretization
  const MaterialParams p = params(1, -0.55, 10);
  RadialOptions o;
  o.N = 2000;
  const RadialResult q3 = minimize_radial(p, Branch::Q3, o);
  REQUIRE(q3.converged);
  CHECK(q3.energy == Approx(-21.1306).epsilon(1e-5));
  CHECK(classify_profile(q3.profile, 1e-6 * s_plus(p)) == "Q3");

  const RadialResult q2 = minimize_radial_two_component(p, o);
  REQUIRE(q2.converged);
  CHECK(q2.energy == Approx(-20.3442).epsilon(1e-5));
  // sign-changing w0 at M = -0.55
  CHECK(q2.profile.w.row(0).maxCoeff() > 0);
  CHECK(q2.profile.w.row(0).minCoeff() < 0);
  CHECK(reduced_hessian_min_eig(q2.profile, p).value < 0);
  CHECK(reduced_hessian_min_eig(q3.profile, p).value > 0);

  const MaterialParams hi = params(1, 100, 10);
  const RadialResult big = minimize_radial_two_component(hi, o);
  REQUIRE(big.converged);
  CHECK(big.energy == Approx(99.1051).epsilon(1e-5));
  CHECK(big.profile.w.row(0).maxCoeff() < 0);
  // the constraint residual decays like 1/M
  const double g100 = gamma_limit_residual(big.profile).relative;
  const RadialResult bigger = minimize_radial_two_component(params(1, 1000, 10), o);
  REQUIRE(bigger.converged);
  const double g1000 = gamma_limit_residual(bigger.profile).relative;
  CHECK(g100 / g1000 > 5);
  CHECK(g100 / g1000 < 15);

  // the constraint is inactive at M = 0
  const RadialResult zero = minimize_radial_two_component(params(1, 0, 10), o);
  REQUIRE(zero.converged);
  CHECK(gamma_limit_residual(zero.profile).relative > 0.1);
}

TEST_CASE("b = 0, M = 0, R = 50: monotone Q2- and a Q2+- saddle") {
  const MaterialParams p = params(0, 0, 50);
  RadialOptions o;
  o.N = 2000;
  const RadialResult two = minimize_radial_two_component(p, o);
  REQUIRE(two.converged);
  const RadialResult full = minimize_radial(p, Branch::Q2minus, o);
  REQUIRE(full.converged);
  CHECK(full.energy == Approx(two.energy).epsilon(1e-9));
  const auto& w = two.profile.w;
  for (int j = 0; j < two.profile.N(); ++j) {
    CHECK(w(0, j) < 0);
    CHECK(w(0, j + 1) >= w(0, j) - 1e-12);
    CHECK(w(1, j + 1) >= w(1, j) - 1e-12);
    if (j > 0) CHECK(w(1, j) > 0);
  }
  CHECK(classify_profile(two.profile, 1e-6 * s_plus(p)) == "Q2-");

  const RadialResult pm = minimize_radial(p, Branch::Q2pm, o);
  REQUIRE(pm.converged);
  CHECK(classify_profile(pm.profile, 1e-6 * s_plus(p)) == "Q2+-");
  CHECK(pm.profile.w.row(0).maxCoeff() > 0);
  CHECK(pm.energy > two.energy);
}

TEST_CASE("ODE residual decreases at second order") {
  const MaterialParams p = params(1, 5, 10);
  double prev = 0;
  for (int N : {250, 500, 1000}) {
    RadialOptions o;
    o.N = N;
    const RadialResult r = minimize_radial(p, Branch::Q3, o);
    REQUIRE(r.converged);
    const double res = ode_residual_norm(r.profile, p, 0.1 * p.R);
    if (prev > 0) CHECK(prev / res == Approx(4.0).epsilon(0.3));
    prev = res;
  }
}

TEST_CASE("M = 0 odd winding solutions") {
  const MaterialParams p = params(0, 0, 5, 1);
  const M0Result r = minimize_radial_M0(p, 500);
  REQUIRE(r.converged);
  CHECK(r.profile.u[0] == 0.0);
  for (int j = 1; j < 500; ++j) {
    CHECK(r.profile.u[j] > 0);
    CHECK(r.profile.v[j] < 0);
  }
  CHECK(radial_energy(to_profile(r.profile), p) == Approx(r.energy).epsilon(1e-10));
  CHECK_THROWS_AS(minimize_radial_M0(params(0, 1, 5, 1)), std::invalid_argument);
}

TEST_CASE("Gamma-limit constraint diagnostics") {
  const MaterialParams p = params(1, 0, 10);
  const double s = s_plus(p), R = p.R;
  // sqrt3 (w1 r^2)' = r^2 w0' holds for w0 = A + B r^2, w1 = B r^2 / (2 sqrt3)
  const double B = std::sqrt(6.0) * s / (R * R), A = -s / std::sqrt(6.0) - B * R * R;
  RadialProfile q = RadialProfile::zeros(400, R, 2);
  for (int j = 0; j <= 400; ++j) {
    q.w(0, j) = A + B * q.r[j] * q.r[j];
    q.w(1, j) = B * q.r[j] * q.r[j] / (2 * std::sqrt(3.0));
  }
  const GammaResidual g = gamma_limit_residual(q);
  CHECK(g.relative < 1e-4);
  CHECK(g.w2_norm == 0.0);
  const double Einf = gamma_limit_energy(q, p, 1e-4);
  CHECK(std::isfinite(Einf));
  // the M-dependent part of the energy vanishes with the constraint, up to quadrature
  double prev = 0;
  for (double M : {10.0, 100.0, 1000.0}) {
    const double EM = radial_energy(q, params(1, M, 10));
    const double gap = std::abs(EM - Einf) / M;
    CHECK(gap < 1e-3 * s * s);
    if (prev > 0) CHECK(gap == Approx(prev).epsilon(1e-6));
    prev = gap;
  }
  q.w(2, 100) = 0.1;
  CHECK(std::isinf(gamma_limit_energy(q, p, 1e-4)));
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(minimize_radial(params(0, 1, 10, 3), Branch::Q2minus), std::invalid_argument);
  MaterialParams bad = params(0, -0.8, 10);
  CHECK_THROWS_AS(minimize_radial(bad, Branch::Q2minus), std::invalid_argument);
  RadialProfile q = smooth_profile(params(0, 0, 1), 10);
  CHECK_THROWS_AS(classify_profile(q, 1e-6, false), std::logic_error);
  q.w(0, 3) = std::nan("");
  CHECK_THROWS(q.validate(params(0, 0, 1)));
  CHECK_THROWS_AS(branch_from_name("q7"), std::invalid_argument);
}
