#include "ldg/perturbation.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace ldg {

namespace {

using Mat5X = Eigen::Matrix<double, 5, Eigen::Dynamic>;

Vec5 lab(double a0, double a1, double a2) { return (Vec5() << a0, a1, a2, 0, 0).finished(); }

// Y = v E0 + u E1 in lab coefficients.
Vec5 y_lab(const M0Profile& Y, int j, double phi) {
  const double c = std::cos(Y.k * phi), s = std::sin(Y.k * phi);
  return lab(Y.v[j], Y.u[j] * c, Y.u[j] * s);
}

Vec5 y_lab_dphi(const M0Profile& Y, int j, double phi) {
  const double c = std::cos(Y.k * phi), s = std::sin(Y.k * phi);
  return lab(0, -Y.k * Y.u[j] * s, Y.k * Y.u[j] * c);
}

void check_k(int k) {
  if (k != 1 && k != -1) throw std::invalid_argument("perturbation analysis requires k = 1 or k = -1");
}

}  // namespace

Vec5 PerturbationProfile::at(double rr) const {
  const double h = R / N();
  const double x = std::clamp(rr, 0.0, R) / h;
  const int j = std::min(static_cast<int>(x), N() - 1);
  const double t = x - j;
  return (1 - t) * modes.col(j) + t * modes.col(j + 1);
}

Vec5 PerturbationProfile::tensor_at(const Vec2& x, bool nr_only) const {
  const Vec5 m = at(x.norm());
  const auto B = mode_basis(k, std::atan2(x.y(), x.x()));
  Vec5 q = Vec5::Zero();
  for (int i = nr_only ? 2 : 0; i < 5; ++i) q += m[i] * B[i];
  return q;
}

std::array<Vec5, 5> mode_basis(int k, double phi) {
  const double ck = std::cos(k * phi), sk = std::sin(k * phi);
  const double c = std::cos((k - 2) * phi), s = std::sin((k - 2) * phi);
  const Vec5 E0 = lab(1, 0, 0), E1 = lab(0, ck, sk), E2 = lab(0, -sk, ck);
  return {E0, E1, c * E0, c * E1, s * E2};
}

std::array<Vec5, 5> mode_basis_dphi(int k, double phi) {
  const double ck = std::cos(k * phi), sk = std::sin(k * phi);
  const double c = std::cos((k - 2) * phi), s = std::sin((k - 2) * phi);
  const Vec5 E0 = lab(1, 0, 0), E1 = lab(0, ck, sk), E2 = lab(0, -sk, ck);
  const double m = k - 2;
  return {Vec5::Zero(), k * E2, -m * s * E0, -m * s * E1 + k * c * E2, m * c * E2 - k * s * E1};
}

std::vector<ModeCoefficients> forcing_LY(const M0Profile& Y) {
  check_k(Y.k);
  const int N = static_cast<int>(Y.r.size()) - 1;
  const double h = Y.R / N;
  std::vector<ModeCoefficients> out(N + 1, ModeCoefficients{0, 0, 0, 0, 0, 0, 0});
  for (int j = 1; j < N; ++j) {
    auto jet = [&](const Eigen::VectorXd& w) {
      return RadialJet{w[j], (w[j + 1] - w[j - 1]) / (2 * h), (w[j + 1] - 2 * w[j] + w[j - 1]) / (h * h)};
    };
    ModeCoefficients c = mode_coupling(Y.k, Y.r[j], jet(Y.v), jet(Y.u));
    out[j] = {-c.e0_const, -c.e0_cos, -c.e0_sin, -c.e1_const, -c.e1_cos, -c.e2_const, -c.e2_sin};
  }
  return out;
}

Mat5X forcing_projection(const M0Profile& Y) {
  const auto f = forcing_LY(Y);
  Mat5X P(5, f.size());
  for (size_t j = 0; j < f.size(); ++j)
    P.col(j) << 2 * M_PI * f[j].e0_const, 2 * M_PI * f[j].e1_const, M_PI * f[j].e0_cos, M_PI * f[j].e1_cos,
        M_PI * f[j].e2_sin;
  return P;
}

SecondVariation::SecondVariation(const M0Profile& Y, const MaterialParams& params, int n_angles)
    : Y_(Y), p_(params), N_(static_cast<int>(Y.r.size()) - 1), n_angles_(n_angles) {
  check_k(Y.k);
  p_.k = Y.k;
  const double h = Y.R / N_, L = p_.L;
  idx_.assign(N_ + 1, {-1, -1, -1, -1, -1});
  n_ = 0;
  for (int j = 0; j < N_; ++j)
    for (int m = 0; m < 5; ++m)
      if (j > 0 || m == kA0) idx_[j][m] = n_++;

  const double wq = 2 * M_PI / n_angles_;
  Mat5 G = Mat5::Zero(), D = Mat5::Zero();
  for (int q = 0; q < n_angles_; ++q) {
    const double phi = wq * q;
    const auto B = mode_basis(Y.k, phi), dB = mode_basis_dphi(Y.k, phi);
    for (int m = 0; m < 5; ++m)
      for (int n = 0; n < 5; ++n) {
        G(m, n) += wq * B[m].dot(B[n]);
        D(m, n) += wq * dB[m].dot(dB[n]);
      }
  }
  // Radial and symmetry-breaking modes are orthogonal over the circle; the
  // cross blocks here and below hold quadrature round-off only.
  auto decouple = [](Mat5& X) {
    X.topRightCorner<2, 3>().setZero();
    X.bottomLeftCorner<3, 2>().setZero();
  };
  decouple(G);
  decouple(D);

  std::vector<Eigen::Triplet<double>> T;
  auto add = [&](int j, int m, int i, int n, double v) {
    const int a = idx_[j][m], b = idx_[i][n];
    if (a >= 0 && b >= 0 && v != 0) T.emplace_back(a, b, v);
  };
  for (int j = 0; j < N_; ++j) {
    const double rc = (j + 0.5) * h;
    for (int m = 0; m < 5; ++m)
      for (int n = 0; n < 5; ++n) {
        const double g = L * rc / h * G(m, n), d = 0.25 * L * h / rc * D(m, n);
        add(j, m, j, n, g + d);
        add(j + 1, m, j + 1, n, g + d);
        add(j, m, j + 1, n, -g + d);
        add(j + 1, m, j, n, -g + d);
      }
  }
  for (int j = 1; j < N_; ++j) {
    Mat5 Bm = Mat5::Zero();
    for (int q = 0; q < n_angles_; ++q) {
      const double phi = wq * q;
      const auto B = mode_basis(Y.k, phi);
      const Mat5 H = bulk_hessian_lab(y_lab(Y, j, phi), p_);
      for (int m = 0; m < 5; ++m)
        for (int n = 0; n < 5; ++n) Bm(m, n) += wq * B[m].dot(H * B[n]);
    }
    decouple(Bm);
    for (int m = 0; m < 5; ++m)
      for (int n = 0; n < 5; ++n) add(j, m, j, n, h * Y.r[j] * Bm(m, n));
  }
  A_.resize(n_, n_);
  A_.setFromTriplets(T.begin(), T.end());
}

Eigen::VectorXd SecondVariation::pack(const Mat5X& modes) const {
  Eigen::VectorXd x(n_);
  for (int j = 0; j <= N_; ++j)
    for (int m = 0; m < 5; ++m)
      if (idx_[j][m] >= 0) x[idx_[j][m]] = modes(m, j);
  return x;
}

Mat5X SecondVariation::unpack(const Eigen::VectorXd& x) const {
  Mat5X modes = Mat5X::Zero(5, N_ + 1);
  for (int j = 0; j <= N_; ++j)
    for (int m = 0; m < 5; ++m)
      if (idx_[j][m] >= 0) modes(m, j) = x[idx_[j][m]];
  return modes;
}

Mat5X SecondVariation::apply(const Mat5X& modes) const { return unpack(A_ * pack(modes)); }

double SecondVariation::bilinear(const Mat5X& v, const Mat5X& w) const { return pack(v).dot(A_ * pack(w)); }

Eigen::VectorXd SecondVariation::load() const {
  const Mat5X P = forcing_projection(Y_);
  const double h = Y_.R / N_;
  Mat5X F = Mat5X::Zero(5, N_ + 1);
  // A w = F is the weak form of L Delta W - f_B''(Y) W = -LY.
  for (int j = 1; j < N_; ++j) F.col(j) = -h * Y_.r[j] * P.col(j);
  return pack(F);
}

double SecondVariation::min_eigenvalue(bool nr_block) const {
  const double h = Y_.R / N_;
  std::vector<int> sel;
  std::vector<double> mass;
  for (int j = 0; j < N_; ++j)
    for (int m = 0; m < 5; ++m)
      if (idx_[j][m] >= 0 && (m >= kB0) == nr_block) {
        sel.push_back(idx_[j][m]);
        mass.push_back(j == 0 ? h * h / 8 : h * Y_.r[j]);
      }
  const int n = static_cast<int>(sel.size());
  std::vector<int> pos(n_, -1);
  for (int i = 0; i < n; ++i) pos[sel[i]] = i;
  std::vector<Eigen::Triplet<double>> T;
  for (int c = 0; c < A_.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A_, c); it; ++it)
      if (pos[it.row()] >= 0 && pos[it.col()] >= 0) T.emplace_back(pos[it.row()], pos[it.col()], it.value());
  Eigen::SparseMatrix<double> S(n, n);
  S.setFromTriplets(T.begin(), T.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(S);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0).any())
    return -std::numeric_limits<double>::infinity();
  const Eigen::Map<const Eigen::VectorXd> W(mass.data(), n);
  // Inverse iteration in the W inner product.
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  double lambda = 0;
  for (int it = 0; it < 500; ++it) {
    x /= std::sqrt(x.dot(W.cwiseProduct(x)));
    const Eigen::VectorXd y = ldlt.solve(W.cwiseProduct(x));
    const double next = x.dot(W.cwiseProduct(x)) / x.dot(W.cwiseProduct(y));
    x = y;
    if (it > 0 && std::abs(next - lambda) < 1e-12 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

double SecondVariation::mode_energy(const Mat5X& w, double t) const {
  const double h = Y_.R / N_, wq = 2 * M_PI / n_angles_, L = p_.L;
  double E = 0;
  for (int q = 0; q < n_angles_; ++q) {
    const double phi = wq * q;
    const auto B = mode_basis(Y_.k, phi), dB = mode_basis_dphi(Y_.k, phi);
    auto value = [&](int j) {
      Vec5 v = y_lab(Y_, j, phi);
      for (int m = 0; m < 5; ++m) v += t * w(m, j) * B[m];
      return v;
    };
    auto dphi = [&](int j) {
      Vec5 v = y_lab_dphi(Y_, j, phi);
      for (int m = 0; m < 5; ++m) v += t * w(m, j) * dB[m];
      return v;
    };
    for (int j = 0; j < N_; ++j) {
      const double rc = (j + 0.5) * h;
      const Vec5 dr = (value(j + 1) - value(j)) / h;
      const Vec5 dp = 0.5 * (dphi(j) + dphi(j + 1));
      E += wq * 0.5 * L * (dr.squaredNorm() + dp.squaredNorm() / (rc * rc)) * rc * h;
    }
    for (int j = 1; j <= N_; ++j)
      E += wq * bulk_potential_lab(value(j), p_) * Y_.r[j] * h * (j == N_ ? 0.5 : 1.0);
  }
  return E;
}

PerturbationResult solve_perturbation(const M0Profile& Y, const MaterialParams& params) {
  return solve_perturbation(Y, params, forcing_projection(Y));
}

PerturbationResult solve_perturbation(const M0Profile& Y, const MaterialParams& params, const Mat5X& projections) {
  check_k(Y.k);
  if (params.k != Y.k) throw std::invalid_argument("winding number differs from that of Y");
  if (params.M != 0) throw std::invalid_argument("the second variation is taken at M = 0");
  const int N = static_cast<int>(Y.r.size()) - 1;
  if (projections.cols() != N + 1) throw std::invalid_argument("forcing size does not match the radial grid");
  SecondVariation A(Y, params);
  PerturbationResult res;
  res.min_eig_radial = A.min_eigenvalue(false);
  res.min_eig_nr = A.min_eigenvalue(true);
  if (!(res.min_eig_radial > 1e-10) || !(res.min_eig_nr > 1e-10))
    throw std::runtime_error("second variation at Y is not positive definite");
  const double h = Y.R / N;
  Mat5X Fm = Mat5X::Zero(5, N + 1);
  for (int j = 1; j < N; ++j) Fm.col(j) = -h * Y.r[j] * projections.col(j);
  const Eigen::VectorXd F = A.pack(Fm);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A.matrix());
  Eigen::VectorXd x = ldlt.solve(F);
  // One step of iterative refinement.
  x += ldlt.solve(F - A.matrix() * x);
  const double fn = F.norm();
  res.residual = fn > 0 ? (A.matrix() * x - F).norm() / fn : (A.matrix() * x).norm();
  res.profile.k = Y.k;
  res.profile.R = Y.R;
  res.profile.r = Y.r;
  res.profile.modes = A.unpack(x);
  return res;
}

Field2D perturbation_field(std::shared_ptr<const DiskMesh> mesh, const MaterialParams& params,
                           const PerturbationProfile& W, bool nr_only) {
  Field2D f(mesh, params);
  for (int i = 0; i < mesh->num_nodes(); ++i) f.coeffs().col(i) = W.tensor_at(mesh->nodes[i], nr_only);
  return f;
}

double perturbation_symmetry_residual(const PerturbationProfile& W, double psi, int n_r, int n_phi) {
  const Eigen::Rotation2Dd rot(psi);
  double diff = 0, scale = 0;
  for (int i = 1; i <= n_r; ++i) {
    const double r = W.R * i / (n_r + 1);
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2 * M_PI * j / n_phi;
      const Vec2 x(r * std::cos(phi), r * std::sin(phi));
      const QTensor a = QTensor::from_lab(W.tensor_at(rot * x, true));
      const QTensor b = rotate_tensor(QTensor::from_lab(W.tensor_at(x, true)), psi, W.k);
      diff = std::max(diff, (a - b).norm());
      scale = std::max(scale, b.norm());
    }
  }
  return scale > 0 ? diff / scale : diff;
}

ScalingResult epsilon_scaling_check(const MaterialParams& params, const std::vector<double>& eps_list,
                                    const ScalingOptions& opt) {
  check_k(params.k);
  MaterialParams p0 = params;
  p0.M = 0;
  p0.validate();
  const M0Result Y1 = minimize_radial_M0(p0, opt.N);
  if (!Y1.converged) throw std::runtime_error("radial M = 0 solution did not converge");

  ScalingResult out;
  out.perturbation = solve_perturbation(Y1.profile, p0);

  const double h = opt.mesh_h > 0 ? opt.mesh_h : params.R / 40;
  auto mesh = std::make_shared<const DiskMesh>(build_mesh(params.R, h, opt.grading));
  const FieldResult Y2 = minimize_field(field_from_profile(mesh, p0, to_profile(Y1.profile)), opt.field);
  out.y_converged = Y2.converged;
  out.y_norm = field_l2_norm(Y2.field);
  const Field2D W = perturbation_field(mesh, p0, out.perturbation.profile);

  std::vector<std::future<ScalingRow>> jobs;
  for (double eps : eps_list) {
    jobs.push_back(std::async(std::launch::async, [&, eps] {
      MaterialParams pe = params;
      pe.M = eps;
      Field2D guess = Y2.field;
      guess.set_params(pe);
      guess.coeffs() += eps * W.coeffs();
      guess.apply_boundary();
      FieldOptions fo = opt.field;
      if (fo.grad_tol <= 0) {
        // The starting gradient is already O(eps^2); converge well below it.
        const double g0 = total_gradient(guess).norm();
        fo.grad_tol = std::min(1e-6 * std::sqrt(5.0 * guess.num_nodes()), 1e-4 * g0);
      }
      const FieldResult q = minimize_field(guess, fo);
      ScalingRow row;
      row.eps = eps;
      row.converged = q.converged;
      row.energy = q.energy;
      row.delta = field_l2_distance(q.field, guess);
      row.relative = row.delta / out.y_norm;
      return row;
    }));
  }
  for (auto& j : jobs) out.rows.push_back(j.get());

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : out.rows)
    if (r.eps > 0 && r.delta > 0) {
      const double x = std::log(r.eps), y = std::log(r.delta);
      sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
    }
  out.slope = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace ldg
