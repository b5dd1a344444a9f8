#include "ldg/field_solver.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ldg {

namespace {

using Mat5X = Eigen::Matrix<double, 5, Eigen::Dynamic>;
using Mat10 = Eigen::Matrix<double, 10, 10>;
using Vec10 = Eigen::Matrix<double, 10, 1>;

double assemble(const DiskMesh& m, const Mat5X& q, const MaterialParams& p, Mat5X* grad) {
  const Mat10 K = elastic_matrix(field_triple(p), 2);
  if (grad) grad->setZero(5, m.num_nodes());
  double E = 0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    const auto& gl = m.grad_lambda[t];
    const double A = m.area[t];
    Eigen::Matrix<double, 5, 2> G = q.col(tr[0]) * gl.col(0).transpose() + q.col(tr[1]) * gl.col(1).transpose() +
                                    q.col(tr[2]) * gl.col(2).transpose();
    Vec10 g;
    g << G.col(0), G.col(1);
    const Vec10 Kg = K * g;
    const Vec5 qc = (q.col(tr[0]) + q.col(tr[1]) + q.col(tr[2])) / 3.0;
    E += A * (0.5 * g.dot(Kg) + bulk_potential_lab(qc, p));
    if (grad) {
      const Vec5 gb = (A / 3.0) * bulk_gradient_lab(qc, p);
      for (int i = 0; i < 3; ++i)
        grad->col(tr[i]) += A * (Kg.head<5>() * gl(0, i) + Kg.tail<5>() * gl(1, i)) + gb;
    }
  }
  if (grad)
    for (int b : m.boundary_nodes) grad->col(b).setZero();
  return E;
}

}  // namespace

ElasticTriple field_triple(const MaterialParams& p) { return ElasticTriple::from_LM(p.L, p.M); }

double total_energy(const Field2D& f) { return assemble(f.mesh(), f.coeffs(), f.params(), nullptr); }

Eigen::Matrix<double, 5, Eigen::Dynamic> total_gradient(const Field2D& f) {
  Mat5X g;
  assemble(f.mesh(), f.coeffs(), f.params(), &g);
  return g;
}

double energy_and_gradient(const Field2D& f, Eigen::Matrix<double, 5, Eigen::Dynamic>* grad) {
  return assemble(f.mesh(), f.coeffs(), f.params(), grad);
}

double radial_to_field_energy(double e, const MaterialParams& p) {
  return 2 * M_PI * (e - p.M * s_plus(p) * s_plus(p));
}

FieldResult minimize_field(const Field2D& init, const FieldOptions& opt) {
  const auto& m = init.mesh();
  const MaterialParams& p = init.params();
  if (!coercivity_dirichlet(p.L, p.M)) throw std::invalid_argument("elastic constants violate L > 0, L + 4M/3 > 0");
  std::vector<int> interior;
  for (int i = 0; i < m.num_nodes(); ++i)
    if (!m.is_boundary[i]) interior.push_back(i);
  const int n = static_cast<int>(interior.size());
  Eigen::VectorXd scale(5 * n);
  for (int j = 0; j < n; ++j) scale.segment<5>(5 * j).setConstant(std::sqrt(m.lumped_mass[interior[j]]));

  Field2D work = init;
  Mat5X grad;
  // Optimize in mass-scaled variables y = sqrt(m) x.
  auto objective = [&](const Eigen::VectorXd& y, Eigen::VectorXd* gy) {
    for (int j = 0; j < n; ++j) work.coeffs().col(interior[j]) = y.segment<5>(5 * j) / scale[5 * j];
    const double E = energy_and_gradient(work, gy ? &grad : nullptr);
    if (gy) {
      gy->resize(5 * n);
      for (int j = 0; j < n; ++j) gy->segment<5>(5 * j) = grad.col(interior[j]) / scale[5 * j];
    }
    return E;
  };
  Eigen::VectorXd y0(5 * n);
  for (int j = 0; j < n; ++j) y0.segment<5>(5 * j) = init.coeffs().col(interior[j]) * scale[5 * j];

  OptimOptions o;
  const double tol = opt.grad_tol > 0 ? opt.grad_tol : 1e-6 * std::sqrt(5.0 * n);
  // The tolerance refers to the unscaled gradient; scaled entries are g / sqrt(m).
  o.grad_tol = tol / scale.maxCoeff();
  o.max_iter = opt.max_iter;
  o.verbose = opt.verbose;
  OptimResult r = opt.optimizer == Optimizer::LBFGS ? minimize_lbfgs(objective, y0, o) : minimize_trust_region(objective, y0, o);

  FieldResult res;
  objective(r.x, nullptr);
  res.field = work;
  res.energy = total_energy(work);
  const Mat5X g = total_gradient(work);
  res.grad_norm = g.norm();
  res.converged = res.grad_norm < tol;
  res.monotone = r.monotone;
  res.iterations = r.iterations;
  res.el_residual_l2 = el_residual(work).l2_norm;
  res.message = res.converged ? "converged" : r.message;
  return res;
}

namespace {

std::vector<int> interior_index(const DiskMesh& m) {
  std::vector<int> idx(m.num_nodes(), -1);
  int n = 0;
  for (int i = 0; i < m.num_nodes(); ++i)
    if (!m.is_boundary[i]) idx[i] = n++;
  return idx;
}

}  // namespace

Eigen::SparseMatrix<double> field_hessian(const Field2D& f) {
  const auto& m = f.mesh();
  const MaterialParams& p = f.params();
  const Mat10 K = elastic_matrix(field_triple(p), 2);
  const std::vector<int> idx = interior_index(m);
  const int n = static_cast<int>(std::count_if(idx.begin(), idx.end(), [](int v) { return v >= 0; }));
  std::vector<Eigen::Triplet<double>> T;
  T.reserve(static_cast<size_t>(m.num_triangles()) * 225);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    const auto& gl = m.grad_lambda[t];
    const double A = m.area[t];
    const Vec5 qc = (f.coeffs().col(tr[0]) + f.coeffs().col(tr[1]) + f.coeffs().col(tr[2])) / 3.0;
    const Mat5 HB = (A / 9.0) * bulk_hessian_lab(qc, p);
    for (int i = 0; i < 3; ++i) {
      if (idx[tr[i]] < 0) continue;
      for (int j = 0; j < 3; ++j) {
        if (idx[tr[j]] < 0) continue;
        Mat5 blk = HB;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) blk += A * gl(a, i) * gl(b, j) * K.block<5, 5>(5 * a, 5 * b);
        for (int r = 0; r < 5; ++r)
          for (int c = 0; c < 5; ++c) T.emplace_back(5 * idx[tr[i]] + r, 5 * idx[tr[j]] + c, blk(r, c));
      }
    }
  }
  Eigen::SparseMatrix<double> H(5 * n, 5 * n);
  H.setFromTriplets(T.begin(), T.end());
  return H;
}

FieldStability field_stability(const Field2D& f) {
  const auto& m = f.mesh();
  const Eigen::SparseMatrix<double> H = field_hessian(f);
  Eigen::VectorXd w(H.rows());
  int n = 0;
  for (int i = 0; i < m.num_nodes(); ++i)
    if (!m.is_boundary[i]) w.segment<5>(5 * n++).setConstant(m.lumped_mass[i]);
  Eigen::SparseMatrix<double> W(H.rows(), H.cols());
  W.reserve(Eigen::VectorXi::Constant(H.cols(), 1));
  for (int i = 0; i < w.size(); ++i) W.insert(i, i) = w[i];

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  auto negatives = [&](double sigma) {
    ldlt.compute(H - sigma * W);
    if (ldlt.info() != Eigen::Success) return -1;
    return static_cast<int>((ldlt.vectorD().array() < 0).count());
  };
  FieldStability out{0.0, negatives(0.0)};
  // Shift below the spectrum, then inverse iteration towards the bottom.
  double lo = -1.0;
  for (int i = 0; i < 60; ++i) {
    const int c = negatives(lo);
    if (c == 0) break;
    lo *= 2;
  }
  Eigen::VectorXd x = Eigen::VectorXd::Ones(H.rows());
  double lambda = lo;
  for (int it = 0; it < 100; ++it) {
    x /= std::sqrt(x.dot(w.cwiseProduct(x)));
    const Eigen::VectorXd y = ldlt.solve(w.cwiseProduct(x));
    const double next = lo + 1.0 / x.dot(w.cwiseProduct(y));
    x = y;
    if (it > 0 && std::abs(next - lambda) < 1e-8 * (1.0 + std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  out.min_eig = lambda;
  return out;
}

FieldSeed field_seed_from_name(const std::string& s) {
  if (s == "interp" || s == "interpolated") return FieldSeed::Interpolated;
  if (s == "nr_vertical" || s == "NR_vertical") return FieldSeed::NonRadialVertical;
  if (s == "nr_tilted" || s == "NR_tilted") return FieldSeed::NonRadialTilted;
  throw std::invalid_argument("unknown field seed: " + s);
}

std::string field_seed_name(FieldSeed s) {
  switch (s) {
    case FieldSeed::Interpolated: return "interp";
    case FieldSeed::NonRadialVertical: return "nr_vertical";
    case FieldSeed::NonRadialTilted: return "nr_tilted";
  }
  return "?";
}

Field2D field_seed(std::shared_ptr<const DiskMesh> mesh, const MaterialParams& p, FieldSeed s) {
  const double R = p.R, sp = s_plus(p), core = 1.0 / std::sqrt(std::max(p.a2, 1e-12));
  if (s == FieldSeed::Interpolated) {
    return field_from_function(mesh, p, [&](const Vec2& x) {
      return boundary_data(std::atan2(x.y(), x.x()), p) * (x.norm() / R);
    });
  }
  const Vec2 d(R / 4, 0);
  const bool tilted = s == FieldSeed::NonRadialTilted;
  return field_from_function(mesh, p, [&](const Vec2& x) {
    const Vec2 a = x - d, b = x + d;
    const double th = 0.25 * p.k * (std::atan2(a.y(), a.x()) + std::atan2(b.y(), b.x()));
    const double amp = std::tanh(a.norm() / core) * std::tanh(b.norm() / core);
    // tilted: director leaves the plane near the centre, angle 1.4 rad, width 0.3 R
    const double g = tilted ? 1.4 * std::exp(-x.squaredNorm() / (0.09 * R * R)) : 0.0;
    return QTensor::uniaxial(sp * amp, Vec3(std::cos(th) * std::cos(g), std::sin(th) * std::cos(g), std::sin(g)));
  });
}

std::vector<Defect> detect_defects(const Field2D& f, double beta_tol) {
  const auto& m = f.mesh();
  const int n = m.num_nodes();
  std::vector<double> beta(n);
  for (int i = 0; i < n; ++i) beta[i] = biaxiality(f.q(i));
  std::vector<char> is_min(n, 1);
  for (const auto& t : m.triangles)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j && beta[t[j]] < beta[t[i]]) is_min[t[i]] = 0;
  std::vector<int> cand;
  for (int i = 0; i < n; ++i)
    if (!m.is_boundary[i] && is_min[i] && beta[i] < beta_tol) cand.push_back(i);
  std::sort(cand.begin(), cand.end(), [&](int a, int b) { return beta[a] < beta[b]; });
  const double merge = 2.0 * m.max_edge();
  std::vector<Defect> out;
  for (int c : cand) {
    bool near = false;
    for (const auto& d : out) near = near || (d.position - m.nodes[c]).norm() < merge;
    if (!near) out.push_back({m.nodes[c], beta[c]});
  }
  return out;
}

Field2D rotate_field(const Field2D& f, double psi) {
  const auto& m = f.mesh();
  Field2D out = f;
  const Eigen::Rotation2Dd back(-psi);
  const int k = f.params().k;
  for (int i = 0; i < m.num_nodes(); ++i) {
    const Vec5 src = f.interpolate(back * m.nodes[i]);
    out.set_q(i, rotate_tensor(QTensor::from_lab(src), psi, k));
  }
  out.apply_boundary();
  return out;
}

double symmetry_residual(const Field2D& f, int n_psi) {
  const auto& m = f.mesh();
  const int k = f.params().k;
  double res = 0;
  for (int s = 1; s < n_psi; ++s) {
    const double psi = 2 * M_PI * s / n_psi;
    const Eigen::Rotation2Dd rot(psi);
    for (int i = 0; i < m.num_nodes(); ++i) {
      const QTensor a = QTensor::from_lab(f.interpolate(rot * m.nodes[i]));
      const QTensor b = rotate_tensor(f.q(i), psi, k);
      res = std::max(res, (a - b).norm());
    }
  }
  return res;
}

double e3_eigen_residual(const Field2D& f) {
  double res = 0;
  for (int i = 0; i < f.num_nodes(); ++i) {
    const Mat3& q = f.q(i).matrix();
    res = std::max(res, std::hypot(q(0, 2), q(1, 2)));
  }
  return res;
}

FieldClass classify_field(const Field2D& f, double tol) {
  if (tol <= 0) tol = 1e-3 * s_plus(f.params());
  FieldClass c;
  // Sixfold sampling: these rotations map the ring mesh onto itself, so the
  // comparison is free of interpolation error.
  c.symmetry_residual = symmetry_residual(f, 6);
  c.e3_residual = e3_eigen_residual(f);
  if (c.symmetry_residual < tol)
    c.label = "radial";
  else if (c.e3_residual < tol)
    c.label = "NR_vertical";
  else
    c.label = "NR_tilted";
  return c;
}

RadialComponents extract_radial_components(const Field2D& f, int n_radii, int n_angles) {
  RadialComponents rc;
  const double R = f.mesh().R;
  const int k = f.params().k;
  rc.r = Eigen::VectorXd::LinSpaced(n_radii, 0.0, R);
  rc.w.setZero(5, n_radii);
  rc.variance.setZero(5, n_radii);
  for (int j = 0; j < n_radii; ++j) {
    Vec5 sum = Vec5::Zero(), sq = Vec5::Zero();
    for (int l = 0; l < n_angles; ++l) {
      const double phi = 2 * M_PI * l / n_angles;
      const Vec2 x = rc.r[j] * Vec2(std::cos(phi), std::sin(phi));
      const QTensor q = (j == n_radii - 1) ? boundary_data(phi, f.params()) : QTensor::from_lab(f.interpolate(x));
      const Vec5 w = components(q, BasisFrame(phi, k));
      sum += w;
      sq += w.cwiseProduct(w);
    }
    rc.w.col(j) = sum / n_angles;
    rc.variance.col(j) = (sq / n_angles - rc.w.col(j).cwiseProduct(rc.w.col(j))).cwiseMax(0.0);
  }
  rc.anisotropy = rc.variance.maxCoeff();
  return rc;
}

Glyph glyph(const QTensor& q, const Vec2& x) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(q.matrix());
  Glyph g;
  g.position = x;
  g.frame = es.eigenvectors();
  g.lengths = es.eigenvalues().array() + std::sqrt(2.0 / 3.0) * q.norm();
  g.lengths = g.lengths.cwiseMax(0.0);
  g.beta = biaxiality(q);
  return g;
}

std::vector<Glyph> glyph_export(const Field2D& f) {
  std::vector<Glyph> out;
  out.reserve(f.num_nodes());
  for (int i = 0; i < f.num_nodes(); ++i) out.push_back(glyph(f.q(i), f.mesh().nodes[i]));
  return out;
}

namespace {

double l2_sq(const DiskMesh& m, const Mat5X& q) {
  double s = 0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    const Vec5 sum = q.col(tr[0]) + q.col(tr[1]) + q.col(tr[2]);
    s += m.area[t] / 12.0 *
         (q.col(tr[0]).squaredNorm() + q.col(tr[1]).squaredNorm() + q.col(tr[2]).squaredNorm() + sum.squaredNorm());
  }
  return s;
}

}  // namespace

double field_l2_norm(const Field2D& f) { return std::sqrt(l2_sq(f.mesh(), f.coeffs())); }

double field_l2_distance(const Field2D& a, const Field2D& b) {
  if (a.num_nodes() != b.num_nodes()) throw std::invalid_argument("field_l2_distance: mesh mismatch");
  return std::sqrt(l2_sq(a.mesh(), a.coeffs() - b.coeffs()));
}

}  // namespace ldg
