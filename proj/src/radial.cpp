#include "ldg/radial.hpp"

#include "ldg/elastic.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldg {

namespace {

const double kS2 = std::sqrt(2.0);
const double kS3 = std::sqrt(3.0);
const double kS6 = std::sqrt(6.0);

using Mat5X = Eigen::Matrix<double, 5, Eigen::Dynamic>;
using Mat10 = Eigen::Matrix<double, 10, 10>;
using Vec10 = Eigen::Matrix<double, 10, 1>;

Vec5 boundary_components(const MaterialParams& p) {
  const double s = s_plus(p);
  Vec5 w;
  w << -s / kS6, s / kS2, 0, 0, 0;
  return w;
}

void check_params(const MaterialParams& p) {
  if (p.k != 2 && p.M != 0)
    throw std::invalid_argument(
        "no generally k-radially symmetric critical point exists for k != 2 when M != 0");
  if (!coercivity_dirichlet(p.L, p.M)) throw std::invalid_argument("elastic constants violate L > 0, L + 4M/3 > 0");
  if (!(p.c2 > 0)) throw std::invalid_argument("c2 must be positive");
}

// Quadratic form on q = (d0..d4, mu0..mu4), mu_a = midpoint value / r_c:
// density = q^T C q. Returns C and the additive constant of the chosen form.
std::pair<Mat10, double> cell_form(const MaterialParams& p, EnergyForm form) {
  const double L = p.L, M = p.M, k2 = double(p.k) * p.k;
  Mat10 C = Mat10::Zero();
  auto add = [&](double coef, const Vec10& l) { C += coef * l * l.transpose(); };
  auto e = [](int i) { return Vec10::Unit(i); };
  bool rewritten = form == EnergyForm::Rewritten || (form == EnergyForm::Auto && M < 0);
  double constant = 0;
  if (!rewritten) {
    add(L / 2, e(0));
    add(L / 2, e(1));
    add(L / 2 * k2, e(6));
    add(M / 6, kS3 * e(1) - e(0) + 2 * kS3 * e(6));
  } else {
    const double c = L / 2 + 2 * M / 3;
    add(c, e(0));
    add(c, e(1));
    add(c * 4, e(6));
    add(-M / 6, kS3 * e(0) + e(1) + 2 * e(6));
    constant = 2 * M * std::pow(s_plus(p), 2) / 3;
  }
  const double LM = L + M;
  add(LM / 2, e(2));
  add(LM / 2 * k2, e(7));
  add(LM / 2, e(3));
  add(LM / 2 * k2 / 4, e(8));
  add(L / 2, e(4));
  add(L / 2 * k2 / 4, e(9));
  return {C, constant};
}

// Bulk density in components and its derivatives.
struct Bulk {
  double a2, b2, c2, beta;
  explicit Bulk(const MaterialParams& p) : a2(p.a2), b2(p.b2), c2(p.c2), beta(p.b2 * kS6 / 36.0) {}

  static double P(const Vec5& w) {
    return 2 * w[0] * w[0] * w[0] - 6 * w[0] * (w[1] * w[1] + w[2] * w[2]) + 3 * w[0] * (w[3] * w[3] + w[4] * w[4]) +
           3 * kS3 * w[1] * (w[3] * w[3] - w[4] * w[4]) + 6 * kS3 * w[2] * w[3] * w[4];
  }
  static Vec5 dP(const Vec5& w) {
    Vec5 g;
    g[0] = 6 * w[0] * w[0] - 6 * (w[1] * w[1] + w[2] * w[2]) + 3 * (w[3] * w[3] + w[4] * w[4]);
    g[1] = -12 * w[0] * w[1] + 3 * kS3 * (w[3] * w[3] - w[4] * w[4]);
    g[2] = -12 * w[0] * w[2] + 6 * kS3 * w[3] * w[4];
    g[3] = 6 * w[0] * w[3] + 6 * kS3 * w[1] * w[3] + 6 * kS3 * w[2] * w[4];
    g[4] = 6 * w[0] * w[4] - 6 * kS3 * w[1] * w[4] + 6 * kS3 * w[2] * w[3];
    return g;
  }
  static Eigen::Matrix<double, 5, 5> d2P(const Vec5& w) {
    Eigen::Matrix<double, 5, 5> H;
    H << 12 * w[0], -12 * w[1], -12 * w[2], 6 * w[3], 6 * w[4],  //
        -12 * w[1], -12 * w[0], 0, 6 * kS3 * w[3], -6 * kS3 * w[4],  //
        -12 * w[2], 0, -12 * w[0], 6 * kS3 * w[4], 6 * kS3 * w[3],  //
        6 * w[3], 6 * kS3 * w[3], 6 * kS3 * w[4], 6 * w[0] + 6 * kS3 * w[1], 6 * kS3 * w[2],  //
        6 * w[4], -6 * kS3 * w[4], 6 * kS3 * w[3], 6 * kS3 * w[2], 6 * w[0] - 6 * kS3 * w[1];
    return H;
  }
  double f(const Vec5& w) const {
    const double S = w.squaredNorm();
    return (-a2 / 2 + c2 / 4 * S) * S - beta * P(w);
  }
  Vec5 grad(const Vec5& w) const { return (-a2 + c2 * w.squaredNorm()) * w - beta * dP(w); }
  Eigen::Matrix<double, 5, 5> hess(const Vec5& w) const {
    return (-a2 + c2 * w.squaredNorm()) * Eigen::Matrix<double, 5, 5>::Identity() + 2 * c2 * w * w.transpose() -
           beta * d2P(w);
  }
};

class RadialSystem {
 public:
  RadialSystem(const MaterialParams& p, int N, double R, const ComponentMask& active, EnergyForm form)
      : p_(p), bulk_(p), N_(N), h_(R / N), R_(R), active_(active) {
    auto [C, constant] = cell_form(p, form);
    C_ = C;
    constant_ = constant;
    idx_.assign(5 * (N + 1), -1);
    int n = 0;
    for (int j = 0; j < N; ++j)
      for (int a = 0; a < 5; ++a)
        if (active[a] && (j > 0 || a == 0)) idx_[5 * j + a] = n++;
    n_ = n;
  }

  int size() const { return n_; }
  int index(int a, int j) const { return idx_[5 * j + a]; }

  // Cell matrix K with cell energy y^T K y, y = (w(:, c), w(:, c+1)).
  Mat10 cell_matrix(int c) const {
    const double rc = (c + 0.5) * h_;
    Mat10 B = Mat10::Zero();
    for (int a = 0; a < 5; ++a) {
      B(a, a) = -1 / h_;
      B(a, a + 5) = 1 / h_;
      B(a + 5, a) = 0.5 / rc;
      B(a + 5, a + 5) = 0.5 / rc;
    }
    return rc * h_ * B.transpose() * C_ * B;
  }

  double bulk_weight(int j) const {
    if (j == 0) return 0.0;
    return (j == N_ ? 0.5 : 1.0) * h_ * j * h_;
  }

  double energy(const Mat5X& W) const {
    double E = constant_;
    for (int c = 0; c < N_; ++c) {
      Vec10 y;
      y << W.col(c), W.col(c + 1);
      E += y.dot(cell_matrix(c) * y);
    }
    for (int j = 1; j <= N_; ++j) E += bulk_weight(j) * bulk_.f(W.col(j));
    return E;
  }

  Mat5X full_gradient(const Mat5X& W) const {
    Mat5X G = Mat5X::Zero(5, N_ + 1);
    for (int c = 0; c < N_; ++c) {
      Vec10 y;
      y << W.col(c), W.col(c + 1);
      const Vec10 g = 2 * cell_matrix(c) * y;
      G.col(c) += g.head<5>();
      G.col(c + 1) += g.tail<5>();
    }
    for (int j = 1; j <= N_; ++j) G.col(j) += bulk_weight(j) * bulk_.grad(W.col(j));
    return G;
  }

  Eigen::VectorXd gradient(const Mat5X& W) const {
    const Mat5X G = full_gradient(W);
    Eigen::VectorXd g(n_);
    for (int j = 0; j < N_; ++j)
      for (int a = 0; a < 5; ++a)
        if (index(a, j) >= 0) g[index(a, j)] = G(a, j);
    return g;
  }

  Eigen::SparseMatrix<double> hessian(const Mat5X& W) const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(N_) * 125);
    auto put = [&](int a, int j, int b, int l, double v) {
      const int I = (j < N_) ? index(a, j) : -1, J = (l < N_) ? index(b, l) : -1;
      if (I >= 0 && J >= 0 && v != 0) trip.emplace_back(I, J, v);
    };
    for (int c = 0; c < N_; ++c) {
      const Mat10 K = 2 * cell_matrix(c);
      for (int s = 0; s < 10; ++s)
        for (int t = 0; t < 10; ++t) put(s % 5, c + s / 5, t % 5, c + t / 5, K(s, t));
    }
    for (int j = 1; j < N_; ++j) {
      const auto Hb = bulk_weight(j) * bulk_.hess(W.col(j));
      for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) put(a, j, b, j, Hb(a, b));
    }
    Eigen::SparseMatrix<double> H(n_, n_);
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
  }

  // Dual-cell measure of r dr attached to each unknown.
  Eigen::VectorXd mass() const {
    Eigen::VectorXd m(n_);
    for (int j = 0; j < N_; ++j)
      for (int a = 0; a < 5; ++a)
        if (index(a, j) >= 0) m[index(a, j)] = (j == 0) ? h_ * h_ / 8 : h_ * j * h_;
    return m;
  }

  void scatter(const Eigen::VectorXd& x, Mat5X& W) const {
    for (int j = 0; j < N_; ++j)
      for (int a = 0; a < 5; ++a)
        if (index(a, j) >= 0) W(a, j) = x[index(a, j)];
  }
  Eigen::VectorXd gather(const Mat5X& W) const {
    Eigen::VectorXd x(n_);
    for (int j = 0; j < N_; ++j)
      for (int a = 0; a < 5; ++a)
        if (index(a, j) >= 0) x[index(a, j)] = W(a, j);
    return x;
  }

  // Inactive components zero, Dirichlet data at r = 0 and r = R.
  void impose(Mat5X& W) const {
    W.col(N_) = boundary_components(p_);
    for (int a = 1; a < 5; ++a) W(a, 0) = 0;
    for (int a = 1; a < 5; ++a)
      if (!active_[a]) W.row(a).head(N_).setZero();
  }

  int N() const { return N_; }
  double h() const { return h_; }
  double R() const { return R_; }

 private:
  MaterialParams p_;
  Bulk bulk_;
  int N_;
  double h_, R_;
  ComponentMask active_;
  Mat10 C_;
  double constant_ = 0;
  std::vector<int> idx_;
  int n_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------

Vec5 RadialProfile::at(double rr) const {
  const int n = N();
  const double t = std::clamp(rr / R, 0.0, 1.0) * n;
  const int j = std::min(static_cast<int>(std::floor(t)), n - 1);
  const double s = t - j;
  return (1 - s) * w.col(j) + s * w.col(j + 1);
}

void RadialProfile::validate(const MaterialParams& p) const {
  if (r.size() < 3 || w.cols() != r.size()) throw std::invalid_argument("profile: inconsistent grid");
  if (!w.allFinite()) throw std::invalid_argument("profile: non-finite component values");
  const Vec5 bc = boundary_components(p);
  const double tol = 1e-9 * (1 + bc.norm());
  if ((w.col(N()) - bc).cwiseAbs().maxCoeff() > tol) throw std::invalid_argument("profile: boundary values at R mismatch");
  if (w.col(0).tail<4>().cwiseAbs().maxCoeff() > tol) throw std::invalid_argument("profile: w1..w4 must vanish at r = 0");
}

RadialProfile RadialProfile::zeros(int N, double R, int k) {
  RadialProfile p;
  p.k = k;
  p.R = R;
  p.r = Eigen::VectorXd::LinSpaced(N + 1, 0.0, R);
  p.w = Mat5X::Zero(5, N + 1);
  return p;
}

RadialProfile RadialProfile::resampled(int Nn) const {
  RadialProfile q = zeros(Nn, R, k);
  for (int j = 0; j <= Nn; ++j) q.w.col(j) = at(q.r[j]);
  return q;
}

std::string branch_name(Branch b) {
  switch (b) {
    case Branch::Q2minus: return "q2minus";
    case Branch::Q2pm: return "q2pm";
    case Branch::Q3: return "q3";
    case Branch::Q5: return "q5";
  }
  return "?";
}

Branch branch_from_name(const std::string& s) {
  if (s == "q2minus" || s == "Q2-") return Branch::Q2minus;
  if (s == "q2pm" || s == "Q2+-") return Branch::Q2pm;
  if (s == "q3" || s == "Q3") return Branch::Q3;
  if (s == "q5" || s == "Q5") return Branch::Q5;
  throw std::invalid_argument("unknown branch preset: " + s);
}

double radial_energy(const RadialProfile& p, const MaterialParams& params, EnergyForm form) {
  MaterialParams q = params;
  q.k = p.k;
  if (q.k != 2 && q.M != 0) throw std::invalid_argument("radial energy with M != 0 requires k = 2");
  p.validate(q);
  RadialSystem sys(q, p.N(), p.R, kAllComponents, form);
  return sys.energy(p.w);
}

Eigen::Matrix<double, 5, Eigen::Dynamic> radial_energy_gradient(const RadialProfile& p, const MaterialParams& params) {
  MaterialParams q = params;
  q.k = p.k;
  RadialSystem sys(q, p.N(), p.R, kAllComponents, EnergyForm::Standard);
  return sys.full_gradient(p.w);
}

RadialProfile radial_seed(Branch b, const MaterialParams& params, int N) {
  RadialProfile p = RadialProfile::zeros(N, params.R, params.k);
  const double R = params.R, s = s_plus(params), ell = R / 4;
  for (int j = 0; j <= N; ++j) {
    const double r = p.r[j];
    const double g = std::tanh(r / ell) / std::tanh(R / ell);
    const double amp = s * std::sqrt(2.0 / 3.0) * std::tanh(r + 1) / std::tanh(R + 1);
    const double off = std::sqrt(std::max(0.0, 1 - g * g));
    double th;
    switch (b) {
      case Branch::Q2minus:
        th = M_PI - M_PI / 3 * g;
        p.w(0, j) = amp * std::cos(th);
        p.w(1, j) = amp * std::sin(th);
        break;
      case Branch::Q2pm:
        th = 2 * M_PI / 3 * g;
        p.w(0, j) = amp * std::cos(th);
        p.w(1, j) = amp * std::sin(th);
        break;
      case Branch::Q3:
      case Branch::Q5:
        th = 2 * M_PI / 3 * g;
        p.w(0, j) = amp * std::cos(th);
        p.w(1, j) = amp * std::sin(th) * g;
        p.w(3, j) = -amp * std::sin(th) * off;
        if (b == Branch::Q5) p.w(2, j) = p.w(4, j) = 0.2 * amp * std::sin(th) * off;
        break;
    }
  }
  p.w.col(N) = boundary_components(params);
  p.w.col(0).tail<4>().setZero();
  return p;
}

RadialResult minimize_radial(const MaterialParams& params, const RadialProfile& init, const RadialOptions& opt) {
  check_params(params);
  if (init.k != params.k) throw std::invalid_argument("minimize_radial: winding mismatch");
  const int N = init.N();
  RadialSystem sys(params, N, params.R, opt.active, EnergyForm::Auto);
  Mat5X W = init.w;
  if (std::abs(init.R - params.R) > 1e-12 * params.R) throw std::invalid_argument("minimize_radial: radius mismatch");
  sys.impose(W);
  const double tol = opt.tol > 0 ? opt.tol : 1e-8 * N;

  RadialResult res;
  Eigen::VectorXd x = sys.gather(W);
  double E = sys.energy(W);
  Eigen::VectorXd g = sys.gradient(W);
  int polish = 0;
  int it = 0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  for (; it < opt.max_iter; ++it) {
    const double gn = g.norm();
    if (gn < tol) {
      res.converged = true;
      if (polish++ >= 2 || gn < 1e-13 * (1 + std::abs(E))) break;
    }
    Eigen::SparseMatrix<double> H = sys.hessian(W);
    double hmax = 0;
    for (int c = 0; c < H.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator itr(H, c); itr; ++itr) hmax = std::max(hmax, std::abs(itr.value()));
    Eigen::SparseMatrix<double> I(H.rows(), H.cols());
    I.setIdentity();
    double lam = 0;
    bool ok = false;
    for (int attempt = 0; attempt < 80; ++attempt) {
      ldlt.compute(H + lam * I);
      if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0).all()) {
        ok = true;
        break;
      }
      lam = std::max(2 * lam, 1e-6 * hmax);
    }
    if (!ok) {
      res.message = "hessian shift failed";
      break;
    }
    const Eigen::VectorXd d = ldlt.solve(-g);
    const double slope = g.dot(d);
    double t = 1.0;
    bool accepted = false;
    Mat5X Wn = W;
    double En = E;
    for (int ls = 0; ls < 50; ++ls) {
      sys.scatter(x + t * d, Wn);
      En = sys.energy(Wn);
      if (std::isfinite(En) && En <= E + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (res.converged) break;
      res.message = "line search failed";
      break;
    }
    x += t * d;
    W = Wn;
    E = En;
    g = sys.gradient(W);
  }
  res.grad_norm = g.norm();
  res.converged = res.grad_norm < tol;
  res.iterations = it;
  res.profile = init;
  res.profile.w = W;
  res.energy = E;
  if (res.message.empty() || res.converged) res.message = res.converged ? "converged" : "iteration limit";
  return res;
}

RadialResult minimize_radial(const MaterialParams& params, Branch seed, RadialOptions opt) {
  check_params(params);
  if (seed == Branch::Q2minus || seed == Branch::Q2pm) opt.active = kTwoComponents;
  if (seed == Branch::Q3) opt.active = kThreeComponents;
  return minimize_radial(params, radial_seed(seed, params, opt.N), opt);
}

RadialResult minimize_radial_two_component(const MaterialParams& params, RadialOptions opt, Branch seed) {
  if (params.k != 2) throw std::invalid_argument("two-component radial solve requires k = 2");
  opt.active = kTwoComponents;
  if (seed != Branch::Q2minus && seed != Branch::Q2pm) seed = Branch::Q2minus;
  return minimize_radial(params, radial_seed(seed, params, opt.N), opt);
}

M0Result minimize_radial_M0(const MaterialParams& params, int N) {
  if (params.M != 0) throw std::invalid_argument("minimize_radial_M0 requires M = 0");
  RadialOptions opt;
  opt.N = N;
  opt.active = kTwoComponents;
  auto r = minimize_radial(params, radial_seed(Branch::Q2minus, params, N), opt);
  M0Result out;
  out.profile.k = params.k;
  out.profile.R = params.R;
  out.profile.r = r.profile.r;
  out.profile.u = r.profile.w.row(1).transpose();
  out.profile.v = r.profile.w.row(0).transpose();
  out.energy = r.energy;
  out.converged = r.converged;
  out.grad_norm = r.grad_norm;
  return out;
}

RadialProfile to_profile(const M0Profile& p) {
  RadialProfile q = RadialProfile::zeros(static_cast<int>(p.r.size()) - 1, p.R, p.k);
  q.w.row(0) = p.v.transpose();
  q.w.row(1) = p.u.transpose();
  return q;
}

double radial_energy_M0(const M0Profile& p, const MaterialParams& params) {
  if (params.M != 0) throw std::invalid_argument("radial_energy_M0 requires M = 0");
  return radial_energy(to_profile(p), params);
}

Eigen::Matrix<double, 5, Eigen::Dynamic> ode_residual(const RadialProfile& p, const MaterialParams& params) {
  const int N = p.N();
  const double h = p.h(), L = params.L, M = params.M, k2 = double(p.k) * p.k;
  Bulk bulk(params);
  Mat5X res = Mat5X::Zero(5, N + 1);
  for (int j = 1; j < N; ++j) {
    const double r = p.r[j];
    const Vec5 d1 = (p.w.col(j + 1) - p.w.col(j - 1)) / (2 * h);
    const Vec5 d2 = (p.w.col(j + 1) - 2 * p.w.col(j) + p.w.col(j - 1)) / (h * h);
    const Vec5 w = p.w.col(j);
    const Vec5 rhs = bulk.grad(w);
    Vec5 lhs;
    lhs[0] = (L + M / 3) * (d2[0] + d1[0] / r) - M / kS3 * (d2[1] + 3 * d1[1] / r);
    lhs[1] = (L + M) * (d2[1] + d1[1] / r - k2 * w[1] / (r * r)) - M / kS3 * (d2[0] - d1[0] / r);
    lhs[2] = (L + M) * (d2[2] + d1[2] / r - k2 * w[2] / (r * r));
    lhs[3] = (L + M) * (d2[3] + d1[3] / r - k2 / 4 * w[3] / (r * r));
    lhs[4] = L * (d2[4] + d1[4] / r - k2 / 4 * w[4] / (r * r));
    res.col(j) = lhs - rhs;
  }
  return res;
}

double ode_residual_norm(const RadialProfile& p, const MaterialParams& params, double r_min) {
  const auto res = ode_residual(p, params);
  double s = 0;
  for (int j = 1; j < p.N(); ++j)
    if (p.r[j] >= r_min) s += res.col(j).squaredNorm() * p.r[j] * p.h();
  return std::sqrt(s);
}

double component_sup(const RadialProfile& p, int i) { return p.w.row(i).cwiseAbs().maxCoeff(); }

double component_l2(const RadialProfile& p, int i) {
  double s = 0;
  for (int j = 0; j <= p.N(); ++j) s += p.w(i, j) * p.w(i, j) * p.r[j] * p.h() * (j == p.N() ? 0.5 : 1.0);
  return std::sqrt(s);
}

std::string classify_profile(const RadialProfile& p, double tol, bool converged) {
  if (!converged) throw std::logic_error("classify_profile: refusing to classify an unconverged profile");
  const bool has2 = component_sup(p, 2) >= tol, has3 = component_sup(p, 3) >= tol, has4 = component_sup(p, 4) >= tol;
  if (!has2 && !has3 && !has4) return p.w.row(0).maxCoeff() <= tol ? "Q2-" : "Q2+-";
  if (has3 && !has2 && !has4) return "Q3";
  return "Q5";
}

GammaResidual gamma_limit_residual(const RadialProfile& p) {
  const int N = p.N();
  const double h = p.h();
  double c2 = 0, ref = 0;
  for (int c = 0; c < N; ++c) {
    const double rc = (c + 0.5) * h;
    const double d0 = (p.w(0, c + 1) - p.w(0, c)) / h, d1 = (p.w(1, c + 1) - p.w(1, c)) / h;
    const double m1 = 0.5 * (p.w(1, c + 1) + p.w(1, c));
    const double lhs = kS3 * (rc * rc * d1 + 2 * rc * m1), rhs = rc * rc * d0;
    c2 += (lhs - rhs) * (lhs - rhs) * rc * h;
    ref += rhs * rhs * rc * h;
  }
  GammaResidual g;
  g.constraint_norm = std::sqrt(c2);
  g.relative = ref > 0 ? g.constraint_norm / std::sqrt(ref) : (c2 > 0 ? std::numeric_limits<double>::infinity() : 0.0);
  g.w2_norm = component_sup(p, 2);
  g.w3_norm = component_sup(p, 3);
  return g;
}

double gamma_limit_energy(const RadialProfile& p, const MaterialParams& params, double tol) {
  const auto g = gamma_limit_residual(p);
  if (g.relative > tol || g.w2_norm > tol || g.w3_norm > tol) return std::numeric_limits<double>::infinity();
  // The limit density is the M = 0 density with w2 = w3 = 0.
  MaterialParams q = params;
  q.M = 0;
  q.k = 2;
  RadialProfile r = p;
  r.w.row(2).setZero();
  r.w.row(3).setZero();
  RadialSystem sys(q, r.N(), r.R, kAllComponents, EnergyForm::Standard);
  return sys.energy(r.w);
}

HessianEig reduced_hessian_min_eig(const RadialProfile& p, const MaterialParams& params, const ComponentMask& active) {
  MaterialParams q = params;
  q.k = p.k;
  RadialSystem sys(q, p.N(), p.R, active, EnergyForm::Standard);
  const Eigen::SparseMatrix<double> H = sys.hessian(p.w);
  const Eigen::VectorXd m = sys.mass();
  Eigen::SparseMatrix<double> Wm(H.rows(), H.cols());
  {
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < m.size(); ++i) t.emplace_back(i, i, m[i]);
    Wm.setFromTriplets(t.begin(), t.end());
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  // Number of generalized eigenvalues below sigma (Sylvester inertia).
  auto below = [&](double sigma, bool& fail) {
    ldlt.compute(H - sigma * Wm);
    fail = ldlt.info() != Eigen::Success;
    return static_cast<int>((ldlt.vectorD().array() < 0).count());
  };
  bool fail = false;
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 200 && (below(lo, fail) > 0 || fail); ++i) lo *= 2;
  for (int i = 0; i < 200 && (below(hi, fail) == 0 && !fail); ++i) hi *= 2;
  HessianEig out{0.0, true};
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    const int n = below(mid, fail);
    if (fail) {
      hi = mid;  // singular: an eigenvalue sits at mid
      continue;
    }
    (n > 0 ? hi : lo) = mid;
  }
  out.value = 0.5 * (lo + hi);
  if (!std::isfinite(out.value)) out.converged = false;
  return out;
}

double radial_hessian_quadratic(const RadialProfile& p, const MaterialParams& params,
                                const Eigen::Matrix<double, 5, Eigen::Dynamic>& v) {
  MaterialParams q = params;
  q.k = p.k;
  RadialSystem sys(q, p.N(), p.R, kAllComponents, EnergyForm::Standard);
  const Eigen::VectorXd x = sys.gather(v);
  return x.dot(sys.hessian(p.w) * x);
}

}  // namespace ldg
