#include "ldg/optimize.hpp"

#include <cmath>
#include <deque>
#include <iostream>

namespace ldg {

OptimResult minimize_lbfgs(const Objective& fun, Eigen::VectorXd x, const OptimOptions& opt) {
  using Vec = Eigen::VectorXd;
  OptimResult res;
  Vec g(x.size());
  double f = fun(x, &g);
  std::deque<Vec> S, Y;
  std::deque<double> rho;
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    const double gn = g.norm();
    if (opt.monitor) opt.monitor(it, f, gn);
    if (opt.verbose && it % 100 == 0) std::cerr << "lbfgs " << it << " f=" << f << " |g|=" << gn << "\n";
    if (gn < opt.grad_tol) {
      res.converged = true;
      break;
    }
    // Two-loop recursion.
    Vec q = g;
    std::vector<double> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      alpha[i] = rho[i] * S[i].dot(q);
      q -= alpha[i] * Y[i];
    }
    double gamma = S.empty() ? 1.0 / std::max(gn, 1e-300) : S.back().dot(Y.back()) / Y.back().squaredNorm();
    Vec d = gamma * q;
    for (size_t i = 0; i < S.size(); ++i) {
      const double beta = rho[i] * Y[i].dot(d);
      d += (alpha[i] - beta) * S[i];
    }
    d = -d;
    double slope = g.dot(d);
    if (!(slope < 0)) {
      S.clear();
      Y.clear();
      rho.clear();
      d = -g / std::max(gn, 1e-300);
      slope = g.dot(d);
    }
    double t = 1.0;
    Vec xn, gn_vec(x.size());
    double fn = 0;
    bool accepted = false;
    // Energies of large systems carry rounding noise well above the decrease
    // predicted near convergence; there the approximate Wolfe test, which only
    // uses the (accurate) directional derivative, takes over.
    const double noise = 1e-11 * (1.0 + std::abs(f));
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + t * d;
      fn = fun(xn, &gn_vec);
      if (std::isfinite(fn) && fn <= f + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      const double dn = gn_vec.dot(d);
      if (std::isfinite(fn) && fn <= f + noise && dn >= 0.9 * slope && dn <= -0.8 * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!S.empty()) {
        S.clear();
        Y.clear();
        rho.clear();
        continue;
      }
      res.message = "line search failed";
      break;
    }
    if (fn > f + noise) res.monotone = false;
    Vec s = xn - x, y = gn_vec - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      S.push_back(s);
      Y.push_back(y);
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opt.memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    x = std::move(xn);
    g = gn_vec;
    f = fn;
  }
  res.x = std::move(x);
  res.f = f;
  res.grad_norm = g.norm();
  res.iterations = it;
  if (res.message.empty()) res.message = res.converged ? "converged" : "iteration limit";
  return res;
}

OptimResult minimize_trust_region(const Objective& fun, Eigen::VectorXd x, const OptimOptions& opt) {
  using Vec = Eigen::VectorXd;
  OptimResult res;
  Vec g(x.size()), gt(x.size());
  double f = fun(x, &g);
  double delta = 1.0;
  int it = 0;
  auto hess_vec = [&](const Vec& v) {
    const double vn = v.norm();
    if (vn == 0) return Vec(Vec::Zero(v.size()));
    const double eps = opt.fd_step * (1.0 + x.norm()) / vn;
    fun(x + eps * v, &gt);
    return Vec((gt - g) / eps);
  };
  for (; it < opt.max_iter; ++it) {
    const double gn = g.norm();
    if (opt.monitor) opt.monitor(it, f, gn);
    if (opt.verbose && it % 10 == 0) std::cerr << "tr " << it << " f=" << f << " |g|=" << gn << "\n";
    if (gn < opt.grad_tol) {
      res.converged = true;
      break;
    }
    // Steihaug CG on the model g.p + p.Hp/2 inside |p| <= delta.
    const double cg_tol = std::min(0.5, std::sqrt(gn)) * gn;
    Vec p = Vec::Zero(x.size()), r = g, dvec = -g;
    bool boundary_hit = false;
    for (int j = 0; j < opt.cg_max_iter; ++j) {
      const Vec Hd = hess_vec(dvec);
      const double dHd = dvec.dot(Hd);
      auto to_boundary = [&]() {
        const double a = dvec.squaredNorm(), b = 2 * p.dot(dvec), c = p.squaredNorm() - delta * delta;
        const double tau = (-b + std::sqrt(b * b - 4 * a * c)) / (2 * a);
        p += tau * dvec;
        boundary_hit = true;
      };
      if (dHd <= 0) {
        to_boundary();
        break;
      }
      const double alpha = r.squaredNorm() / dHd;
      if ((p + alpha * dvec).norm() >= delta) {
        to_boundary();
        break;
      }
      p += alpha * dvec;
      const Vec rn = r + alpha * Hd;
      if (rn.norm() < cg_tol) break;
      const double beta = rn.squaredNorm() / r.squaredNorm();
      r = rn;
      dvec = -r + beta * dvec;
    }
    const Vec Hp = hess_vec(p);
    const double pred = -(g.dot(p) + 0.5 * p.dot(Hp));
    Vec xn = x + p, gn_vec(x.size());
    const double fn = fun(xn, &gn_vec);
    const double ratio = pred > 0 ? (f - fn) / pred : -1.0;
    if (ratio < 0.25)
      delta *= 0.25;
    else if (ratio > 0.75 && boundary_hit)
      delta *= 2.0;
    if (ratio > 1e-4 && std::isfinite(fn) && fn <= f) {
      x = std::move(xn);
      g = gn_vec;
      f = fn;
    }
    if (delta < 1e-14) {
      res.message = "trust region collapsed";
      break;
    }
  }
  res.x = std::move(x);
  res.f = f;
  res.grad_norm = g.norm();
  res.iterations = it;
  if (res.message.empty()) res.message = res.converged ? "converged" : "iteration limit";
  return res;
}

}  // namespace ldg
