#pragma once

// Reduced radial energies for Q(r, phi) = sum_i w_i(r) E_i(phi), their
// minimizers, branch classification and the large-M constraint diagnostics.
//
// Discretization: uniform grid r_j = j h, j = 0..N, h = R/N. Derivative and
// 1/r terms are evaluated on cells (midpoint values, weight r_{j+1/2} h); the
// bulk term uses the nodal trapezoid rule with weight r_j. The value w0(0) is
// a free unknown (w0'(0) = 0 is the natural condition); w1..w4 vanish at r = 0
// and all components take the Dirichlet values at r = R.

#include "ldg/tensor.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <string>

namespace ldg {

struct RadialProfile {
  int k = 2;
  double R = 1.0;
  Eigen::VectorXd r;                              // N + 1 nodes
  Eigen::Matrix<double, 5, Eigen::Dynamic> w;     // components at the nodes

  int N() const { return static_cast<int>(r.size()) - 1; }
  double h() const { return R / N(); }
  /// Linear interpolation; clamped to [0, R].
  Vec5 at(double rr) const;
  /// Throws std::invalid_argument on non-finite values or boundary mismatch.
  void validate(const MaterialParams& p) const;

  static RadialProfile zeros(int N, double R, int k);
  /// Resample onto a grid with N nodes-intervals.
  RadialProfile resampled(int N) const;
};

/// (u, v) with Y = u E1 + v E0.
struct M0Profile {
  int k = 1;
  double R = 1.0;
  Eigen::VectorXd r, u, v;
};

enum class EnergyForm { Auto, Standard, Rewritten };
enum class Branch { Q2minus, Q2pm, Q3, Q5 };

std::string branch_name(Branch b);
Branch branch_from_name(const std::string& s);

using ComponentMask = std::array<bool, 5>;
inline constexpr ComponentMask kAllComponents{true, true, true, true, true};
inline constexpr ComponentMask kTwoComponents{true, true, false, false, false};
inline constexpr ComponentMask kThreeComponents{true, true, false, true, false};

/// Quadrature of the reduced energy. Auto selects the rewritten (shifted)
/// representation when M < 0; both agree up to rounding.
/// Throws for M != 0 with k != 2, or for an invalid profile.
double radial_energy(const RadialProfile& p, const MaterialParams& params, EnergyForm form = EnergyForm::Auto);

/// Gradient with respect to every nodal value (5 x (N+1)), including fixed ones.
Eigen::Matrix<double, 5, Eigen::Dynamic> radial_energy_gradient(const RadialProfile& p, const MaterialParams& params);

struct RadialOptions {
  int N = 2000;
  double tol = -1.0;  // gradient norm tolerance; negative selects 1e-8 * N
  int max_iter = 300;
  ComponentMask active = kAllComponents;
};

struct RadialResult {
  RadialProfile profile;
  double energy = 0;
  bool converged = false;
  double grad_norm = 0;
  int iterations = 0;
  std::string message;
};

RadialProfile radial_seed(Branch b, const MaterialParams& params, int N);

/// Damped Newton (Levenberg-shifted LDLT with Armijo backtracking).
/// Throws std::invalid_argument if k != 2 and M != 0, or if the elastic
/// constants violate L > 0, L + 4M/3 > 0.
RadialResult minimize_radial(const MaterialParams& params, const RadialProfile& init, const RadialOptions& opt = {});
RadialResult minimize_radial(const MaterialParams& params, Branch seed, RadialOptions opt = {});

/// w2 = w3 = w4 = 0 throughout.
RadialResult minimize_radial_two_component(const MaterialParams& params, RadialOptions opt = {},
                                           Branch seed = Branch::Q2minus);

struct M0Result {
  M0Profile profile;
  double energy = 0;
  bool converged = false;
  double grad_norm = 0;
};

/// M = 0, any k != 0. Throws if M != 0.
M0Result minimize_radial_M0(const MaterialParams& params, int N = 2000);
double radial_energy_M0(const M0Profile& p, const MaterialParams& params);
RadialProfile to_profile(const M0Profile& p);

/// Residual of the Euler-Lagrange ODE system by central differences at the
/// interior nodes (columns 0 and N are zero).
Eigen::Matrix<double, 5, Eigen::Dynamic> ode_residual(const RadialProfile& p, const MaterialParams& params);
/// Discrete L2(r dr) norm of ode_residual over interior nodes with r >= r_min.
double ode_residual_norm(const RadialProfile& p, const MaterialParams& params, double r_min = 0.0);

/// Sup norm of one component.
double component_sup(const RadialProfile& p, int i);
/// Discrete L2(r dr) norm of one component.
double component_l2(const RadialProfile& p, int i);

/// Q2-, Q2+-, Q3 or Q5 from sup norms; throws std::logic_error for an
/// unconverged result.
std::string classify_profile(const RadialProfile& p, double tol, bool converged = true);

struct GammaResidual {
  double constraint_norm;  // L2(r dr) norm of sqrt3 (w1 r^2)' - r^2 w0'
  double relative;         // divided by the norm of r^2 w0'
  double w2_norm, w3_norm; // sup norms
};

GammaResidual gamma_limit_residual(const RadialProfile& p);

/// Limit energy when the constraint holds (relative residual and the w2, w3 sup
/// norms below tol), +infinity otherwise.
double gamma_limit_energy(const RadialProfile& p, const MaterialParams& params, double tol = 1e-8);

struct HessianEig {
  double value;
  bool converged;
};

/// Smallest eigenvalue of the discrete second variation with respect to the
/// r-weighted mass, restricted to the active components.
HessianEig reduced_hessian_min_eig(const RadialProfile& p, const MaterialParams& params,
                                   const ComponentMask& active = kAllComponents);

/// v^T H v by the analytic sparse Hessian and by a second difference of the
/// energy along v (v indexes all nodal values; fixed entries are ignored).
double radial_hessian_quadratic(const RadialProfile& p, const MaterialParams& params,
                                const Eigen::Matrix<double, 5, Eigen::Dynamic>& v);

}  // namespace ldg
