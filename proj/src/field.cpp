#include "ldg/field.hpp"

#include "ldg/radial.hpp"

#include <cmath>
#include <stdexcept>

namespace ldg {

Field2D::Field2D(std::shared_ptr<const DiskMesh> mesh, const MaterialParams& params)
    : mesh_(std::move(mesh)), params_(params) {
  if (!mesh_) throw std::invalid_argument("Field2D: null mesh");
  coeffs_.setZero(5, mesh_->num_nodes());
}

void Field2D::apply_boundary() {
  const auto& m = *mesh_;
  for (size_t i = 0; i < m.boundary_nodes.size(); ++i)
    set_q(m.boundary_nodes[i], boundary_data(m.boundary_phi[i], params_));
}

Vec5 Field2D::interpolate(const Vec2& x) const {
  auto [t, l] = mesh_->locate(x);
  const auto& tr = mesh_->triangles[t];
  return l[0] * coeffs_.col(tr[0]) + l[1] * coeffs_.col(tr[1]) + l[2] * coeffs_.col(tr[2]);
}

Eigen::Matrix<double, 5, 2> Field2D::element_gradient(int t) const {
  const auto& tr = mesh_->triangles[t];
  const auto& g = mesh_->grad_lambda[t];
  Eigen::Matrix<double, 5, 2> G = Eigen::Matrix<double, 5, 2>::Zero();
  for (int i = 0; i < 3; ++i) G += coeffs_.col(tr[i]) * g.col(i).transpose();
  return G;
}

std::vector<Eigen::Matrix<double, 5, 2>> Field2D::recovered_gradients() const {
  const auto& m = *mesh_;
  std::vector<Eigen::Matrix<double, 5, 2>> out(m.num_nodes(), Eigen::Matrix<double, 5, 2>::Zero());
  std::vector<double> wsum(m.num_nodes(), 0.0);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto G = element_gradient(t);
    for (int i : m.triangles[t]) {
      out[i] += m.area[t] * G;
      wsum[i] += m.area[t];
    }
  }
  for (int i = 0; i < m.num_nodes(); ++i) out[i] /= wsum[i];
  return out;
}

Field2D field_from_profile(std::shared_ptr<const DiskMesh> mesh, const MaterialParams& params,
                           const RadialProfile& p) {
  if (params.k != p.k) throw std::invalid_argument("field_from_profile: winding mismatch");
  Field2D f(mesh, params);
  for (int i = 0; i < mesh->num_nodes(); ++i) {
    const Vec2& x = mesh->nodes[i];
    const double phi = std::atan2(x.y(), x.x());
    f.set_q(i, from_components(p.at(x.norm()), BasisFrame(phi, p.k)));
  }
  f.apply_boundary();
  return f;
}

}  // namespace ldg
