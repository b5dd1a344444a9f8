#pragma once

// Disk triangulation and piecewise-linear Q-tensor fields.

#include "ldg/tensor.hpp"

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <vector>

namespace ldg {

using Vec2 = Eigen::Vector2d;

/// Concentric-ring triangulation of the closed disk of radius R.
/// Ring j sits at radius R (j/N)^grading and carries 6j equally spaced nodes;
/// node 0 is the origin. The boundary ring is exact (|x| = R).
struct DiskMesh {
  double R = 1.0;
  double h = 1.0;  // radial ring spacing for grading == 1
  int rings = 0;
  double grading = 1.0;
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> boundary_nodes;
  std::vector<double> boundary_phi;
  std::vector<char> is_boundary;
  std::vector<int> ring_start;  // first node index of each ring, size rings + 2

  // Per-triangle geometry (filled by finalize()).
  std::vector<double> area;
  std::vector<Eigen::Matrix<double, 2, 3>> grad_lambda;  // column i = grad of barycentric i
  std::vector<double> lumped_mass;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  /// Largest edge length.
  double max_edge() const;

  /// Triangle containing x (or the nearest one for points just outside the
  /// polygon) together with barycentric coordinates.
  std::pair<int, Eigen::Vector3d> locate(const Vec2& x) const;

  void finalize();

 private:
  std::vector<std::vector<int>> buckets_;
  double bucket_size_ = 1.0;
  int bucket_dim_ = 1;
};

/// Throws std::invalid_argument unless 0 < target_h < R, or if the mesh would
/// exceed `max_nodes`.
DiskMesh build_mesh(double R, double target_h, double grading = 1.0, int max_nodes = 4000000);

/// Piecewise-linear tensor field. Nodal values are stored as coefficients in
/// the fixed lab basis, which keeps every nodal tensor exactly symmetric and
/// traceless.
class Field2D {
 public:
  Field2D() = default;
  Field2D(std::shared_ptr<const DiskMesh> mesh, const MaterialParams& params);

  const DiskMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const DiskMesh> mesh_ptr() const { return mesh_; }
  const MaterialParams& params() const { return params_; }
  void set_params(const MaterialParams& p) { params_ = p; }

  int num_nodes() const { return mesh_->num_nodes(); }

  QTensor q(int node) const { return QTensor::from_lab(coeffs_.col(node)); }
  void set_q(int node, const QTensor& q) { coeffs_.col(node) = q.lab_coefficients(); }

  Eigen::Matrix<double, 5, Eigen::Dynamic>& coeffs() { return coeffs_; }
  const Eigen::Matrix<double, 5, Eigen::Dynamic>& coeffs() const { return coeffs_; }

  /// Writes boundary_data(phi) into every boundary node.
  void apply_boundary();

  /// Barycentric interpolation.
  Vec5 interpolate(const Vec2& x) const;

  /// Per-triangle constant gradient: 5x2 matrix d q_a / d x_m.
  Eigen::Matrix<double, 5, 2> element_gradient(int tri) const;

  /// Area-weighted nodal average of element gradients.
  std::vector<Eigen::Matrix<double, 5, 2>> recovered_gradients() const;

 private:
  std::shared_ptr<const DiskMesh> mesh_;
  MaterialParams params_;
  Eigen::Matrix<double, 5, Eigen::Dynamic> coeffs_;
};

/// Field Q(x) = sum_i w_i(|x|) E_i(phi) from radial component tables
/// sampled on a uniform grid r_j = j R / (n - 1); linear interpolation.
struct RadialProfile;
Field2D field_from_profile(std::shared_ptr<const DiskMesh> mesh, const MaterialParams& params,
                           const RadialProfile& profile);

/// Field with every node set to q(x), followed by the boundary data.
template <class F>
Field2D field_from_function(std::shared_ptr<const DiskMesh> mesh, const MaterialParams& params, F&& f) {
  Field2D fld(mesh, params);
  for (int i = 0; i < mesh->num_nodes(); ++i) fld.set_q(i, f(mesh->nodes[i]));
  fld.apply_boundary();
  return fld;
}

}  // namespace ldg
