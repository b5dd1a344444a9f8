#include "ldg/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ldg {

namespace {

void stitch(const std::vector<int>& inner, const std::vector<int>& outer, std::vector<std::array<int, 3>>& tris) {
  const int ni = static_cast<int>(inner.size()), no = static_cast<int>(outer.size());
  if (ni == 1) {
    for (int j = 0; j < no; ++j) tris.push_back({inner[0], outer[j], outer[(j + 1) % no]});
    return;
  }
  int i = 0, j = 0;
  while (i < ni || j < no) {
    const double ai = (i < ni) ? double(i + 1) / ni : 2.0;
    const double aj = (j < no) ? double(j + 1) / no : 2.0;
    if (ai < aj - 1e-12) {
      tris.push_back({inner[i], outer[j % no], inner[(i + 1) % ni]});
      ++i;
    } else {
      tris.push_back({inner[i % ni], outer[j], outer[(j + 1) % no]});
      ++j;
    }
  }
}

}  // namespace

DiskMesh build_mesh(double R, double target_h, double grading, int max_nodes) {
  if (!(R > 0) || !(target_h > 0) || !(target_h < R))
    throw std::invalid_argument("build_mesh: need 0 < target_h < R");
  if (!(grading >= 1.0)) throw std::invalid_argument("build_mesh: grading must be >= 1");
  const int N = std::max(1, static_cast<int>(std::ceil(R / target_h - 1e-9)));
  const double count = 1.0 + 3.0 * N * (N + 1.0);
  if (count > max_nodes) throw std::invalid_argument("build_mesh: mesh too large for node budget");

  DiskMesh m;
  m.R = R;
  m.rings = N;
  m.h = R / N;
  m.grading = grading;
  m.nodes.reserve(static_cast<size_t>(count));
  m.nodes.emplace_back(0.0, 0.0);
  m.ring_start.push_back(0);
  std::vector<int> prev{0};
  for (int j = 1; j <= N; ++j) {
    m.ring_start.push_back(m.num_nodes());
    const double r = (j == N) ? R : R * std::pow(double(j) / N, grading);
    const int n = 6 * j;
    std::vector<int> ring(n);
    for (int i = 0; i < n; ++i) {
      const double phi = 2.0 * M_PI * i / n;
      ring[i] = m.num_nodes();
      m.nodes.emplace_back(r * std::cos(phi), r * std::sin(phi));
      if (j == N) {
        m.boundary_nodes.push_back(ring[i]);
        m.boundary_phi.push_back(phi);
      }
    }
    stitch(prev, ring, m.triangles);
    prev = std::move(ring);
  }
  m.ring_start.push_back(m.num_nodes());
  m.is_boundary.assign(m.nodes.size(), 0);
  for (int b : m.boundary_nodes) m.is_boundary[b] = 1;
  for (auto& t : m.triangles) {
    const Vec2 e1 = m.nodes[t[1]] - m.nodes[t[0]], e2 = m.nodes[t[2]] - m.nodes[t[0]];
    if (e1.x() * e2.y() - e1.y() * e2.x() < 0) std::swap(t[1], t[2]);
  }
  m.finalize();
  return m;
}

void DiskMesh::finalize() {
  const int nt = num_triangles();
  area.resize(nt);
  grad_lambda.resize(nt);
  lumped_mass.assign(nodes.size(), 0.0);
  for (int t = 0; t < nt; ++t) {
    const auto& tr = triangles[t];
    const Vec2 &p0 = nodes[tr[0]], &p1 = nodes[tr[1]], &p2 = nodes[tr[2]];
    const double det = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
    if (!(det > 1e-14 * R * R)) throw std::runtime_error("degenerate or inverted triangle");
    area[t] = 0.5 * det;
    Eigen::Matrix<double, 2, 3> g;
    g.col(0) << (p1.y() - p2.y()) / det, (p2.x() - p1.x()) / det;
    g.col(1) << (p2.y() - p0.y()) / det, (p0.x() - p2.x()) / det;
    g.col(2) << (p0.y() - p1.y()) / det, (p1.x() - p0.x()) / det;
    grad_lambda[t] = g;
    for (int i : tr) lumped_mass[i] += area[t] / 3.0;
  }

  bucket_dim_ = std::max(1, std::min(512, static_cast<int>(std::sqrt(double(nt)) / 2)));
  bucket_size_ = 2.0 * R / bucket_dim_;
  buckets_.assign(static_cast<size_t>(bucket_dim_) * bucket_dim_, {});
  auto cell = [&](double v) {
    return std::clamp(static_cast<int>(std::floor((v + R) / bucket_size_)), 0, bucket_dim_ - 1);
  };
  for (int t = 0; t < nt; ++t) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (int i : triangles[t]) {
      xmin = std::min(xmin, nodes[i].x());
      xmax = std::max(xmax, nodes[i].x());
      ymin = std::min(ymin, nodes[i].y());
      ymax = std::max(ymax, nodes[i].y());
    }
    for (int bx = cell(xmin); bx <= cell(xmax); ++bx)
      for (int by = cell(ymin); by <= cell(ymax); ++by) buckets_[bx * bucket_dim_ + by].push_back(t);
  }
}

double DiskMesh::max_edge() const {
  double e = 0;
  for (const auto& t : triangles)
    for (int i = 0; i < 3; ++i) e = std::max(e, (nodes[t[i]] - nodes[t[(i + 1) % 3]]).norm());
  return e;
}

std::pair<int, Eigen::Vector3d> DiskMesh::locate(const Vec2& x) const {
  auto cell = [&](double v) {
    return std::clamp(static_cast<int>(std::floor((v + R) / bucket_size_)), 0, bucket_dim_ - 1);
  };
  const int cx = cell(x.x()), cy = cell(x.y());
  int best = -1;
  double best_min = -std::numeric_limits<double>::infinity();
  Eigen::Vector3d best_l;
  for (int ring = 0; ring <= 2 && best_min < -1e-12; ++ring) {
    for (int bx = std::max(0, cx - ring); bx <= std::min(bucket_dim_ - 1, cx + ring); ++bx) {
      for (int by = std::max(0, cy - ring); by <= std::min(bucket_dim_ - 1, cy + ring); ++by) {
        for (int t : buckets_[bx * bucket_dim_ + by]) {
          const auto& tr = triangles[t];
          Eigen::Vector3d l;
          for (int i = 0; i < 3; ++i) {
            const Vec2 d = x - nodes[tr[(i + 1) % 3]];
            l[i] = grad_lambda[t].col(i).dot(d);
          }
          const double mn = l.minCoeff();
          if (mn > best_min) {
            best_min = mn;
            best = t;
            best_l = l;
          }
        }
      }
    }
  }
  if (best < 0) throw std::runtime_error("locate: point far outside mesh");
  if (best_min < 0) {
    best_l = best_l.cwiseMax(0.0);
    best_l /= best_l.sum();
  }
  return {best, best_l};
}

}  // namespace ldg
