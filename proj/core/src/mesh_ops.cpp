#include "svfreg/mesh_ops.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "svfreg/kdtree.hpp"
#include "svfreg/parallel.hpp"

namespace svfreg {

Point3 SimilarityTransform::apply(const Point3& p) const {
  const auto& r = rotation;
  return {scale * (r[0] * p.x + r[1] * p.y + r[2] * p.z) + translation.x,
          scale * (r[3] * p.x + r[4] * p.y + r[5] * p.z) + translation.y,
          scale * (r[6] * p.x + r[7] * p.y + r[8] * p.z) + translation.z};
}

TriMesh SimilarityTransform::apply(const TriMesh& mesh) const {
  TriMesh out = mesh;
  for (auto& v : out.vertices) v = apply(v);
  return out;
}

PointCloud SimilarityTransform::apply(const PointCloud& cloud) const {
  PointCloud out = cloud;
  for (auto& p : out.points) p = apply(p);
  return out;
}

SimilarityTransform SimilarityTransform::inverse() const {
  SimilarityTransform inv;
  inv.scale = 1.0 / scale;
  // R^-1 = R^T
  inv.rotation = {rotation[0], rotation[3], rotation[6], rotation[1], rotation[4],
                  rotation[7], rotation[2], rotation[5], rotation[8]};
  const SimilarityTransform tmp{inv.scale, inv.rotation, {0, 0, 0}};
  inv.translation = -1.0 * tmp.apply(translation);
  return inv;
}

SimilarityTransform SimilarityTransform::compose(const SimilarityTransform& inner) const {
  SimilarityTransform out;
  out.scale = scale * inner.scale;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += rotation[3 * r + k] * inner.rotation[3 * k + c];
      out.rotation[3 * r + c] = acc;
    }
  const SimilarityTransform outer_linear{scale, rotation, {0, 0, 0}};
  out.translation = outer_linear.apply(inner.translation) + translation;
  return out;
}

void SimilarityTransform::validate() const {
  if (!(scale > 0.0)) throw ValidationError("similarity scale must be positive");
  const auto& r = rotation;
  double max_dev = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += r[3 * k + i] * r[3 * k + j];
      max_dev = std::max(max_dev, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  if (max_dev > 1e-9) throw ValidationError("similarity rotation not orthonormal");
  const double det = r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
                     r[2] * (r[3] * r[7] - r[4] * r[6]);
  if (det < 0.0) throw ValidationError("similarity rotation has negative determinant");
}

std::pair<TriMesh, SimilarityTransform> normalize_to_cube(const TriMesh& mesh) {
  if (mesh.vertices.empty()) throw ValidationError("normalize_to_cube of empty mesh");
  Point3 lo = mesh.vertices[0], hi = mesh.vertices[0];
  for (const auto& v : mesh.vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
  }
  const Vec3 extent = hi - lo;
  const double longest = std::max(extent.x, std::max(extent.y, extent.z));
  if (!(longest > 0.0))
    throw ValidationError("normalize_to_cube: mesh has zero extent on all axes");

  SimilarityTransform t;
  t.scale = 2.0 / longest;
  const Point3 center = 0.5 * (lo + hi);
  t.translation = -t.scale * center;
  return {t.apply(mesh), t};
}

PointCloud sample_surface(const TriMesh& mesh, int n, RngSeed seed) {
  if (n < 1) throw ValidationError("sample_surface needs N >= 1");
  mesh.validate();
  std::vector<double> cum;
  std::vector<std::size_t> face_of;
  cum.reserve(mesh.faces.size());
  face_of.reserve(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& fc = mesh.faces[f];
    const Vec3 e1 = mesh.vertices[fc[1]] - mesh.vertices[fc[0]];
    const Vec3 e2 = mesh.vertices[fc[2]] - mesh.vertices[fc[0]];
    const double area = 0.5 * e1.cross(e2).norm();
    if (area > 0.0) {
      total += area;
      cum.push_back(total);
      face_of.push_back(f);
    }
  }
  if (cum.empty()) throw ValidationError("sample_surface: all faces degenerate");

  Rng rng(seed);
  std::vector<Point3> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01() * total;
    const std::size_t pick =
        std::min<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(),
                              cum.size() - 1);
    const auto& fc = mesh.faces[face_of[pick]];
    // sqrt trick: uniform barycentric coordinates
    const double r1 = std::sqrt(rng.uniform01());
    const double r2 = rng.uniform01();
    const double b0 = 1.0 - r1, b1 = r1 * (1.0 - r2), b2 = r1 * r2;
    pts.push_back(b0 * mesh.vertices[fc[0]] + b1 * mesh.vertices[fc[1]] +
                  b2 * mesh.vertices[fc[2]]);
  }
  return PointCloud::uniform(std::move(pts));
}

std::pair<PointCloud, std::vector<int>> sample_vertices(const TriMesh& mesh, int n,
                                                        RngSeed seed) {
  const int nv = static_cast<int>(mesh.vertices.size());
  if (n < 1) throw ValidationError("sample_vertices needs N >= 1");
  if (n > nv)
    throw ValidationError("sample_vertices: N=" + std::to_string(n) + " exceeds vertex count " +
                          std::to_string(nv));
  std::vector<int> pool(nv);
  std::iota(pool.begin(), pool.end(), 0);
  Rng rng(seed);
  // partial Fisher-Yates: first n slots become the sample
  for (int i = 0; i < n; ++i) {
    const std::size_t j = i + rng.index(nv - i);
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> indices(pool.begin(), pool.begin() + n);
  return {cloud_from_vertex_indices(mesh, indices), std::move(indices)};
}

PointCloud cloud_from_vertex_indices(const TriMesh& mesh, const std::vector<int>& indices) {
  std::vector<Point3> pts;
  pts.reserve(indices.size());
  for (int idx : indices) {
    if (idx < 0 || idx >= static_cast<int>(mesh.vertices.size()))
      throw ValidationError("vertex index out of range");
    pts.push_back(mesh.vertices[idx]);
  }
  return PointCloud::uniform(std::move(pts));
}

std::vector<int> border_vertices(const TriMesh& mesh) {
  mesh.validate();
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      const int a = f[e], b = f[(e + 1) % 3];
      ++edge_count[{std::min(a, b), std::max(a, b)}];
    }
  }
  std::vector<int> border;
  for (const auto& [edge, count] : edge_count) {
    if (count == 1) {
      border.push_back(edge.first);
      border.push_back(edge.second);
    }
  }
  std::sort(border.begin(), border.end());
  border.erase(std::unique(border.begin(), border.end()), border.end());
  return border;
}

TriMesh crop_to_template(const TriMesh& fixed, const TriMesh& templ) {
  fixed.validate();
  const std::vector<int> border = border_vertices(templ);
  if (border.empty()) return fixed;
  std::vector<bool> is_border(templ.vertices.size(), false);
  for (int b : border) is_border[b] = true;

  const KdTree3 tree(templ.vertices);
  const std::size_t nv = fixed.vertices.size();
  std::vector<char> removed(nv, 0);
  parallel_for(nv, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      removed[i] = is_border[tree.nearest(fixed.vertices[i])] ? 1 : 0;
  });

  std::vector<int> remap(nv, -1);
  TriMesh out;
  for (std::size_t i = 0; i < nv; ++i) {
    if (!removed[i]) {
      remap[i] = static_cast<int>(out.vertices.size());
      out.vertices.push_back(fixed.vertices[i]);
    }
  }
  if (out.vertices.empty())
    throw ValidationError("crop_to_template removed every vertex");
  for (const auto& f : fixed.faces) {
    if (removed[f[0]] || removed[f[1]] || removed[f[2]]) continue;
    out.faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
  }
  return out;
}

SimilarityTransform similarity_icp(const TriMesh& moving, const TriMesh& fixed,
                                   int iterations, RngSeed, std::vector<double>* cost_trace) {
  if (moving.vertices.empty() || fixed.vertices.empty())
    throw ValidationError("similarity_icp needs non-empty meshes");
  const KdTree3 tree(fixed.vertices);
  const std::size_t n = moving.vertices.size();

  SimilarityTransform current;
  double prev_cost = std::numeric_limits<double>::max();
  if (cost_trace) cost_trace->clear();

  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point3& p = moving.vertices[i];
    src.col(i) << p.x, p.y, p.z;
  }

  std::vector<int> nn(n);
  std::vector<double> d2(n);
  for (int it = 0; it < iterations; ++it) {
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i)
        nn[i] = tree.nearest(current.apply(moving.vertices[i]), &d2[i]);
    });
    // mean squared correspondence distance: the quantity the alternating
    // minimization provably never increases
    double cost = 0.0;
    for (double d : d2) cost += d;
    cost /= static_cast<double>(n);
    if (cost_trace) cost_trace->push_back(cost);
    if (prev_cost - cost < 1e-8) break;
    prev_cost = cost;

    for (std::size_t i = 0; i < n; ++i) {
      const Point3& q = fixed.vertices[nn[i]];
      dst.col(i) << q.x, q.y, q.z;
    }
    // Closed-form least-squares similarity for the current correspondences,
    // solved from the original moving vertices each round.
    const Eigen::Matrix4d m = Eigen::umeyama(src, dst, /*with_scaling=*/true);
    const double s = m.block<3, 3>(0, 0).row(0).norm();
    const Eigen::Matrix3d rot = m.block<3, 3>(0, 0) / s;
    SimilarityTransform next;
    next.scale = s;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) next.rotation[3 * r + c] = rot(r, c);
    next.translation = {m(0, 3), m(1, 3), m(2, 3)};
    current = next;
  }
  return current;
}

}  // namespace svfreg
