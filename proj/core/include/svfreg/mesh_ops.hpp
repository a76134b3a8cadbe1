#pragma once

#include <array>
#include <utility>
#include <vector>

#include "svfreg/types.hpp"

namespace svfreg {

/// p -> scale * R * p + t with R a proper rotation.
struct SimilarityTransform {
  double scale = 1.0;
  std::array<double, 9> rotation = {1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
  Vec3 translation;

  static SimilarityTransform identity() { return {}; }

  Point3 apply(const Point3& p) const;
  TriMesh apply(const TriMesh& mesh) const;
  PointCloud apply(const PointCloud& cloud) const;
  SimilarityTransform inverse() const;
  /// Composition (this after inner): result(p) = this(inner(p)).
  SimilarityTransform compose(const SimilarityTransform& inner) const;

  /// Throws ValidationError unless R is orthonormal (within 1e-9), det(R) = +1,
  /// and scale > 0.
  void validate() const;
};

/// Rescales and recenters so the axis-aligned bounding box is centered at the
/// origin with its longest side exactly 2. Returns the transformed mesh and
/// the transform that maps input to output. Throws ValidationError for an
/// empty mesh or one with zero extent on every axis.
std::pair<TriMesh, SimilarityTransform> normalize_to_cube(const TriMesh& mesh);

/// N points drawn area-weighted over the triangles, uniform barycentric
/// within each; weights 1/N. Deterministic per seed.
PointCloud sample_surface(const TriMesh& mesh, int n, RngSeed seed);

/// N distinct vertex indices chosen uniformly without replacement; the index
/// list lets the caller sample the same vertices on a corresponded mesh.
std::pair<PointCloud, std::vector<int>> sample_vertices(const TriMesh& mesh, int n,
                                                        RngSeed seed);

/// Cloud of the given vertex indices with uniform weights.
PointCloud cloud_from_vertex_indices(const TriMesh& mesh, const std::vector<int>& indices);

/// Vertices incident to an edge that belongs to exactly one face, sorted.
std::vector<int> border_vertices(const TriMesh& mesh);

/// Removes every vertex of `fixed` whose nearest `templ` vertex lies on the
/// border of `templ`, along with all faces touching a removed vertex;
/// remaining vertices are re-indexed compactly. Throws ValidationError when
/// nothing remains.
TriMesh crop_to_template(const TriMesh& fixed, const TriMesh& templ);

/// Iterative closest point with a closed-form similarity (scale, rotation,
/// translation) fit per round. Runs at most `iterations` rounds, stopping
/// early once the mean correspondence distance improves by less than 1e-8.
/// The seed is accepted for interface stability; correspondences are exact
/// nearest neighbors, so the procedure draws no randomness. If `cost_trace`
/// is non-null it receives the mean correspondence distance per round.
SimilarityTransform similarity_icp(const TriMesh& moving, const TriMesh& fixed,
                                   int iterations, RngSeed seed = {},
                                   std::vector<double>* cost_trace = nullptr);

}  // namespace svfreg
