#pragma once

#include <cstddef>
#include <vector>

#include "svfreg/types.hpp"

namespace svfreg {

/// Node-centered V x V x V grid of 3-vectors over the cube [-1,1]^3,
/// endpoints included, spacing h = 2/(V-1). Storage is row-major with the
/// z index fastest; the three components of a node are contiguous:
/// data[3*((ix*V + iy)*V + iz) + c].
struct GridField {
  int V = 0;
  std::vector<double> data;

  GridField() = default;
  explicit GridField(int nodes_per_axis);

  static GridField zeros(int nodes_per_axis) { return GridField(nodes_per_axis); }

  double spacing() const { return 2.0 / (V - 1); }
  std::size_t node_count() const {
    return static_cast<std::size_t>(V) * V * V;
  }
  std::size_t value_count() const { return 3 * node_count(); }

  std::size_t node_index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * V + iy) * V + iz;
  }

  Vec3 at(int ix, int iy, int iz) const {
    const double* p = &data[3 * node_index(ix, iy, iz)];
    return {p[0], p[1], p[2]};
  }
  Vec3 at(std::size_t node) const {
    const double* p = &data[3 * node];
    return {p[0], p[1], p[2]};
  }
  void set(int ix, int iy, int iz, const Vec3& v) { set(node_index(ix, iy, iz), v); }
  void set(std::size_t node, const Vec3& v) {
    double* p = &data[3 * node];
    p[0] = v.x;
    p[1] = v.y;
    p[2] = v.z;
  }
  void add(std::size_t node, const Vec3& v) {
    double* p = &data[3 * node];
    p[0] += v.x;
    p[1] += v.y;
    p[2] += v.z;
  }

  double max_abs() const;
  bool all_finite() const;

  /// Throws ValidationError if V < 2, the buffer size is wrong, or any value
  /// is non-finite.
  void validate() const;
};

GridField operator+(const GridField& a, const GridField& b);
GridField operator-(const GridField& a, const GridField& b);
GridField operator*(double s, const GridField& f);

/// Position of node (i,j,k): (-1 + i*h, -1 + j*h, -1 + k*h). Throws
/// ValidationError when an index is out of [0, V).
Point3 grid_node_position(int V, int i, int j, int k);

/// Trilinear interpolation of the 8 surrounding node values. Coordinates
/// outside [-1,1]^3 are clamped to the boundary first, which makes the
/// operation total.
Vec3 trilinear_sample(const GridField& field, const Point3& p);

/// Interpolation stencil at p: flat node indices, weights, and which axes
/// were clamped (their position derivative is zero). Shared by the sampling
/// routines and the adjoint scatter passes.
struct TrilinearStencil {
  std::size_t corner[8];  // flat node indices, xyz-major corner order
  double weight[8];
  double frac[3];
  double dcoord_dpos[3];  // 1/h per axis, or 0 where clamped
  int base[3];
};

TrilinearStencil trilinear_stencil(const GridField& field, const Point3& p);

/// Sample value together with the 3x3 Jacobian of the interpolant with
/// respect to the sample position (row r, column c = d value_r / d p_c).
Vec3 trilinear_sample_with_jacobian(const GridField& field, const Point3& p,
                                    double jac[3][3]);

/// Displacement field u interpreted as the map phi(p) = p + u(p).
struct Deformation {
  enum class Direction { forward, inverse };

  GridField displacement;
  Direction direction = Direction::forward;
  int squaring_steps = 0;
};

}  // namespace svfreg
