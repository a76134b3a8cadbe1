#pragma once

#include <vector>

#include "svfreg/grid.hpp"
#include "svfreg/types.hpp"

namespace svfreg {

/// Separable Gaussian kernel. `sigma` is in grid-node units: the kernel
/// configures a fixed-size convolution on the V^3 tensor, independent of the
/// domain spacing.
struct SmoothingKernel {
  int size = 15;
  double sigma = 4.0;

  /// Normalized 1D weights (length `size`, sum 1). Throws ValidationError
  /// for even size or non-positive sigma.
  std::vector<double> weights() const;
};

/// Separable Gaussian convolution along each axis of each component, with
/// replicate padding at the grid boundary. Throws ValidationError when
/// kernel.size > 2V-1.
GridField gaussian_smooth(const GridField& v, const SmoothingKernel& kernel);

/// Exact adjoint of gaussian_smooth (replicate padding makes the operator
/// slightly asymmetric near the boundary, so this is not the same
/// convolution there).
GridField gaussian_smooth_adjoint(const GridField& g, const SmoothingKernel& kernel);

/// Scaling and squaring: u0 = v / 2^T, then T times
/// u_{k+1}(p) = u_k(p) + u_k(p + u_k(p)) with trilinear resampling.
/// The result approximates the unit-time flow of the stationary field v.
Deformation exponentiate(const GridField& v, int squaring_steps);

/// Same computation, keeping every intermediate displacement level
/// u_0..u_T. levels.back() equals the returned displacement. Used by the
/// gradient pass, which needs the forward intermediates.
Deformation exponentiate_with_levels(const GridField& v, int squaring_steps,
                                     std::vector<GridField>& levels);

/// Componentwise negation; exponentiate(invert_velocity(v), T) approximates
/// the inverse of exponentiate(v, T).
GridField invert_velocity(const GridField& v);

/// p -> p + u(p) for every point; weights unchanged.
PointCloud warp_points(const Deformation& d, const PointCloud& pts);

/// Vertices warped as warp_points, faces unchanged.
TriMesh warp_mesh(const Deformation& d, const TriMesh& mesh);

/// det(I + du/dp) per node, du/dp by central finite differences with node
/// spacing h (one-sided at the boundary). Requires V >= 3.
std::vector<double> jacobian_determinant(const Deformation& d);

/// Reference integrator: p_{k+1} = p_k + (1/steps) * v(p_k), `steps` times.
/// Validation oracle for exponentiate.
PointCloud euler_flow_oracle(const GridField& v, const PointCloud& pts, int steps);

}  // namespace svfreg
