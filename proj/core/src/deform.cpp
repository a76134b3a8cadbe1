#include "svfreg/deform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svfreg/parallel.hpp"

namespace svfreg {

std::vector<double> SmoothingKernel::weights() const {
  if (size < 1 || size % 2 == 0)
    throw ValidationError("smoothing kernel size must be odd and positive");
  if (!(sigma > 0.0)) throw ValidationError("smoothing kernel sigma must be positive");
  const int r = size / 2;
  std::vector<double> w(size);
  double sum = 0.0;
  for (int k = -r; k <= r; ++k) {
    w[k + r] = std::exp(-0.5 * (double(k) * k) / (sigma * sigma));
    sum += w[k + r];
  }
  for (double& x : w) x /= sum;
  return w;
}

namespace {

// One separable pass along `axis`. Forward: out[i] = sum_k w[k] in[clamp(i+k-r)].
// Adjoint: out[clamp(i+k-r)] += w[k] in[i]. Lines along the axis are
// independent and processed in parallel; within a line the loop is serial.
void axis_pass(const GridField& in, GridField& out, const std::vector<double>& w,
               int axis, bool adjoint) {
  const int V = in.V;
  const int r = static_cast<int>(w.size()) / 2;
  // Node strides for (x,y,z) indices in flat node order.
  const std::ptrdiff_t strides[3] = {static_cast<std::ptrdiff_t>(V) * V, V, 1};
  const std::ptrdiff_t stride = strides[axis];
  const int o1 = (axis + 1) % 3, o2 = (axis + 2) % 3;

  std::fill(out.data.begin(), out.data.end(), 0.0);
  const std::size_t lines = static_cast<std::size_t>(V) * V;
  parallel_for(lines, [&](std::size_t lb, std::size_t le) {
    std::vector<double> line(V);
    for (std::size_t l = lb; l < le; ++l) {
      int idx[3];
      idx[o1] = static_cast<int>(l / V);
      idx[o2] = static_cast<int>(l % V);
      idx[axis] = 0;
      const std::size_t base =
          (static_cast<std::size_t>(idx[0]) * V + idx[1]) * V + idx[2];
      for (int comp = 0; comp < 3; ++comp) {
        const double* src = &in.data[3 * base + comp];
        double* dst = &out.data[3 * base + comp];
        for (int i = 0; i < V; ++i) line[i] = src[3 * stride * i];
        if (!adjoint) {
          for (int i = 0; i < V; ++i) {
            double acc = 0.0;
            for (int k = -r; k <= r; ++k) {
              const int j = std::clamp(i + k, 0, V - 1);
              acc += w[k + r] * line[j];
            }
            dst[3 * stride * i] = acc;
          }
        } else {
          for (int i = 0; i < V; ++i) {
            const double g = line[i];
            for (int k = -r; k <= r; ++k) {
              const int j = std::clamp(i + k, 0, V - 1);
              dst[3 * stride * j] += w[k + r] * g;
            }
          }
        }
      }
    }
  });
}

GridField smooth_impl(const GridField& v, const SmoothingKernel& kernel, bool adjoint) {
  v.validate();
  if (kernel.size > 2 * v.V - 1)
    throw ValidationError("smoothing kernel size " + std::to_string(kernel.size) +
                          " exceeds 2V-1 for V=" + std::to_string(v.V));
  const std::vector<double> w = kernel.weights();
  GridField a = v;
  GridField b(v.V);
  // Adjoint applies the per-axis adjoints in reverse order; the passes
  // commute mathematically but this keeps the operator the exact transpose.
  const int order[3] = {0, 1, 2};
  for (int s = 0; s < 3; ++s) {
    const int axis = adjoint ? order[2 - s] : order[s];
    axis_pass(a, b, w, axis, adjoint);
    std::swap(a, b);
  }
  return a;
}

}  // namespace

GridField gaussian_smooth(const GridField& v, const SmoothingKernel& kernel) {
  return smooth_impl(v, kernel, false);
}

GridField gaussian_smooth_adjoint(const GridField& g, const SmoothingKernel& kernel) {
  return smooth_impl(g, kernel, true);
}

namespace {

// One squaring step: out(p) = u(p) + u(p + u(p)) at every node.
void squaring_step(const GridField& u, GridField& out) {
  const int V = u.V;
  const double h = u.spacing();
  parallel_for(u.node_count(), [&](std::size_t nb, std::size_t ne) {
    for (std::size_t n = nb; n < ne; ++n) {
      const std::size_t iz = n % V;
      const std::size_t iy = (n / V) % V;
      const std::size_t ix = n / (static_cast<std::size_t>(V) * V);
      const Point3 pos{-1.0 + ix * h, -1.0 + iy * h, -1.0 + iz * h};
      const Vec3 d = u.at(n);
      const Vec3 s = trilinear_sample(u, pos + d);
      out.set(n, d + s);
    }
  });
}

}  // namespace

Deformation exponentiate(const GridField& v, int squaring_steps) {
  std::vector<GridField> levels;
  return exponentiate_with_levels(v, squaring_steps, levels);
}

Deformation exponentiate_with_levels(const GridField& v, int squaring_steps,
                                     std::vector<GridField>& levels) {
  v.validate();
  if (squaring_steps < 0) throw ValidationError("squaring steps must be >= 0");
  levels.clear();
  levels.reserve(squaring_steps + 1);

  const double scale = std::ldexp(1.0, -squaring_steps);  // 2^-T
  levels.push_back(scale * v);
  for (int k = 0; k < squaring_steps; ++k) {
    GridField next(v.V);
    squaring_step(levels.back(), next);
    levels.push_back(std::move(next));
  }

  Deformation d;
  d.displacement = levels.back();
  d.direction = Deformation::Direction::forward;
  d.squaring_steps = squaring_steps;
  return d;
}

GridField invert_velocity(const GridField& v) {
  GridField r = v;
  for (double& x : r.data) x = -x;
  return r;
}

PointCloud warp_points(const Deformation& d, const PointCloud& pts) {
  PointCloud out = pts;
  parallel_for(pts.points.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      out.points[i] = pts.points[i] + trilinear_sample(d.displacement, pts.points[i]);
  });
  return out;
}

TriMesh warp_mesh(const Deformation& d, const TriMesh& mesh) {
  TriMesh out = mesh;
  parallel_for(mesh.vertices.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      out.vertices[i] = mesh.vertices[i] + trilinear_sample(d.displacement, mesh.vertices[i]);
  });
  return out;
}

std::vector<double> jacobian_determinant(const Deformation& d) {
  const GridField& u = d.displacement;
  const int V = u.V;
  if (V < 3) throw ValidationError("jacobian_determinant needs V >= 3");
  const double h = u.spacing();
  std::vector<double> det(u.node_count());

  parallel_for(u.node_count(), [&](std::size_t nb, std::size_t ne) {
    for (std::size_t n = nb; n < ne; ++n) {
      const int iz = static_cast<int>(n % V);
      const int iy = static_cast<int>((n / V) % V);
      const int ix = static_cast<int>(n / (static_cast<std::size_t>(V) * V));
      double J[3][3];
      const int idx[3] = {ix, iy, iz};
      for (int a = 0; a < 3; ++a) {
        int lo[3] = {ix, iy, iz}, hi[3] = {ix, iy, iz};
        double denom;
        if (idx[a] == 0) {
          hi[a] = 1;
          denom = h;
        } else if (idx[a] == V - 1) {
          lo[a] = V - 2;
          denom = h;
        } else {
          lo[a] -= 1;
          hi[a] += 1;
          denom = 2.0 * h;
        }
        const Vec3 dv = (u.at(hi[0], hi[1], hi[2]) - u.at(lo[0], lo[1], lo[2])) / denom;
        J[0][a] = dv.x;
        J[1][a] = dv.y;
        J[2][a] = dv.z;
      }
      for (int r = 0; r < 3; ++r) J[r][r] += 1.0;
      det[n] = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
               J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
               J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
    }
  });
  return det;
}

PointCloud euler_flow_oracle(const GridField& v, const PointCloud& pts, int steps) {
  if (steps < 1) throw ValidationError("euler_flow_oracle needs steps >= 1");
  PointCloud out = pts;
  const double dt = 1.0 / steps;
  parallel_for(pts.points.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      Point3 p = pts.points[i];
      for (int s = 0; s < steps; ++s) p += dt * trilinear_sample(v, p);
      out.points[i] = p;
    }
  });
  return out;
}

}  // namespace svfreg
