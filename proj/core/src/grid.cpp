#include "svfreg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace svfreg {

GridField::GridField(int nodes_per_axis) : V(nodes_per_axis) {
  if (V < 2) throw ValidationError("grid needs V >= 2");
  data.assign(value_count(), 0.0);
}

double GridField::max_abs() const {
  double m = 0.0;
  for (double v : data) m = std::max(m, std::abs(v));
  return m;
}

bool GridField::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

void GridField::validate() const {
  if (V < 2) throw ValidationError("grid needs V >= 2");
  if (data.size() != value_count())
    throw ValidationError("grid buffer has " + std::to_string(data.size()) +
                          " values, expected " + std::to_string(value_count()));
  if (!all_finite()) throw ValidationError("grid contains non-finite values");
}

GridField operator+(const GridField& a, const GridField& b) {
  GridField r = a;
  for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] += b.data[i];
  return r;
}

GridField operator-(const GridField& a, const GridField& b) {
  GridField r = a;
  for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] -= b.data[i];
  return r;
}

GridField operator*(double s, const GridField& f) {
  GridField r = f;
  for (double& v : r.data) v *= s;
  return r;
}

Point3 grid_node_position(int V, int i, int j, int k) {
  if (V < 2) throw ValidationError("grid needs V >= 2");
  if (i < 0 || i >= V || j < 0 || j >= V || k < 0 || k >= V)
    throw ValidationError("grid node index out of range");
  const double h = 2.0 / (V - 1);
  return {-1.0 + i * h, -1.0 + j * h, -1.0 + k * h};
}

TrilinearStencil trilinearStencilImpl(int V, const Point3& p) {
  TrilinearStencil s;
  const double h = 2.0 / (V - 1);
  const double coords[3] = {p.x, p.y, p.z};
  for (int a = 0; a < 3; ++a) {
    double g = (coords[a] + 1.0) / h;
    double dg = 1.0 / h;
    if (g <= 0.0) {
      g = 0.0;
      dg = 0.0;
    } else if (g >= V - 1) {
      g = V - 1;
      dg = 0.0;
    }
    int i0 = static_cast<int>(g);
    if (i0 > V - 2) i0 = V - 2;
    s.base[a] = i0;
    s.frac[a] = g - i0;
    s.dcoord_dpos[a] = dg;
  }
  const double fx = s.frac[0], fy = s.frac[1], fz = s.frac[2];
  const double wx[2] = {1.0 - fx, fx};
  const double wy[2] = {1.0 - fy, fy};
  const double wz[2] = {1.0 - fz, fz};
  int c = 0;
  for (int dx = 0; dx < 2; ++dx)
    for (int dy = 0; dy < 2; ++dy)
      for (int dz = 0; dz < 2; ++dz, ++c) {
        s.corner[c] =
            (static_cast<std::size_t>(s.base[0] + dx) * V + (s.base[1] + dy)) * V +
            (s.base[2] + dz);
        s.weight[c] = wx[dx] * wy[dy] * wz[dz];
      }
  return s;
}

TrilinearStencil trilinear_stencil(const GridField& field, const Point3& p) {
  return trilinearStencilImpl(field.V, p);
}

Vec3 trilinear_sample(const GridField& field, const Point3& p) {
  const TrilinearStencil s = trilinearStencilImpl(field.V, p);
  Vec3 out;
  for (int c = 0; c < 8; ++c) {
    const double* v = &field.data[3 * s.corner[c]];
    out.x += s.weight[c] * v[0];
    out.y += s.weight[c] * v[1];
    out.z += s.weight[c] * v[2];
  }
  return out;
}

Vec3 trilinear_sample_with_jacobian(const GridField& field, const Point3& p,
                                    double jac[3][3]) {
  const TrilinearStencil s = trilinearStencilImpl(field.V, p);
  const double fx = s.frac[0], fy = s.frac[1], fz = s.frac[2];
  const double wx[2] = {1.0 - fx, fx};
  const double wy[2] = {1.0 - fy, fy};
  const double wz[2] = {1.0 - fz, fz};
  const double dx[2] = {-1.0, 1.0};

  Vec3 out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) jac[r][c] = 0.0;

  int c = 0;
  for (int ax = 0; ax < 2; ++ax)
    for (int ay = 0; ay < 2; ++ay)
      for (int az = 0; az < 2; ++az, ++c) {
        const double* v = &field.data[3 * s.corner[c]];
        const double w = wx[ax] * wy[ay] * wz[az];
        const double dwdx = dx[ax] * wy[ay] * wz[az] * s.dcoord_dpos[0];
        const double dwdy = wx[ax] * dx[ay] * wz[az] * s.dcoord_dpos[1];
        const double dwdz = wx[ax] * wy[ay] * dx[az] * s.dcoord_dpos[2];
        for (int r = 0; r < 3; ++r) {
          jac[r][0] += dwdx * v[r];
          jac[r][1] += dwdy * v[r];
          jac[r][2] += dwdz * v[r];
        }
        out.x += w * v[0];
        out.y += w * v[1];
        out.z += w * v[2];
      }
  return out;
}

}  // namespace svfreg
