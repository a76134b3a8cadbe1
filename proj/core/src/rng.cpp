#include <numbers>

#include "svfreg/types.hpp"

namespace svfreg {

PointCloud PointCloud::uniform(std::vector<Point3> pts) {
  PointCloud c;
  const double w = 1.0 / static_cast<double>(pts.size());
  c.weights.assign(pts.size(), w);
  c.points = std::move(pts);
  return c;
}

void PointCloud::validate() const {
  if (points.empty()) throw ValidationError("point cloud is empty");
  if (points.size() != weights.size())
    throw ValidationError("point/weight count mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].finite()) throw ValidationError("non-finite point in cloud");
    if (!(weights[i] >= 0.0)) throw ValidationError("negative weight in cloud");
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("cloud weights sum to " + std::to_string(sum) +
                          ", expected 1");
}

void TriMesh::validate() const {
  const int n = static_cast<int>(vertices.size());
  for (const auto& v : vertices)
    if (!v.finite()) throw ValidationError("non-finite vertex");
  for (const auto& f : faces) {
    for (int idx : f)
      if (idx < 0 || idx >= n)
        throw ValidationError("face index " + std::to_string(idx) +
                              " out of range (vertex count " +
                              std::to_string(n) + ")");
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
      throw ValidationError("degenerate face with repeated vertex index");
  }
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw ValidationError("Rng::index of empty range");
  const std::uint64_t span = n;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  for (;;) {
    std::uint64_t r = eng_();
    if (r < limit) return static_cast<std::size_t>(r % span);
  }
}

double Rng::normal() {
  // Box-Muller, cosine branch. u1 shifted away from 0 to keep log finite.
  double u1 = uniform01();
  double u2 = uniform01();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace svfreg
