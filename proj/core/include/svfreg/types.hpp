#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace svfreg {

// Error categories. The CLI maps each to a distinct exit code.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 3-vector in domain units (the registration domain is the cube [-1,1]^3).
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double squared_norm() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(squared_norm()); }
  double norm1() const { return std::abs(x) + std::abs(y) + std::abs(z); }
  double max_abs() const {
    return std::max(std::abs(x), std::max(std::abs(y), std::abs(z)));
  }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

using Point3 = Vec3;

/// N weighted sample points; weights form a probability vector (uniform 1/N
/// by default).
struct PointCloud {
  std::vector<Point3> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }

  /// Uniform-weight cloud over the given points.
  static PointCloud uniform(std::vector<Point3> pts);

  /// Throws ValidationError on non-finite points, negative weights, weight
  /// sum off 1 by more than 1e-9, or an empty cloud.
  void validate() const;
};

/// Triangle surface mesh. Faces index into `vertices`.
struct TriMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<int, 3>> faces;

  /// Throws ValidationError on dangling indices or degenerate (repeated
  /// index) faces.
  void validate() const;
};

struct RngSeed {
  std::uint64_t value = 0;
};

/// Deterministic random source. Identical seed and identical draw sequence
/// give bit-identical results on every platform: the engine is the
/// standard-specified mt19937_64 and all real-valued mappings are done here
/// explicitly instead of through implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(RngSeed seed) : eng_(seed.value) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0,1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Index in [0, n). Uses rejection sampling, so it is exactly uniform.
  std::size_t index(std::size_t n);

  /// Standard normal via Box-Muller (cosine branch only, deterministic).
  double normal();

 private:
  std::mt19937_64 eng_;
};

}  // namespace svfreg
