#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "svfreg/loss.hpp"
#include "svfreg/parallel.hpp"

// Log-domain Sinkhorn with symmetrized (Jacobi, averaged) updates, after the
// scheme used for debiased divergences in the geometric-loss literature.
// The self terms OT(a,a), OT(b,b) run the same update with a single
// potential; on identical inputs the cross iteration collapses onto that
// single-potential sequence bit-exactly, which is what makes SD(x,x) cancel
// to zero in floating point.

namespace svfreg {

namespace {

struct CostMatrix {
  std::vector<double> c;  // n*m, row-major
  std::size_t n = 0, m = 0;
  double operator()(std::size_t i, std::size_t j) const { return c[i * m + j]; }
};

double pair_cost(const Point3& a, const Point3& b, double p, SinkhornConfig::Cost kind) {
  if (kind == SinkhornConfig::Cost::powered_euclidean) {
    const double r = (a - b).norm();
    if (p == 1.0) return r;
    if (p == 2.0) return 0.5 * r * r;
    return std::pow(r, p) / p;
  }
  const double ax = std::abs(a.x - b.x), ay = std::abs(a.y - b.y), az = std::abs(a.z - b.z);
  if (p == 1.0) return ax + ay + az;
  return std::pow(std::pow(ax, p) + std::pow(ay, p) + std::pow(az, p), 1.0 / p) / p;
}

CostMatrix build_cost(const PointCloud& x, const PointCloud& y, const SinkhornConfig& cfg) {
  CostMatrix cm;
  cm.n = x.size();
  cm.m = y.size();
  cm.c.resize(cm.n * cm.m);
  parallel_for(cm.n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t j = 0; j < cm.m; ++j)
        cm.c[i * cm.m + j] = pair_cost(x.points[i], y.points[j], cfg.p, cfg.cost);
  });
  return cm;
}

std::vector<double> log_weights(const PointCloud& c) {
  std::vector<double> lw(c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    lw[i] = c.weights[i] > 0.0 ? std::log(c.weights[i])
                               : -std::numeric_limits<double>::infinity();
  return lw;
}

// out_i = -eps * log sum_j exp(lw_j + (pot_j - C_ij)/eps); rows in parallel,
// each row reduced serially in index order (deterministic).
void softmin_rows(const CostMatrix& cm, bool transpose, double eps,
                  const std::vector<double>& lw, const std::vector<double>& pot,
                  std::vector<double>& out) {
  const std::size_t rows = transpose ? cm.m : cm.n;
  const std::size_t cols = transpose ? cm.n : cm.m;
  out.resize(rows);
  parallel_for(rows, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < cols; ++j) {
        const double cij = transpose ? cm(j, i) : cm(i, j);
        const double t = lw[j] + (pot[j] - cij) / eps;
        if (t > mx) mx = t;
      }
      double acc = 0.0;
      for (std::size_t j = 0; j < cols; ++j) {
        const double cij = transpose ? cm(j, i) : cm(i, j);
        acc += std::exp(lw[j] + (pot[j] - cij) / eps - mx);
      }
      out[i] = -eps * (mx + std::log(acc));
    }
  });
}

struct SolveResult {
  std::vector<double> f, g;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

SolveResult solve_cross(const CostMatrix& cm, const std::vector<double>& la,
                        const std::vector<double>& lb, const std::vector<double>& wa,
                        const std::vector<double>& wb, const SinkhornConfig& cfg) {
  SolveResult r;
  r.f.assign(cm.n, 0.0);
  r.g.assign(cm.m, 0.0);
  std::vector<double> f2, g2;
  const double eps = cfg.epsilon;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    softmin_rows(cm, false, eps, lb, r.g, f2);
    softmin_rows(cm, true, eps, la, r.f, g2);
    double err = 0.0;
    for (std::size_t i = 0; i < cm.n; ++i) err = std::max(err, std::abs(f2[i] - r.f[i]));
    for (std::size_t j = 0; j < cm.m; ++j) err = std::max(err, std::abs(g2[j] - r.g[j]));
    for (std::size_t i = 0; i < cm.n; ++i) r.f[i] = 0.5 * (r.f[i] + f2[i]);
    for (std::size_t j = 0; j < cm.m; ++j) r.g[j] = 0.5 * (r.g[j] + g2[j]);
    r.iterations = it;
    if (err < cfg.tolerance) {
      r.converged = true;
      break;
    }
  }
  // Final full (non-averaged) update, both blocks from the pre-update pair.
  softmin_rows(cm, false, eps, lb, r.g, f2);
  softmin_rows(cm, true, eps, la, r.f, g2);
  r.f.swap(f2);
  r.g.swap(g2);
  double va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < cm.n; ++i) va += wa[i] * r.f[i];
  for (std::size_t j = 0; j < cm.m; ++j) vb += wb[j] * r.g[j];
  r.value = va + vb;
  return r;
}

// Symmetric problem OT(a,a): single potential, averaged fixed-point update.
SolveResult solve_self(const CostMatrix& cm, const std::vector<double>& la,
                       const std::vector<double>& wa, const SinkhornConfig& cfg) {
  SolveResult r;
  r.f.assign(cm.n, 0.0);
  std::vector<double> f2;
  const double eps = cfg.epsilon;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    softmin_rows(cm, false, eps, la, r.f, f2);
    double err = 0.0;
    for (std::size_t i = 0; i < cm.n; ++i) err = std::max(err, std::abs(f2[i] - r.f[i]));
    for (std::size_t i = 0; i < cm.n; ++i) r.f[i] = 0.5 * (r.f[i] + f2[i]);
    r.iterations = it;
    if (err < cfg.tolerance) {
      r.converged = true;
      break;
    }
  }
  softmin_rows(cm, false, eps, la, r.f, f2);
  r.f.swap(f2);
  r.g = r.f;
  double va = 0.0;
  for (std::size_t i = 0; i < cm.n; ++i) va += wa[i] * r.f[i];
  r.value = 2.0 * va;
  return r;
}

void check_inputs(const PointCloud& x, const PointCloud& y) {
  if (x.size() == 0 || y.size() == 0)
    throw ValidationError("sinkhorn_divergence of empty cloud");
  x.validate();
  y.validate();
}

// Gradient of the ground cost in its first argument.
Vec3 cost_grad_first(const Point3& a, const Point3& b, double p,
                     SinkhornConfig::Cost kind) {
  const Vec3 d = a - b;
  if (kind == SinkhornConfig::Cost::powered_euclidean) {
    const double r = d.norm();
    if (r == 0.0) return {};
    return std::pow(r, p - 2.0) * d;
  }
  auto comp = [&](double t) {
    return t == 0.0 ? 0.0 : std::pow(std::abs(t), p - 1.0) * (t > 0.0 ? 1.0 : -1.0);
  };
  if (p == 1.0) return {comp(d.x), comp(d.y), comp(d.z)};
  const double np = std::pow(std::pow(std::abs(d.x), p) + std::pow(std::abs(d.y), p) +
                                 std::pow(std::abs(d.z), p),
                             1.0 / p);
  if (np == 0.0) return {};
  const double s = std::pow(np, 1.0 - p) / p;
  return s * Vec3{comp(d.x), comp(d.y), comp(d.z)};
}

}  // namespace

SinkhornResult sinkhorn_divergence(const PointCloud& x, const PointCloud& y,
                                   const SinkhornConfig& cfg) {
  check_inputs(x, y);
  if (!(cfg.epsilon > 0.0)) throw ValidationError("sinkhorn epsilon must be positive");

  const CostMatrix cxy = build_cost(x, y, cfg);
  const CostMatrix cxx = build_cost(x, x, cfg);
  const CostMatrix cyy = build_cost(y, y, cfg);
  const std::vector<double> la = log_weights(x), lb = log_weights(y);

  const SolveResult cross = solve_cross(cxy, la, lb, x.weights, y.weights, cfg);
  const SolveResult sx = solve_self(cxx, la, x.weights, cfg);
  const SolveResult sy = solve_self(cyy, lb, y.weights, cfg);

  SinkhornResult out;
  out.value = cross.value - 0.5 * sx.value - 0.5 * sy.value;
  out.converged = cross.converged && sx.converged && sy.converged;
  out.iterations = std::max(cross.iterations, std::max(sx.iterations, sy.iterations));
  return out;
}

LossGrad sinkhorn_value_and_grad(const PointCloud& x, const PointCloud& y,
                                 const SinkhornConfig& cfg) {
  check_inputs(x, y);
  const std::size_t n = x.size(), m = y.size();
  const CostMatrix cxy = build_cost(x, y, cfg);
  const CostMatrix cxx = build_cost(x, x, cfg);
  const CostMatrix cyy = build_cost(y, y, cfg);
  const std::vector<double> la = log_weights(x), lb = log_weights(y);

  const SolveResult cross = solve_cross(cxy, la, lb, x.weights, y.weights, cfg);
  const SolveResult sx = solve_self(cxx, la, x.weights, cfg);
  const SolveResult sy = solve_self(cyy, lb, y.weights, cfg);

  LossGrad out;
  out.value = cross.value - 0.5 * sx.value - 0.5 * sy.value;
  out.converged = cross.converged && sx.converged && sy.converged;
  out.grad_a.assign(n, Vec3{});
  out.grad_b.assign(m, Vec3{});

  const double eps = cfg.epsilon;
  // Transport plans at the fixed potentials (envelope treatment): the cross
  // plan drives both clouds, each self plan only its own (factor 2 from the
  // symmetric pair collapses against the -1/2 debias weight).
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Vec3 acc;
      for (std::size_t j = 0; j < m; ++j) {
        const double lpi = la[i] + lb[j] + (cross.f[i] + cross.g[j] - cxy(i, j)) / eps;
        acc += std::exp(lpi) * cost_grad_first(x.points[i], y.points[j], cfg.p, cfg.cost);
      }
      for (std::size_t j = 0; j < n; ++j) {
        const double lpi = la[i] + la[j] + (sx.f[i] + sx.f[j] - cxx(i, j)) / eps;
        acc -= std::exp(lpi) * cost_grad_first(x.points[i], x.points[j], cfg.p, cfg.cost);
      }
      out.grad_a[i] = acc;
    }
  });
  parallel_for(m, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
      Vec3 acc;
      for (std::size_t i = 0; i < n; ++i) {
        const double lpi = la[i] + lb[j] + (cross.f[i] + cross.g[j] - cxy(i, j)) / eps;
        acc += std::exp(lpi) * cost_grad_first(y.points[j], x.points[i], cfg.p, cfg.cost);
      }
      for (std::size_t i = 0; i < m; ++i) {
        const double lpi = lb[i] + lb[j] + (sy.f[i] + sy.f[j] - cyy(i, j)) / eps;
        acc -= std::exp(lpi) * cost_grad_first(y.points[j], y.points[i], cfg.p, cfg.cost);
      }
      out.grad_b[j] = acc;
    }
  });
  return out;
}

}  // namespace svfreg
