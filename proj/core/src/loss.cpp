#include "svfreg/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "svfreg/kdtree.hpp"
#include "svfreg/parallel.hpp"

namespace svfreg {

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::MSE: return "mse";
    case LossKind::Chamfer: return "chamfer";
    case LossKind::Sinkhorn: return "sinkhorn";
  }
  return "?";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "mse") return LossKind::MSE;
  if (name == "chamfer") return LossKind::Chamfer;
  if (name == "sinkhorn") return LossKind::Sinkhorn;
  throw ParseError("unknown loss '" + name + "' (expected mse|chamfer|sinkhorn)");
}

double default_lambda1(LossKind kind) {
  switch (kind) {
    case LossKind::MSE: return 4e4;
    case LossKind::Chamfer: return 8e4;
    case LossKind::Sinkhorn: return 5e3;
  }
  return 4e4;
}

double mse(const PointCloud& x, const PointCloud& y) {
  if (x.size() != y.size())
    throw ValidationError("mse needs clouds of equal size (" +
                          std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
  if (x.size() == 0) throw ValidationError("mse of empty clouds");
  return parallel_sum(x.size(), [&](std::size_t i) {
           return (x.points[i] - y.points[i]).squared_norm();
         }) /
         static_cast<double>(x.size());
}

double chamfer(const PointCloud& x, const PointCloud& y) {
  if (x.size() == 0 || y.size() == 0) throw ValidationError("chamfer of empty cloud");
  const KdTree3 tx(x.points);
  const KdTree3 ty(y.points);
  const double fwd = parallel_sum(x.size(), [&](std::size_t i) {
    double d2;
    ty.nearest(x.points[i], &d2);
    return d2;
  });
  const double bwd = parallel_sum(y.size(), [&](std::size_t j) {
    double d2;
    tx.nearest(y.points[j], &d2);
    return d2;
  });
  return fwd / static_cast<double>(x.size()) + bwd / static_cast<double>(y.size());
}

double exact_ot(const PointCloud& x, const PointCloud& y, double p) {
  const std::size_t n = x.size();
  if (n != y.size()) throw ValidationError("exact_ot needs equally sized clouds");
  if (n == 0 || n > 10) throw ValidationError("exact_ot supports 1 <= N <= 10");
  for (double w : x.weights)
    if (std::abs(w - 1.0 / n) > 1e-9)
      throw ValidationError("exact_ot needs uniform weights");
  for (double w : y.weights)
    if (std::abs(w - 1.0 / n) > 1e-9)
      throw ValidationError("exact_ot needs uniform weights");

  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[i * n + j] = std::pow((x.points[i] - y.points[j]).norm(), p) / p;

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::max();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += cost[i * n + perm[i]];
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(n);
}

double kl_diag_gaussian(const std::vector<double>& mu, const std::vector<double>& sigma) {
  if (mu.size() != sigma.size())
    throw ValidationError("kl_diag_gaussian needs matching mu/sigma lengths");
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw ValidationError("kl_diag_gaussian needs sigma > 0");
    const double s2 = sigma[i] * sigma[i];
    acc += s2 + mu[i] * mu[i] - 1.0 - std::log(s2);
  }
  return 0.5 * acc;
}

GridField laplacian(const GridField& v) {
  v.validate();
  const int V = v.V;
  if (V < 3) throw ValidationError("laplacian needs V >= 3");
  const double inv_h2 = 1.0 / (v.spacing() * v.spacing());
  GridField out(V);
  parallel_for(v.node_count(), [&](std::size_t nb, std::size_t ne) {
    for (std::size_t n = nb; n < ne; ++n) {
      const int iz = static_cast<int>(n % V);
      const int iy = static_cast<int>((n / V) % V);
      const int ix = static_cast<int>(n / (static_cast<std::size_t>(V) * V));
      const Vec3 center = v.at(n);
      Vec3 acc;
      const int idx[3] = {ix, iy, iz};
      for (int a = 0; a < 3; ++a) {
        int lo[3] = {ix, iy, iz}, hi[3] = {ix, iy, iz};
        lo[a] = std::max(idx[a] - 1, 0);        // replicate ghost
        hi[a] = std::min(idx[a] + 1, V - 1);
        acc += v.at(lo[0], lo[1], lo[2]) + v.at(hi[0], hi[1], hi[2]) - 2.0 * center;
      }
      out.set(n, inv_h2 * acc);
    }
  });
  return out;
}

double r_smooth(const GridField& v, double alpha, double gamma) {
  const GridField lap = laplacian(v);
  const std::size_t m = v.value_count();
  const double sum = parallel_sum(m, [&](std::size_t i) {
    const double w = -alpha * lap.data[i] + gamma * v.data[i];
    return w * w;
  });
  return sum / static_cast<double>(m);
}

GridField r_smooth_gradient(const GridField& v, double alpha, double gamma) {
  const GridField lap = laplacian(v);
  const std::size_t m = v.value_count();
  GridField w(v.V);
  for (std::size_t i = 0; i < m; ++i) w.data[i] = -alpha * lap.data[i] + gamma * v.data[i];
  // d/dv mean((-a L + g I) v)^2 = (2/m) (-a L^T + g I) w; L is self-adjoint.
  const GridField lw = laplacian(w);
  GridField grad(v.V);
  const double scale = 2.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i)
    grad.data[i] = scale * (-alpha * lw.data[i] + gamma * w.data[i]);
  return grad;
}

double r_vert(const PointCloud& x, const PointCloud& x_star) {
  if (x.size() != x_star.size())
    throw ValidationError("r_vert needs clouds of equal size");
  if (x.size() == 0) throw ValidationError("r_vert of empty clouds");
  return parallel_sum(x.size(), [&](std::size_t i) {
           return (x.points[i] - x_star.points[i]).norm1();
         }) /
         static_cast<double>(x.size());
}

namespace {

inline double sign(double a) { return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0); }

LossGrad mse_value_and_grad(const PointCloud& a, const PointCloud& b) {
  LossGrad r;
  r.value = mse(a, b);
  const std::size_t n = a.size();
  r.grad_a.assign(n, Vec3{});
  r.grad_b.assign(n, Vec3{});
  const double s = 2.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 d = s * (a.points[i] - b.points[i]);
    r.grad_a[i] = d;
    r.grad_b[i] = -d;
  }
  return r;
}

LossGrad chamfer_value_and_grad(const PointCloud& a, const PointCloud& b) {
  if (a.size() == 0 || b.size() == 0) throw ValidationError("chamfer of empty cloud");
  LossGrad r;
  const std::size_t n = a.size(), m = b.size();
  r.grad_a.assign(n, Vec3{});
  r.grad_b.assign(m, Vec3{});
  const KdTree3 ta(a.points);
  const KdTree3 tb(b.points);
  std::vector<int> nn_ab(n), nn_ba(m);
  std::vector<double> d_ab(n), d_ba(m);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) nn_ab[i] = tb.nearest(a.points[i], &d_ab[i]);
  });
  parallel_for(m, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) nn_ba[j] = ta.nearest(b.points[j], &d_ba[j]);
  });
  double sum_ab = 0.0, sum_ba = 0.0;
  for (double d : d_ab) sum_ab += d;
  for (double d : d_ba) sum_ba += d;
  r.value = sum_ab / static_cast<double>(n) + sum_ba / static_cast<double>(m);

  const double sa = 2.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 d = sa * (a.points[i] - b.points[nn_ab[i]]);
    r.grad_a[i] += d;
    r.grad_b[nn_ab[i]] -= d;
  }
  const double sb = 2.0 / static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j) {
    const Vec3 d = sb * (b.points[j] - a.points[nn_ba[j]]);
    r.grad_b[j] += d;
    r.grad_a[nn_ba[j]] -= d;
  }
  return r;
}

}  // namespace

// Implemented in sinkhorn.cpp.
LossGrad sinkhorn_value_and_grad(const PointCloud& a, const PointCloud& b,
                                 const SinkhornConfig& cfg);

LossGrad loss_value_and_grad(LossKind kind, const PointCloud& a, const PointCloud& b,
                             const SinkhornConfig& sinkhorn_cfg) {
  switch (kind) {
    case LossKind::MSE: return mse_value_and_grad(a, b);
    case LossKind::Chamfer: return chamfer_value_and_grad(a, b);
    case LossKind::Sinkhorn: return sinkhorn_value_and_grad(a, b, sinkhorn_cfg);
  }
  throw ValidationError("unknown loss kind");
}

namespace {

double loss_value(LossKind kind, const PointCloud& a, const PointCloud& b,
                  const SinkhornConfig& cfg, bool* converged) {
  switch (kind) {
    case LossKind::MSE: return mse(a, b);
    case LossKind::Chamfer: return chamfer(a, b);
    case LossKind::Sinkhorn: {
      const SinkhornResult r = sinkhorn_divergence(a, b, cfg);
      if (converged) *converged = *converged && r.converged;
      return r.value;
    }
  }
  throw ValidationError("unknown loss kind");
}

}  // namespace

ObjectiveBreakdown objective(const PointCloud& x, const PointCloud& y,
                             const GridField& v_raw, const ObjectiveConfig& cfg) {
  const GridField v = gaussian_smooth(v_raw, cfg.kernel);
  const Deformation fwd = exponentiate(v, cfg.squaring_steps);
  const Deformation bwd = exponentiate(invert_velocity(v), cfg.squaring_steps);
  const PointCloud x_star = warp_points(fwd, x);
  const PointCloud y_star = warp_points(bwd, y);

  ObjectiveBreakdown out;
  out.data_forward =
      0.5 * cfg.reg.lambda1 *
      loss_value(cfg.loss, y, x_star, cfg.sinkhorn, &out.sinkhorn_converged);
  out.data_backward =
      0.5 * cfg.reg.lambda1 *
      loss_value(cfg.loss, x, y_star, cfg.sinkhorn, &out.sinkhorn_converged);
  out.smooth = cfg.reg.lambda2 * r_smooth(v, cfg.reg.alpha, cfg.reg.gamma);
  out.vert_forward = 0.5 * cfg.reg.lambda3 * r_vert(x, x_star);
  out.vert_backward = 0.5 * cfg.reg.lambda3 * r_vert(y, y_star);
  return out;
}

}  // namespace svfreg
