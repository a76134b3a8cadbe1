#include "svfreg/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace svfreg {

namespace {

inline double sign(double a) { return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0); }

// Reverse of one squaring step u_k(n) = u(n) + S(u, p_n + u(n)) where
// S is trilinear sampling of u itself. gbar is d total / d u_k; the return
// value accumulates d total / d u. The corner scatter makes this serial.
GridField backward_squaring(const GridField& u, const GridField& gbar) {
  const int V = u.V;
  const double h = u.spacing();
  GridField gprev(V);
  double jac[3][3];
  const std::size_t nodes = u.node_count();
  for (std::size_t n = 0; n < nodes; ++n) {
    const Vec3 g = gbar.at(n);
    if (g.x == 0.0 && g.y == 0.0 && g.z == 0.0) {
      continue;
    }
    const std::size_t iz = n % V;
    const std::size_t iy = (n / V) % V;
    const std::size_t ix = n / (static_cast<std::size_t>(V) * V);
    const Point3 pos{-1.0 + ix * h, -1.0 + iy * h, -1.0 + iz * h};
    const Vec3 a = u.at(n);
    const Point3 q = pos + a;

    trilinear_sample_with_jacobian(u, q, jac);
    // identity path + position path through q = p_n + u(n)
    const Vec3 jt{jac[0][0] * g.x + jac[1][0] * g.y + jac[2][0] * g.z,
                  jac[0][1] * g.x + jac[1][1] * g.y + jac[2][1] * g.z,
                  jac[0][2] * g.x + jac[1][2] * g.y + jac[2][2] * g.z};
    gprev.add(n, g + jt);
    // field-value path: scatter through the interpolation weights
    const TrilinearStencil st = trilinear_stencil(u, q);
    for (int c = 0; c < 8; ++c) gprev.add(st.corner[c], st.weight[c] * g);
  }
  return gprev;
}

// Scatter per-point cotangents into the displacement grid: each point read
// the field at its own (fixed) position.
void scatter_point_grads(const PointCloud& pts, const std::vector<Vec3>& gpts,
                         GridField& gu) {
  for (std::size_t i = 0; i < pts.points.size(); ++i) {
    const Vec3& g = gpts[i];
    if (g.x == 0.0 && g.y == 0.0 && g.z == 0.0) continue;
    const TrilinearStencil st = trilinear_stencil(gu, pts.points[i]);
    for (int c = 0; c < 8; ++c) gu.add(st.corner[c], st.weight[c] * g);
  }
}

}  // namespace

ObjectiveEval objective_with_gradient(const PointCloud& x, const PointCloud& y,
                                      const GridField& v_raw, const ObjectiveConfig& cfg) {
  const int T = cfg.squaring_steps;
  const GridField v = gaussian_smooth(v_raw, cfg.kernel);

  std::vector<GridField> levels_f, levels_b;
  const Deformation fwd = exponentiate_with_levels(v, T, levels_f);
  const Deformation bwd = exponentiate_with_levels(invert_velocity(v), T, levels_b);
  const PointCloud x_star = warp_points(fwd, x);
  const PointCloud y_star = warp_points(bwd, y);

  const LossGrad lf = loss_value_and_grad(cfg.loss, y, x_star, cfg.sinkhorn);
  const LossGrad lb = loss_value_and_grad(cfg.loss, x, y_star, cfg.sinkhorn);

  ObjectiveEval out;
  out.breakdown.data_forward = 0.5 * cfg.reg.lambda1 * lf.value;
  out.breakdown.data_backward = 0.5 * cfg.reg.lambda1 * lb.value;
  out.breakdown.smooth = cfg.reg.lambda2 * r_smooth(v, cfg.reg.alpha, cfg.reg.gamma);
  out.breakdown.vert_forward = 0.5 * cfg.reg.lambda3 * r_vert(x, x_star);
  out.breakdown.vert_backward = 0.5 * cfg.reg.lambda3 * r_vert(y, y_star);
  out.breakdown.sinkhorn_converged = lf.converged && lb.converged;

  const std::size_t n = x.size(), m = y.size();

  // d total / d x_star: data term + vertex-drift term.
  std::vector<Vec3> gx(n), gy(m);
  const double wl = 0.5 * cfg.reg.lambda1;
  const double wv3 = 0.5 * cfg.reg.lambda3;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 d = x_star.points[i] - x.points[i];
    gx[i] = wl * lf.grad_b[i] +
            (wv3 / n) * Vec3{sign(d.x), sign(d.y), sign(d.z)};
  }
  for (std::size_t j = 0; j < m; ++j) {
    const Vec3 d = y_star.points[j] - y.points[j];
    gy[j] = wl * lb.grad_b[j] +
            (wv3 / m) * Vec3{sign(d.x), sign(d.y), sign(d.z)};
  }

  GridField gu_f(v.V), gu_b(v.V);
  scatter_point_grads(x, gx, gu_f);
  scatter_point_grads(y, gy, gu_b);
  for (int k = T; k >= 1; --k) {
    gu_f = backward_squaring(levels_f[k - 1], gu_f);
    gu_b = backward_squaring(levels_b[k - 1], gu_b);
  }

  // u0 = +-v / 2^T, then the smoothness penalty on v, then the smoothing adjoint.
  const double scale = std::ldexp(1.0, -T);
  GridField gv(v.V);
  for (std::size_t i = 0; i < gv.data.size(); ++i)
    gv.data[i] = scale * (gu_f.data[i] - gu_b.data[i]);

  const GridField gr = r_smooth_gradient(v, cfg.reg.alpha, cfg.reg.gamma);
  for (std::size_t i = 0; i < gv.data.size(); ++i)
    gv.data[i] += cfg.reg.lambda2 * gr.data[i];

  out.grad = gaussian_smooth_adjoint(gv, cfg.kernel);
  return out;
}

GridField gradient(const PointCloud& x, const PointCloud& y, const GridField& v_raw,
                   const ObjectiveConfig& cfg) {
  return objective_with_gradient(x, y, v_raw, cfg).grad;
}

RegistrationResult register_svf(const PointCloud& moving, const PointCloud& fixed,
                                const RegistrationConfig& cfg, RngSeed) {
  moving.validate();
  fixed.validate();
  const int V = cfg.grid_size;
  GridField v_raw(V);
  GridField m1(V), m2(V);  // Adam moments

  RegistrationResult result;
  result.trace.reserve(cfg.adam.max_iterations);

  GridField best_v = v_raw;
  double best_total = std::numeric_limits<double>::max();
  double beta1_t = 1.0, beta2_t = 1.0;

  const AdamConfig& ad = cfg.adam;
  for (int it = 0; it < ad.max_iterations; ++it) {
    ObjectiveEval eval = objective_with_gradient(moving, fixed, v_raw, cfg.objective);
    const double total = eval.breakdown.total();
    if (!std::isfinite(total))
      throw NumericError("objective diverged (non-finite) at iteration " +
                         std::to_string(it));
    result.trace.push_back({it, eval.breakdown});
    if (total < best_total) {
      best_total = total;
      best_v = v_raw;
    }

    if (it >= ad.stop_window) {
      const double prev = result.trace[it - ad.stop_window].breakdown.total();
      const double rel = (prev - total) / std::max(std::abs(prev), 1e-300);
      if (rel < ad.stop_tolerance) {
        result.converged = true;
        break;
      }
    }

    beta1_t *= ad.beta1;
    beta2_t *= ad.beta2;
    for (std::size_t i = 0; i < v_raw.data.size(); ++i) {
      const double g = eval.grad.data[i];
      m1.data[i] = ad.beta1 * m1.data[i] + (1.0 - ad.beta1) * g;
      m2.data[i] = ad.beta2 * m2.data[i] + (1.0 - ad.beta2) * g * g;
      const double mhat = m1.data[i] / (1.0 - beta1_t);
      const double vhat = m2.data[i] / (1.0 - beta2_t);
      v_raw.data[i] -= ad.learning_rate * mhat / (std::sqrt(vhat) + ad.eps_hat);
    }
  }

  result.v_raw = std::move(best_v);
  result.v_smoothed = gaussian_smooth(result.v_raw, cfg.objective.kernel);
  result.forward = exponentiate(result.v_smoothed, cfg.objective.squaring_steps);
  result.inverse = exponentiate(invert_velocity(result.v_smoothed), cfg.objective.squaring_steps);
  result.inverse.direction = Deformation::Direction::inverse;
  return result;
}

}  // namespace svfreg
