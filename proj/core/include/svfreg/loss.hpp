#pragma once

#include <string>
#include <vector>

#include "svfreg/deform.hpp"
#include "svfreg/grid.hpp"
#include "svfreg/types.hpp"

namespace svfreg {

enum class LossKind { MSE, Chamfer, Sinkhorn };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

/// Default data-term weight per loss: 4e4 (MSE), 8e4 (Chamfer), 5e3 (Sinkhorn).
double default_lambda1(LossKind kind);

struct SinkhornConfig {
  /// Ground-cost convention for (1/p)|x-y|_p: the Euclidean distance raised
  /// to p (default), or the l_p norm of the difference.
  enum class Cost { powered_euclidean, p_norm };

  double epsilon = 1e-4;
  double p = 1.0;
  int max_iterations = 1000;
  double tolerance = 1e-6;  // max dual-potential update
  Cost cost = Cost::powered_euclidean;
};

struct RegularizerConfig {
  double alpha = 1e-6;
  double gamma = 1.0;
  double lambda1 = 4e4;
  double lambda2 = 10.0;
  double lambda3 = 100.0;
};

/// (1/N) sum |x_i - y_i|^2 over corresponding points. Throws on size mismatch.
double mse(const PointCloud& x, const PointCloud& y);

/// (1/N) sum_i min_j |x_i - y_j|^2 + (1/M) sum_j min_i |x_i - y_j|^2.
double chamfer(const PointCloud& x, const PointCloud& y);

struct SinkhornResult {
  double value = 0.0;
  bool converged = true;
  int iterations = 0;
};

/// Debiased Sinkhorn divergence OT_e(a,b) - (OT_e(a,a) + OT_e(b,b))/2,
/// solved by symmetrized log-domain iterations on the dual potentials.
/// A run that hits max_iterations before the tolerance still returns its
/// value with converged = false.
SinkhornResult sinkhorn_divergence(const PointCloud& x, const PointCloud& y,
                                   const SinkhornConfig& cfg);

/// Brute-force assignment oracle: min over permutations of
/// (1/N) sum (1/p)|x_i - y_pi(i)|^p. Uniform weights, N <= 10.
double exact_ot(const PointCloud& x, const PointCloud& y, double p);

/// KL(N(mu, diag(sigma^2)) || N(0, I)), sigma entries are standard deviations.
double kl_diag_gaussian(const std::vector<double>& mu, const std::vector<double>& sigma);

/// Central-difference Laplacian per component, node spacing h, replicate
/// boundary (the resulting operator is self-adjoint). Requires V >= 3.
GridField laplacian(const GridField& v);

/// Mean over all 3V^3 entries of (-alpha * lap(v) + gamma * v)^2.
double r_smooth(const GridField& v, double alpha, double gamma);

/// Gradient of r_smooth with respect to v.
GridField r_smooth_gradient(const GridField& v, double alpha, double gamma);

/// Mean L1 distance between corresponding points. Throws on size mismatch.
double r_vert(const PointCloud& x, const PointCloud& x_star);

struct ObjectiveConfig {
  LossKind loss = LossKind::MSE;
  RegularizerConfig reg;
  SinkhornConfig sinkhorn;
  SmoothingKernel kernel;
  int squaring_steps = 7;
};

/// Weighted objective terms; they sum exactly to total().
struct ObjectiveBreakdown {
  double data_forward = 0.0;   // (lambda1/2) L(y, phi_v x)
  double data_backward = 0.0;  // (lambda1/2) L(x, phi_-v y)
  double smooth = 0.0;         // lambda2 R_smooth(v)
  double vert_forward = 0.0;   // (lambda3/2) R_vert(x, phi_v x)
  double vert_backward = 0.0;  // (lambda3/2) R_vert(y, phi_-v y)
  bool sinkhorn_converged = true;

  double total() const {
    return data_forward + data_backward + smooth + vert_forward + vert_backward;
  }
};

/// Full registration objective at raw field v_raw:
/// v = smooth(v_raw), phi = Exp(v), phi_inv = Exp(-v), then the symmetric
/// data terms plus R_smooth and R_vert.
ObjectiveBreakdown objective(const PointCloud& x, const PointCloud& y,
                             const GridField& v_raw, const ObjectiveConfig& cfg);

/// Loss value with gradients with respect to both clouds' point positions.
/// Chamfer holds the nearest-neighbor assignment fixed; Sinkhorn holds the
/// converged potentials fixed (envelope treatment).
struct LossGrad {
  double value = 0.0;
  std::vector<Vec3> grad_a;
  std::vector<Vec3> grad_b;
  bool converged = true;
};

LossGrad loss_value_and_grad(LossKind kind, const PointCloud& a, const PointCloud& b,
                             const SinkhornConfig& sinkhorn_cfg);

}  // namespace svfreg
