#pragma once

#include <vector>

#include "svfreg/loss.hpp"

namespace svfreg {

struct AdamConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
  int max_iterations = 500;
  /// Stop when the relative objective decrease over `stop_window` iterations
  /// falls below this.
  double stop_tolerance = 1e-6;
  int stop_window = 10;
};

struct RegistrationConfig {
  int grid_size = 64;
  ObjectiveConfig objective;
  AdamConfig adam;
};

struct TraceEntry {
  int iteration = 0;
  ObjectiveBreakdown breakdown;
};

struct RegistrationResult {
  GridField v_raw;
  GridField v_smoothed;
  Deformation forward;
  Deformation inverse;
  std::vector<TraceEntry> trace;
  bool converged = false;
};

/// Exact reverse-mode derivative of objective() with respect to every v_raw
/// entry, chaining through smoothing, both exponentiation branches, point
/// warping and the selected loss. Chamfer holds nearest-neighbor assignments
/// fixed; Sinkhorn holds converged potentials fixed.
GridField gradient(const PointCloud& x, const PointCloud& y, const GridField& v_raw,
                   const ObjectiveConfig& cfg);

struct ObjectiveEval {
  ObjectiveBreakdown breakdown;
  GridField grad;
};

/// Objective value and gradient from one shared forward/backward pass.
ObjectiveEval objective_with_gradient(const PointCloud& x, const PointCloud& y,
                                      const GridField& v_raw, const ObjectiveConfig& cfg);

/// Adam-driven minimization of the objective over v_raw, starting from zero.
/// Returns the best-scoring iterate (so the final objective never exceeds
/// the initial one) together with the full evaluation trace. Throws
/// NumericError if the objective turns non-finite. Deterministic: the seed
/// is accepted for interface stability but the optimization itself draws no
/// randomness.
RegistrationResult register_svf(const PointCloud& moving, const PointCloud& fixed,
                                const RegistrationConfig& cfg, RngSeed seed = {});

}  // namespace svfreg
