#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "svfreg/optim.hpp"
#include "svfreg/pdm.hpp"
#include "svfreg/types.hpp"

namespace svfreg {

struct MetricReport {
  std::vector<double> per_sample;
  double median = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  std::vector<std::pair<int, double>> curve;
  std::optional<double> auc_raw;         // trapezoid over (k, value), unit k-steps
  std::optional<double> auc_normalized;  // auc_raw / (K - 1)

  /// Fills median/mean/stddev from the samples.
  static MetricReport from_samples(std::vector<double> samples);
};

/// Shape fit without correspondence: for every vertex of `warped`, the mean
/// squared distance to its 3 nearest `fixed` vertices; returns the square
/// root of the average of those means. One-directional (warped -> fixed).
/// Throws when fixed has fewer than 3 vertices.
double fit_rmse_3nn(const TriMesh& warped, const TriMesh& fixed);

/// RMSE over corresponding vertices. Throws on count mismatch.
double fit_rmse_corresponded(const TriMesh& a, const TriMesh& b);
double fit_rmse_corresponded(const std::vector<Point3>& a, const std::vector<Point3>& b);

/// PCA compactness of registered correspondences: rows are flattened vertex
/// coordinates of each registered shape. Curve entry k (1-based) is the
/// cumulative explained-variance percentage of the top-k components; the AUC
/// is reported raw (trapezoid sum) and normalized by K-1. Throws on fewer
/// than 2 shapes or zero variance.
MetricReport compactness(const std::vector<std::vector<double>>& correspondences, int k_max);
MetricReport compactness(const std::vector<TriMesh>& shapes, int k_max);

/// Model fit to unseen pairs: each pair is registered with the MSE loss, the
/// resulting smoothed field is projected onto the leading k components,
/// reconstructed, exponentiated, and the warped moving cloud scored against
/// the fixed cloud by corresponded RMSE. The curve holds the mean RMSE per k;
/// per-sample values are the RMSEs at the largest k.
MetricReport generalisability(const PdmModel& model,
                              const std::vector<std::pair<PointCloud, PointCloud>>& test_pairs,
                              const std::vector<int>& ks, const RegistrationConfig& cfg);

/// Realism of generated shapes: draws n_samples fields from the model with k
/// components, warps the template, and averages each draw's corresponded
/// RMSE to its 3 nearest training shapes. Deterministic per seed. Throws
/// with fewer than 3 training shapes.
MetricReport specificity(const PdmModel& model, const std::vector<TriMesh>& training_shapes,
                         const TriMesh& template_mesh, int k, int n_samples, RngSeed seed,
                         int squaring_steps = 7);

}  // namespace svfreg
