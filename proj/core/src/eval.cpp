#include "svfreg/eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "svfreg/deform.hpp"
#include "svfreg/kdtree.hpp"
#include "svfreg/parallel.hpp"

namespace svfreg {

MetricReport MetricReport::from_samples(std::vector<double> samples) {
  MetricReport r;
  if (samples.empty()) throw ValidationError("metric report needs at least one sample");
  r.per_sample = std::move(samples);
  const std::size_t n = r.per_sample.size();
  double sum = 0.0;
  for (double v : r.per_sample) sum += v;
  r.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : r.per_sample) ss += (v - r.mean) * (v - r.mean);
  r.stddev = std::sqrt(ss / static_cast<double>(n));
  std::vector<double> sorted = r.per_sample;
  std::sort(sorted.begin(), sorted.end());
  r.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return r;
}

double fit_rmse_3nn(const TriMesh& warped, const TriMesh& fixed) {
  if (warped.vertices.empty()) throw ValidationError("fit_rmse_3nn: empty warped mesh");
  if (fixed.vertices.size() < 3)
    throw ValidationError("fit_rmse_3nn needs at least 3 fixed vertices");
  const KdTree3 tree(fixed.vertices);
  const std::size_t n = warped.vertices.size();
  const double total = parallel_sum(n, [&](std::size_t i) {
    const auto nn = tree.knearest(warped.vertices[i], 3);
    return (nn[0].first + nn[1].first + nn[2].first) / 3.0;
  });
  return std::sqrt(total / static_cast<double>(n));
}

double fit_rmse_corresponded(const std::vector<Point3>& a, const std::vector<Point3>& b) {
  if (a.size() != b.size())
    throw ValidationError("fit_rmse_corresponded needs equal vertex counts");
  if (a.empty()) throw ValidationError("fit_rmse_corresponded of empty meshes");
  const double total = parallel_sum(
      a.size(), [&](std::size_t i) { return (a[i] - b[i]).squared_norm(); });
  return std::sqrt(total / static_cast<double>(a.size()));
}

double fit_rmse_corresponded(const TriMesh& a, const TriMesh& b) {
  return fit_rmse_corresponded(a.vertices, b.vertices);
}

MetricReport compactness(const std::vector<std::vector<double>>& correspondences, int k_max) {
  const std::size_t n = correspondences.size();
  if (n < 2) throw ValidationError("compactness needs at least 2 shapes");
  const std::size_t d = correspondences[0].size();
  for (const auto& row : correspondences)
    if (row.size() != d) throw ValidationError("compactness rows have unequal lengths");

  Eigen::MatrixXd data(n, d);
  for (std::size_t i = 0; i < n; ++i)
    data.row(i) = Eigen::Map<const Eigen::VectorXd>(correspondences[i].data(), d);
  const Eigen::VectorXd mean = data.colwise().mean();
  data.rowwise() -= mean.transpose();

  // Gram-trick PCA: eigenvalues of (1/(n-1)) X X^T match the covariance's.
  const Eigen::MatrixXd gram = data * data.transpose() / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  Eigen::VectorXd evals = es.eigenvalues().reverse();  // descending
  for (int i = 0; i < evals.size(); ++i) evals(i) = std::max(evals(i), 0.0);
  const double total = evals.sum();
  if (!(total > 0.0)) throw ValidationError("compactness: zero variance (identical shapes)");

  MetricReport r;
  const int kk = std::min<int>(k_max, static_cast<int>(evals.size()));
  if (kk < 1) throw ValidationError("compactness needs K >= 1");
  double acc = 0.0;
  std::vector<double> cum;
  for (int k = 0; k < kk; ++k) {
    acc += evals(k);
    const double pct = 100.0 * acc / total;
    r.curve.emplace_back(k + 1, pct);
    cum.push_back(pct);
  }
  double auc = 0.0;
  for (int k = 0; k + 1 < kk; ++k) auc += 0.5 * (cum[k] + cum[k + 1]);
  r.auc_raw = auc;
  if (kk > 1) r.auc_normalized = auc / static_cast<double>(kk - 1);
  const MetricReport stats = MetricReport::from_samples(cum);
  r.per_sample = stats.per_sample;
  r.median = stats.median;
  r.mean = stats.mean;
  r.stddev = stats.stddev;
  return r;
}

MetricReport compactness(const std::vector<TriMesh>& shapes, int k_max) {
  std::vector<std::vector<double>> rows;
  rows.reserve(shapes.size());
  for (const auto& mesh : shapes) {
    std::vector<double> row;
    row.reserve(3 * mesh.vertices.size());
    for (const auto& v : mesh.vertices) {
      row.push_back(v.x);
      row.push_back(v.y);
      row.push_back(v.z);
    }
    rows.push_back(std::move(row));
  }
  return compactness(rows, k_max);
}

MetricReport generalisability(const PdmModel& model,
                              const std::vector<std::pair<PointCloud, PointCloud>>& test_pairs,
                              const std::vector<int>& ks, const RegistrationConfig& cfg) {
  if (test_pairs.empty()) throw ValidationError("generalisability needs test pairs");
  if (ks.empty()) throw ValidationError("generalisability needs component counts");
  for (int k : ks)
    if (k < 0 || k > model.component_count())
      throw ValidationError("generalisability: k=" + std::to_string(k) + " out of range");

  std::vector<std::vector<double>> rmse_per_k(ks.size());
  std::vector<double> final_k_rmse;
  for (const auto& [moving, fixed] : test_pairs) {
    const RegistrationResult reg = register_svf(moving, fixed, cfg);
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const std::vector<double> coeffs = project(model, reg.v_smoothed, ks[ki]);
      const GridField v_k = reconstruct(model, coeffs);
      const Deformation d = exponentiate(v_k, cfg.objective.squaring_steps);
      const PointCloud warped = warp_points(d, moving);
      rmse_per_k[ki].push_back(fit_rmse_corresponded(warped.points, fixed.points));
    }
    final_k_rmse.push_back(rmse_per_k.back().back());
  }

  MetricReport r = MetricReport::from_samples(final_k_rmse);
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    double mean = 0.0;
    for (double v : rmse_per_k[ki]) mean += v;
    mean /= static_cast<double>(rmse_per_k[ki].size());
    r.curve.emplace_back(ks[ki], mean);
  }
  return r;
}

MetricReport specificity(const PdmModel& model, const std::vector<TriMesh>& training_shapes,
                         const TriMesh& template_mesh, int k, int n_samples, RngSeed seed,
                         int squaring_steps) {
  if (training_shapes.size() < 3)
    throw ValidationError("specificity needs at least 3 training shapes");
  if (n_samples < 1) throw ValidationError("specificity needs n_samples >= 1");
  for (const auto& mesh : training_shapes)
    if (mesh.vertices.size() != template_mesh.vertices.size())
      throw ValidationError("specificity: training shape not in template correspondence");

  std::vector<double> per_draw(n_samples);
  Rng rng(seed);
  std::vector<RngSeed> draw_seeds(n_samples);
  for (int s = 0; s < n_samples; ++s) draw_seeds[s] = RngSeed{rng.next_u64()};

  parallel_for(n_samples, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s) {
      const GridField v = sample_pdm(model, k, draw_seeds[s]);
      const Deformation d = exponentiate(v, squaring_steps);
      const TriMesh generated = warp_mesh(d, template_mesh);
      std::vector<double> rmse;
      rmse.reserve(training_shapes.size());
      for (const auto& train : training_shapes)
        rmse.push_back(fit_rmse_corresponded(generated, train));
      std::partial_sort(rmse.begin(), rmse.begin() + 3, rmse.end());
      per_draw[s] = (rmse[0] + rmse[1] + rmse[2]) / 3.0;
    }
  });
  return MetricReport::from_samples(std::move(per_draw));
}

}  // namespace svfreg
