#include "svfreg/pdm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

namespace svfreg {

void PdmModel::validate() const {
  const int k = component_count();
  const std::size_t d = dimension();
  if (V < 2 || d != 3 * static_cast<std::size_t>(V) * V * V)
    throw ValidationError("pdm model dimension inconsistent with grid size");
  if (components.size() != static_cast<std::size_t>(k) * d)
    throw ValidationError("pdm component buffer size mismatch");
  using MapM = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                              Eigen::RowMajor>>;
  MapM comp(components.data(), k, d);
  const Eigen::MatrixXd gram = comp * comp.transpose();
  const double dev = (gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
  if (k > 0 && dev > 1e-6)
    throw ValidationError("pdm components not orthonormal (deviation " +
                          std::to_string(dev) + ")");
  for (int i = 0; i < k; ++i) {
    if (eigenvalues[i] < -1e-12) throw ValidationError("negative pdm eigenvalue");
    if (i > 0 && eigenvalues[i] > eigenvalues[i - 1] + 1e-12)
      throw ValidationError("pdm eigenvalues not sorted descending");
  }
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Thin SVD of a short-and-wide matrix via its Gram matrix; returns singular
// values (descending) and the corresponding right singular vectors as rows.
// Rows with negligible singular value are dropped.
void gram_svd(const RowMat& stack, Eigen::VectorXd& sv, RowMat& rows) {
  const Eigen::MatrixXd gram = stack * stack.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const Eigen::VectorXd evals = es.eigenvalues();  // ascending
  const Eigen::MatrixXd evecs = es.eigenvectors();
  const int r = static_cast<int>(evals.size());
  const double cutoff = std::max(evals.cwiseMax(0.0).maxCoeff(), 0.0) * 1e-15;

  std::vector<int> keep;
  for (int i = r - 1; i >= 0; --i)
    if (evals(i) > cutoff && evals(i) > 0.0) keep.push_back(i);

  sv.resize(keep.size());
  rows.resize(static_cast<int>(keep.size()), stack.cols());
  for (std::size_t out = 0; out < keep.size(); ++out) {
    const int i = keep[out];
    const double s = std::sqrt(evals(i));
    sv(out) = s;
    rows.row(out) = (stack.transpose() * evecs.col(i)).transpose() / s;
  }
}

struct FitState {
  std::size_t n = 0;  // samples seen
  Eigen::VectorXd mean;
  Eigen::VectorXd m2;  // per-feature sum of squared deviations
  Eigen::VectorXd sv;  // singular values of the centered data seen so far
  RowMat basis;        // right singular vectors, rows

  void update(const RowMat& batch) {
    const std::size_t m = batch.rows();
    const Eigen::VectorXd batch_mean = batch.colwise().mean();
    RowMat centered = batch.rowwise() - batch_mean.transpose();
    const Eigen::VectorXd batch_m2 = centered.array().square().colwise().sum();

    if (n == 0) {
      mean = batch_mean;
      m2 = batch_m2;
      gram_svd(centered, sv, basis);
      n = m;
      return;
    }
    const std::size_t total = n + m;
    const Eigen::VectorXd delta = mean - batch_mean;
    const double w = static_cast<double>(n) * static_cast<double>(m) / total;
    m2 += batch_m2 + w * delta.array().square().matrix();

    RowMat stack(basis.rows() + m + 1, basis.cols());
    stack.topRows(basis.rows()) = sv.asDiagonal() * basis;
    stack.middleRows(basis.rows(), m) = centered;
    stack.bottomRows(1) = std::sqrt(w) * delta.transpose();
    gram_svd(stack, sv, basis);

    mean = (static_cast<double>(n) * mean + static_cast<double>(m) * batch_mean) /
           static_cast<double>(total);
    n = total;
  }
};

}  // namespace

PdmModel fit_pdm(const FieldStream& next, int k, int batch_size) {
  if (k < 1) throw ValidationError("fit_pdm needs K >= 1");
  if (batch_size < 1) throw ValidationError("fit_pdm needs batch_size >= 1");

  FitState state;
  int grid_v = 0;
  std::vector<GridField> batch;
  batch.reserve(batch_size);

  auto flush = [&]() {
    if (batch.empty()) return;
    RowMat rows(batch.size(), batch[0].data.size());
    for (std::size_t i = 0; i < batch.size(); ++i)
      rows.row(i) = Eigen::Map<const Eigen::VectorXd>(batch[i].data.data(),
                                                      batch[i].data.size());
    state.update(rows);
    batch.clear();
  };

  while (auto field = next()) {
    field->validate();
    if (grid_v == 0) grid_v = field->V;
    if (field->V != grid_v)
      throw ValidationError("fit_pdm: inconsistent grid sizes (" +
                            std::to_string(grid_v) + " vs " + std::to_string(field->V) + ")");
    batch.push_back(std::move(*field));
    if (static_cast<int>(batch.size()) == batch_size) flush();
  }
  flush();

  if (state.n < 2) throw ValidationError("fit_pdm needs at least 2 fields");
  const std::size_t dim = 3 * static_cast<std::size_t>(grid_v) * grid_v * grid_v;
  if (static_cast<std::size_t>(k) > std::min<std::size_t>(state.n, dim))
    throw ValidationError("fit_pdm: K=" + std::to_string(k) +
                          " exceeds min(sample count, dimension)");

  PdmModel model;
  model.V = grid_v;
  model.n_samples = state.n;
  model.mean.assign(state.mean.data(), state.mean.data() + state.mean.size());
  const double denom = static_cast<double>(state.n - 1);
  model.total_variance = state.m2.sum() / denom;

  const int keep = std::min<int>(k, static_cast<int>(state.sv.size()));
  model.eigenvalues.resize(keep);
  model.components.resize(static_cast<std::size_t>(keep) * dim);
  for (int i = 0; i < keep; ++i) {
    model.eigenvalues[i] = state.sv(i) * state.sv(i) / denom;
    Eigen::Map<Eigen::VectorXd>(model.components.data() + static_cast<std::size_t>(i) * dim,
                                dim) = state.basis.row(i);
  }
  return model;
}

PdmModel fit_pdm(const std::vector<GridField>& fields, int k, int batch_size) {
  std::size_t cursor = 0;
  return fit_pdm(
      [&]() -> std::optional<GridField> {
        if (cursor >= fields.size()) return std::nullopt;
        return fields[cursor++];
      },
      k, batch_size);
}

std::vector<double> project(const PdmModel& model, const GridField& v, int k) {
  if (k < 0 || k > model.component_count())
    throw ValidationError("project: k out of range");
  if (v.V != model.V) throw ValidationError("project: grid size mismatch");
  const std::size_t d = model.dimension();
  std::vector<double> coeffs(k, 0.0);
  for (int i = 0; i < k; ++i) {
    const double* row = model.components.data() + static_cast<std::size_t>(i) * d;
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) acc += row[j] * (v.data[j] - model.mean[j]);
    coeffs[i] = acc;
  }
  return coeffs;
}

GridField reconstruct(const PdmModel& model, const std::vector<double>& coeffs) {
  if (coeffs.size() > static_cast<std::size_t>(model.component_count()))
    throw ValidationError("reconstruct: more coefficients than components");
  const std::size_t d = model.dimension();
  GridField out(model.V);
  std::copy(model.mean.begin(), model.mean.end(), out.data.begin());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double* row = model.components.data() + i * d;
    const double c = coeffs[i];
    for (std::size_t j = 0; j < d; ++j) out.data[j] += c * row[j];
  }
  return out;
}

GridField sample_pdm(const PdmModel& model, int k, RngSeed seed) {
  if (k < 0 || k > model.component_count())
    throw ValidationError("sample_pdm: k out of range");
  Rng rng(seed);
  std::vector<double> coeffs(k);
  for (int i = 0; i < k; ++i)
    coeffs[i] = std::sqrt(std::max(model.eigenvalues[i], 0.0)) * rng.normal();
  return reconstruct(model, coeffs);
}

std::vector<double> explained_variance_curve(const PdmModel& model) {
  double total = model.total_variance;
  double retained = 0.0;
  for (double ev : model.eigenvalues) retained += ev;
  total = std::max(total, retained);
  if (!(total > 0.0)) throw ValidationError("explained_variance_curve: zero variance");
  std::vector<double> curve;
  curve.reserve(model.eigenvalues.size());
  double acc = 0.0;
  for (double ev : model.eigenvalues) {
    acc += ev;
    curve.push_back(100.0 * acc / total);
  }
  return curve;
}

}  // namespace svfreg
