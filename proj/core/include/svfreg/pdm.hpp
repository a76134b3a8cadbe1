#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "svfreg/grid.hpp"
#include "svfreg/types.hpp"

namespace svfreg {

/// Tangent-PCA deformation model over flattened (smoothed) velocity fields.
/// `components` holds K orthonormal rows of length 3V^3 in descending
/// eigenvalue order. `total_variance` also counts variance beyond the
/// retained components when the fit could measure it; the model file does
/// not store it, so after loading it falls back to the retained sum.
struct PdmModel {
  int V = 0;
  std::vector<double> mean;         // 3V^3
  std::vector<double> components;   // K x 3V^3, row-major
  std::vector<double> eigenvalues;  // K, descending
  std::uint64_t n_samples = 0;
  double total_variance = 0.0;

  int component_count() const { return static_cast<int>(eigenvalues.size()); }
  std::size_t dimension() const { return mean.size(); }

  /// Throws ValidationError when rows are not orthonormal within 1e-6 or
  /// eigenvalues are negative/unsorted.
  void validate() const;
};

/// Pull-based stream of velocity fields; returns nullopt when exhausted.
using FieldStream = std::function<std::optional<GridField>()>;

/// Incremental PCA over the stream, consumed in batches of `batch_size`.
/// Updates keep the full running rank (the mean-augmented rank-update, not
/// truncated), so the result matches a full-batch eigendecomposition for any
/// batch schedule; the requested K only truncates the returned model.
/// Throws on fewer than 2 fields, inconsistent grid sizes, or K larger than
/// min(#fields, 3V^3).
PdmModel fit_pdm(const FieldStream& next, int k, int batch_size);
PdmModel fit_pdm(const std::vector<GridField>& fields, int k, int batch_size);

/// First k coefficients of v in the model basis: components * (v - mean).
std::vector<double> project(const PdmModel& model, const GridField& v, int k);

/// mean + sum coeffs_i * component_i, reshaped to the model grid.
GridField reconstruct(const PdmModel& model, const std::vector<double>& coeffs);

/// Draws z_i ~ N(0, eigenvalue_i) for i < k and reconstructs. Deterministic
/// per seed.
GridField sample_pdm(const PdmModel& model, int k, RngSeed seed);

/// Cumulative explained-variance percentages per retained component, against
/// the model's total variance. Throws when total variance is zero.
std::vector<double> explained_variance_curve(const PdmModel& model);

}  // namespace svfreg
